#pragma once

#include <cmath>
#include <random>

#include <Eigen/Core>

#include "addpg/common.hpp"

namespace addpg::exploration {

/// Discretized Ornstein-Uhlenbeck process
///   x <- x + theta (mu - x) dt + sigma sqrt(dt) xi,   xi ~ N(0, I).
template <typename Scalar>
class OuProcess {
 public:
  using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  OuProcess(VectorT mu, Scalar theta = Scalar(0.15), Scalar sigma = Scalar(0.2), Scalar dt = Scalar(1))
      : mu_(std::move(mu)), theta_(theta), sigma_(sigma), dt_(dt), x_(mu_) {
    if (mu_.size() < 1) throw Error("OU process needs at least one dimension");
    if (!(theta >= 0) || !(sigma >= 0) || !(dt > 0)) throw Error("OU parameters out of range");
  }

  void reset() { x_ = mu_; }

  template <typename Engine>
  const VectorT& sample(Engine& rng) {
    const Scalar noise_scale = sigma_ * std::sqrt(dt_);
    for (Eigen::Index i = 0; i < x_.size(); ++i) {
      const Scalar xi = static_cast<Scalar>(normal_(rng));
      x_(i) += theta_ * (mu_(i) - x_(i)) * dt_ + noise_scale * xi;
    }
    return x_;
  }

  /// Stationary variance of the discrete recurrence: sigma^2 dt / (1 - (1 - theta dt)^2).
  Scalar stationary_variance() const {
    const Scalar rho = Scalar(1) - theta_ * dt_;
    return sigma_ * sigma_ * dt_ / (Scalar(1) - rho * rho);
  }

  const VectorT& state() const { return x_; }
  void set_state(VectorT x) { x_ = std::move(x); }
  const VectorT& mu() const { return mu_; }
  Scalar theta() const { return theta_; }
  Scalar sigma() const { return sigma_; }
  Scalar dt() const { return dt_; }

 private:
  VectorT mu_;
  Scalar theta_;
  Scalar sigma_;
  Scalar dt_;
  VectorT x_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

using Ou = OuProcess<double>;

}  // namespace addpg::exploration
