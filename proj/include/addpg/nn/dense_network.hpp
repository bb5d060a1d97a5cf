#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "addpg/common.hpp"

namespace addpg::nn {

enum class OutputKind { identity, bounded };

/// Per-layer gradients (or any parameter-shaped quantity) mirroring a DenseNetwork.
template <typename Scalar>
struct GradientSet {
  using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  std::vector<MatrixT> weights;
  std::vector<VectorT> biases;

  std::size_t layers() const { return weights.size(); }

  void set_zero() {
    for (auto& w : weights) w.setZero();
    for (auto& b : biases) b.setZero();
  }

  GradientSet& operator+=(const GradientSet& other) {
    check_congruent(other);
    for (std::size_t k = 0; k < weights.size(); ++k) {
      weights[k] += other.weights[k];
      biases[k] += other.biases[k];
    }
    return *this;
  }

  GradientSet& operator*=(Scalar s) {
    for (auto& w : weights) w *= s;
    for (auto& b : biases) b *= s;
    return *this;
  }

  Scalar max_abs() const {
    Scalar m = 0;
    for (const auto& w : weights)
      if (w.size() > 0) m = std::max(m, w.cwiseAbs().maxCoeff());
    for (const auto& b : biases)
      if (b.size() > 0) m = std::max(m, b.cwiseAbs().maxCoeff());
    return m;
  }

  void check_congruent(const GradientSet& other) const {
    if (other.weights.size() != weights.size())
      throw Error("gradient set layer count mismatch");
    for (std::size_t k = 0; k < weights.size(); ++k) {
      if (other.weights[k].rows() != weights[k].rows() ||
          other.weights[k].cols() != weights[k].cols() ||
          other.biases[k].size() != biases[k].size())
        throw Error("gradient set shape mismatch in layer " + std::to_string(k));
    }
  }
};

/// Fully connected feed-forward network with tanh hidden units.
///
/// Samples are stored column-wise: a batch of n inputs is a (layer_sizes[0] x n)
/// matrix. The output layer is either affine (identity) or
/// `offset + scale * tanh(z)` (bounded), where offset/scale come from the
/// output range given at construction.
template <typename Scalar>
class DenseNetwork {
 public:
  using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Gradients = GradientSet<Scalar>;

  struct BackwardResult {
    Gradients params;  // summed over the batch
    MatrixT inputs;    // one column per sample
  };

  DenseNetwork() = default;

  /// Zero-initialized network. Bounded outputs default to the range [-1, 1].
  DenseNetwork(std::vector<int> layer_sizes, OutputKind kind, VectorT output_low = {},
               VectorT output_high = {})
      : sizes_(std::move(layer_sizes)), kind_(kind) {
    if (sizes_.size() < 2) throw Error("layer_sizes needs at least an input and an output layer");
    for (int s : sizes_)
      if (s < 1) throw Error("layer sizes must be positive");
    const int out = sizes_.back();
    if (output_low.size() == 0) output_low = VectorT::Constant(out, Scalar(-1));
    if (output_high.size() == 0) output_high = VectorT::Constant(out, Scalar(1));
    if (output_low.size() != out || output_high.size() != out)
      throw Error("output range length must equal the output layer size");
    if ((output_high.array() <= output_low.array()).any())
      throw Error("output range requires low < high elementwise");
    offset_ = (output_high + output_low) / Scalar(2);
    scale_ = (output_high - output_low) / Scalar(2);
    for (std::size_t k = 0; k + 1 < sizes_.size(); ++k) {
      weights_.push_back(MatrixT::Zero(sizes_[k + 1], sizes_[k]));
      biases_.push_back(VectorT::Zero(sizes_[k + 1]));
    }
  }

  const std::vector<int>& layer_sizes() const { return sizes_; }
  OutputKind output_kind() const { return kind_; }
  std::size_t layers() const { return weights_.size(); }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  VectorT output_low() const { return offset_ - scale_; }
  VectorT output_high() const { return offset_ + scale_; }

  MatrixT& weights(std::size_t k) { return weights_.at(k); }
  const MatrixT& weights(std::size_t k) const { return weights_.at(k); }
  VectorT& biases(std::size_t k) { return biases_.at(k); }
  const VectorT& biases(std::size_t k) const { return biases_.at(k); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t k = 0; k < weights_.size(); ++k) n += weights_[k].size() + biases_[k].size();
    return n;
  }

  bool same_architecture(const DenseNetwork& other) const {
    return sizes_ == other.sizes_ && kind_ == other.kind_;
  }

  bool parameters_finite() const {
    for (std::size_t k = 0; k < weights_.size(); ++k)
      if (!weights_[k].allFinite() || !biases_[k].allFinite()) return false;
    return true;
  }

  Gradients zero_gradients() const {
    Gradients g;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      g.weights.push_back(MatrixT::Zero(weights_[k].rows(), weights_[k].cols()));
      g.biases.push_back(VectorT::Zero(biases_[k].size()));
    }
    return g;
  }

  MatrixT forward(const MatrixT& inputs) const {
    check_input(inputs);
    MatrixT a = inputs;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      MatrixT z = weights_[k] * a;
      z.colwise() += biases_[k];
      a = activate(k, z);
    }
    return a;
  }

  VectorT forward(const VectorT& input) const {
    return forward(MatrixT(input)).col(0);
  }

  /// Gradients of sum_j output_grads.col(j) . forward(inputs).col(j) with respect to
  /// every parameter (summed over the batch) and every input coordinate.
  BackwardResult backward(const MatrixT& inputs, const MatrixT& output_grads) const {
    check_input(inputs);
    if (output_grads.rows() != output_size() || output_grads.cols() != inputs.cols())
      throw Error("output gradient shape mismatch");

    // Post-activation values per layer; acts[0] is the input.
    std::vector<MatrixT> acts;
    acts.reserve(weights_.size() + 1);
    acts.push_back(inputs);
    MatrixT tanh_out;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      MatrixT z = weights_[k] * acts.back();
      z.colwise() += biases_[k];
      if (k + 1 < weights_.size()) {
        acts.push_back(z.array().tanh().matrix());
      } else {
        if (kind_ == OutputKind::bounded) tanh_out = z.array().tanh().matrix();
        acts.push_back(std::move(z));
      }
    }

    BackwardResult result;
    result.params.weights.resize(weights_.size());
    result.params.biases.resize(weights_.size());

    MatrixT delta = output_grads;
    if (kind_ == OutputKind::bounded) {
      delta = (delta.array().colwise() * scale_.array() *
               (Scalar(1) - tanh_out.array().square()))
                  .matrix();
    }
    for (std::size_t k = weights_.size(); k-- > 0;) {
      result.params.weights[k].noalias() = delta * acts[k].transpose();
      result.params.biases[k] = delta.rowwise().sum();
      MatrixT upstream = weights_[k].transpose() * delta;
      if (k > 0) {
        delta = (upstream.array() * (Scalar(1) - acts[k].array().square())).matrix();
      } else {
        result.inputs = std::move(upstream);
      }
    }
    return result;
  }

  std::pair<Gradients, VectorT> backward(const VectorT& input, const VectorT& output_grad) const {
    auto r = backward(MatrixT(input), MatrixT(output_grad));
    return {std::move(r.params), r.inputs.col(0)};
  }

  friend bool operator==(const DenseNetwork& a, const DenseNetwork& b) {
    if (!a.same_architecture(b)) return false;
    if (a.offset_ != b.offset_ || a.scale_ != b.scale_) return false;
    for (std::size_t k = 0; k < a.weights_.size(); ++k)
      if (a.weights_[k] != b.weights_[k] || a.biases_[k] != b.biases_[k]) return false;
    return true;
  }

 private:
  MatrixT activate(std::size_t k, const MatrixT& z) const {
    if (k + 1 < weights_.size()) return z.array().tanh().matrix();
    if (kind_ == OutputKind::identity) return z;
    return ((z.array().tanh().colwise() * scale_.array()).colwise() + offset_.array()).matrix();
  }

  void check_input(const MatrixT& inputs) const {
    if (sizes_.empty()) throw Error("network has no layers");
    if (inputs.rows() != input_size())
      throw Error("input dimension " + std::to_string(inputs.rows()) + " does not match network input " +
                  std::to_string(input_size()));
  }

  std::vector<int> sizes_;
  OutputKind kind_ = OutputKind::identity;
  VectorT offset_;
  VectorT scale_;
  std::vector<MatrixT> weights_;
  std::vector<VectorT> biases_;
};

/// Weights and biases drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)); bit-identical per seed.
template <typename Scalar = double>
DenseNetwork<Scalar> init_network(const std::vector<int>& layer_sizes, std::uint64_t seed,
                                  OutputKind kind,
                                  typename DenseNetwork<Scalar>::VectorT output_low = {},
                                  typename DenseNetwork<Scalar>::VectorT output_high = {}) {
  DenseNetwork<Scalar> net(layer_sizes, kind, std::move(output_low), std::move(output_high));
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < net.layers(); ++k) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer_sizes[k]));
    auto& w = net.weights(k);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = static_cast<Scalar>(uniform(rng, -bound, bound));
    auto& b = net.biases(k);
    for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = static_cast<Scalar>(uniform(rng, -bound, bound));
  }
  return net;
}

/// Adaptive moment estimation state (bias-corrected first/second moments).
template <typename Scalar>
struct AdamState {
  GradientSet<Scalar> first;
  GradientSet<Scalar> second;
  std::int64_t step = 0;
  Scalar learning_rate = Scalar(1e-3);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar epsilon = Scalar(1e-8);
};

template <typename Scalar>
AdamState<Scalar> make_adam(const DenseNetwork<Scalar>& net, Scalar learning_rate) {
  if (!(learning_rate > 0)) throw Error("learning rate must be positive");
  AdamState<Scalar> s;
  s.first = net.zero_gradients();
  s.second = net.zero_gradients();
  s.learning_rate = learning_rate;
  return s;
}

/// One descent step: parameters move against `grads`, which are gradients of a loss.
template <typename Scalar>
void apply_gradients(DenseNetwork<Scalar>& net, const GradientSet<Scalar>& grads, AdamState<Scalar>& opt) {
  auto shape = net.zero_gradients();
  shape.check_congruent(grads);
  shape.check_congruent(opt.first);
  shape.check_congruent(opt.second);
  for (std::size_t k = 0; k < grads.layers(); ++k) {
    if (!grads.weights[k].allFinite() || !grads.biases[k].allFinite())
      throw Error("non-finite gradient entry in layer " + std::to_string(k));
  }

  ++opt.step;
  const Scalar t = static_cast<Scalar>(opt.step);
  const Scalar c1 = Scalar(1) - std::pow(opt.beta1, t);
  const Scalar c2 = Scalar(1) - std::pow(opt.beta2, t);

  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = opt.beta1 * m + (Scalar(1) - opt.beta1) * g;
    v = opt.beta2 * v + (Scalar(1) - opt.beta2) * g.cwiseProduct(g);
    param.array() -= opt.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + opt.epsilon);
  };
  for (std::size_t k = 0; k < grads.layers(); ++k) {
    update(net.weights(k), grads.weights[k], opt.first.weights[k], opt.second.weights[k]);
    update(net.biases(k), grads.biases[k], opt.first.biases[k], opt.second.biases[k]);
  }
  if (!net.parameters_finite()) throw Error("optimizer step produced non-finite parameters");
}

/// target <- tau * online + (1 - tau) * target, parameter-wise.
template <typename Scalar>
void soft_update(DenseNetwork<Scalar>& target, const DenseNetwork<Scalar>& online, Scalar tau) {
  if (!(tau >= 0 && tau <= 1)) throw Error("soft update rate must lie in [0, 1]");
  if (!target.same_architecture(online)) throw Error("soft update requires identical architectures");
  for (std::size_t k = 0; k < target.layers(); ++k) {
    target.weights(k) = tau * online.weights(k) + (Scalar(1) - tau) * target.weights(k);
    target.biases(k) = tau * online.biases(k) + (Scalar(1) - tau) * target.biases(k);
  }
}

/// All parameters in layer order: W0 (column-major), b0, W1, b1, ...
template <typename Scalar>
typename DenseNetwork<Scalar>::VectorT flatten(const DenseNetwork<Scalar>& net) {
  typename DenseNetwork<Scalar>::VectorT flat(static_cast<Eigen::Index>(net.parameter_count()));
  Eigen::Index pos = 0;
  for (std::size_t k = 0; k < net.layers(); ++k) {
    const auto& w = net.weights(k);
    flat.segment(pos, w.size()) = Eigen::Map<const typename DenseNetwork<Scalar>::VectorT>(w.data(), w.size());
    pos += w.size();
    flat.segment(pos, net.biases(k).size()) = net.biases(k);
    pos += net.biases(k).size();
  }
  return flat;
}

template <typename Scalar>
typename DenseNetwork<Scalar>::VectorT flatten(const GradientSet<Scalar>& g) {
  Eigen::Index n = 0;
  for (std::size_t k = 0; k < g.layers(); ++k) n += g.weights[k].size() + g.biases[k].size();
  typename DenseNetwork<Scalar>::VectorT flat(n);
  Eigen::Index pos = 0;
  for (std::size_t k = 0; k < g.layers(); ++k) {
    flat.segment(pos, g.weights[k].size()) =
        Eigen::Map<const typename DenseNetwork<Scalar>::VectorT>(g.weights[k].data(), g.weights[k].size());
    pos += g.weights[k].size();
    flat.segment(pos, g.biases[k].size()) = g.biases[k];
    pos += g.biases[k].size();
  }
  return flat;
}

template <typename Scalar>
void unflatten(DenseNetwork<Scalar>& net, const typename DenseNetwork<Scalar>::VectorT& flat) {
  if (flat.size() != static_cast<Eigen::Index>(net.parameter_count()))
    throw Error("flat parameter vector has the wrong length");
  Eigen::Index pos = 0;
  for (std::size_t k = 0; k < net.layers(); ++k) {
    auto& w = net.weights(k);
    Eigen::Map<typename DenseNetwork<Scalar>::VectorT>(w.data(), w.size()) = flat.segment(pos, w.size());
    pos += w.size();
    net.biases(k) = flat.segment(pos, net.biases(k).size());
    pos += net.biases(k).size();
  }
}

template <typename Scalar>
Scalar max_abs_difference(const DenseNetwork<Scalar>& a, const DenseNetwork<Scalar>& b) {
  if (!a.same_architecture(b)) throw Error("architecture mismatch");
  return (flatten(a) - flatten(b)).cwiseAbs().maxCoeff();
}

using Network = DenseNetwork<double>;
using Gradients = GradientSet<double>;
using Adam = AdamState<double>;

}  // namespace addpg::nn
