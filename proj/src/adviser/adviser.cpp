#include "addpg/adviser/adviser.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "addpg/envs/pendulum.hpp"

namespace addpg::adviser {
namespace {

double sign_or_positive(double x) { return x < 0 ? -1.0 : 1.0; }

Vector scalar(double x) { return Vector::Constant(1, x); }

}  // namespace

Adviser::Adviser(std::string name, Mapping f, Vector action_low, Vector action_high)
    : name_(std::move(name)), f_(std::move(f)), low_(std::move(action_low)), high_(std::move(action_high)) {
  if (!f_) throw Error("adviser mapping is empty");
  if (low_.size() != high_.size() || low_.size() == 0) throw Error("adviser bounds malformed");
}

Vector Adviser::operator()(const Vector& state) const {
  Vector a = f_(state);
  if (a.size() != low_.size()) throw Error("adviser '" + name_ + "' returned the wrong action dimension");
  return a.cwiseMax(low_).cwiseMin(high_);
}

Matrix Adviser::advise(const Matrix& states) const {
  Matrix out(low_.size(), states.cols());
  for (Eigen::Index j = 0; j < states.cols(); ++j) out.col(j) = (*this)(Vector(states.col(j)));
  return out;
}

double pendulum_energy_action(const Vector& observation) {
  if (observation.size() != 3) throw Error("pendulum adviser expects (cos, sin, theta_dot)");
  const envs::PendulumParams p;
  const double theta = std::atan2(observation(1), observation(0));
  const double theta_dot = observation(2);
  if (std::abs(theta) < 0.3) {
    return std::clamp(-16.0 * theta - 2.0 * theta_dot, -p.max_torque, p.max_torque);
  }
  const double upright = p.mass * p.gravity * p.length / 2.0;
  const double energy = envs::pendulum_energy({theta, theta_dot}, p);
  if (energy < upright) {
    // dE/dt = theta_dot * u for this rod, so torque along the velocity adds energy.
    return p.max_torque * sign_or_positive(theta_dot);
  }
  return 0.0;
}

double mountaincar_bangbang_action(const Vector& observation) {
  if (observation.size() != 2) throw Error("mountain car adviser expects (position, velocity)");
  return sign_or_positive(observation(1));
}

Adviser pendulum_adviser() {
  return Adviser("pendulum_energy", [](const Vector& s) { return scalar(pendulum_energy_action(s)); },
                 scalar(-2.0), scalar(2.0));
}

Adviser mountaincar_adviser() {
  return Adviser("mountaincar_bangbang", [](const Vector& s) { return scalar(mountaincar_bangbang_action(s)); },
                 scalar(-1.0), scalar(1.0));
}

std::optional<Adviser> make_adviser(const std::string& name) {
  if (name == "none") return std::nullopt;
  if (name == "pendulum_energy") return pendulum_adviser();
  if (name == "mountaincar_bangbang") return mountaincar_adviser();
  throw Error("unknown adviser '" + name + "' (expected pendulum_energy, mountaincar_bangbang or none)");
}

std::string default_adviser_for(const std::string& env_name) {
  if (env_name == "pendulum") return "pendulum_energy";
  if (env_name == "mountaincar") return "mountaincar_bangbang";
  throw Error("no built-in adviser for environment '" + env_name + "'");
}

Matrix advise_policy_targets(const Matrix& states, const Matrix& targets, const Adviser& adviser,
                             const nn::Network& critic, int* replaced) {
  if (states.cols() != targets.cols()) throw Error("states and targets differ in batch size");
  if (targets.rows() != adviser.action_low().size()) throw Error("target dimension does not match the adviser");
  if (critic.input_size() != states.rows() + targets.rows() || critic.output_size() != 1)
    throw Error("critic does not accept (state, action) pairs of this shape");

  const Matrix advised = adviser.advise(states);
  Matrix in(critic.input_size(), states.cols());
  in.topRows(states.rows()) = states;
  in.bottomRows(targets.rows()) = advised;
  const Eigen::RowVectorXd q_adv = critic.forward(in);
  in.bottomRows(targets.rows()) = targets;
  const Eigen::RowVectorXd q_hat = critic.forward(in);

  Matrix out = targets;
  int count = 0;
  for (Eigen::Index i = 0; i < out.cols(); ++i) {
    if (q_adv(i) > q_hat(i)) {
      out.col(i) = advised.col(i);
      ++count;
    }
  }
  if (replaced) *replaced = count;
  return out;
}

}  // namespace addpg::adviser
