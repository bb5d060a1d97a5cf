#pragma once

#include <functional>
#include <optional>
#include <string>

#include "addpg/common.hpp"
#include "addpg/envs/environment.hpp"
#include "addpg/nn/dense_network.hpp"

namespace addpg::adviser {

/// A pure state -> action mapping encoding domain knowledge. Outputs are clamped
/// to the action bounds it was built with.
class Adviser {
 public:
  using Mapping = std::function<Vector(const Vector&)>;

  Adviser(std::string name, Mapping f, Vector action_low, Vector action_high);

  Vector operator()(const Vector& state) const;
  Matrix advise(const Matrix& states) const;

  const std::string& name() const { return name_; }
  const Vector& action_low() const { return low_; }
  const Vector& action_high() const { return high_; }

 private:
  std::string name_;
  Mapping f_;
  Vector low_;
  Vector high_;
};

/// Energy pumping toward the upright energy level, PD stabilization for |theta| < 0.3.
/// Input is the observation (cos theta, sin theta, theta_dot).
double pendulum_energy_action(const Vector& observation);

/// sign(velocity), with +1 at zero velocity.
double mountaincar_bangbang_action(const Vector& observation);

Adviser pendulum_adviser();
Adviser mountaincar_adviser();

/// "pendulum_energy", "mountaincar_bangbang", or "none" (returns nullopt).
std::optional<Adviser> make_adviser(const std::string& name);

/// Name of the built-in adviser for an environment.
std::string default_adviser_for(const std::string& env_name);

/// Replaces column i of `targets` by the adviser action for states.col(i) exactly
/// when the critic scores the adviser action strictly higher.
Matrix advise_policy_targets(const Matrix& states, const Matrix& targets, const Adviser& adviser,
                             const nn::Network& critic, int* replaced = nullptr);

}  // namespace addpg::adviser
