#pragma once

#include "addpg/envs/environment.hpp"

namespace addpg::envs {

struct PendulumParams {
  double gravity = 10.0;
  double mass = 1.0;
  double length = 1.0;
  double dt = 0.05;
  double max_speed = 8.0;
  double max_torque = 2.0;
  int max_episode_steps = 200;
};

/// theta = 0 is upright.
struct PendulumState {
  double theta = 0.0;
  double theta_dot = 0.0;
};

/// Maps an angle to (-pi, pi].
double wrap_angle(double theta);

Vector pendulum_observation(const PendulumState& s);

/// Rod energy with theta = 0 upright: (m l^2 / 6) theta_dot^2 + (m g l / 2) cos(theta).
double pendulum_energy(const PendulumState& s, const PendulumParams& p = {});

/// One semi-implicit Euler step. Reward is charged on the pre-step state and the
/// clamped torque. Never sets done or truncated.
StepResult pendulum_step(PendulumState& state, double action, const PendulumParams& p = {});

class PendulumEnv final : public Environment {
 public:
  explicit PendulumEnv(PendulumParams params = {});

  const EnvSpec& spec() const override { return spec_; }
  std::string name() const override { return "pendulum"; }
  Vector reset(std::uint64_t seed) override;
  StepResult step(const Vector& action) override;
  Vector observation() const override { return pendulum_observation(state_); }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<PendulumEnv>(*this); }

  const PendulumState& state() const { return state_; }
  void set_state(const PendulumState& s) { state_ = s; }

 private:
  PendulumParams params_;
  EnvSpec spec_;
  PendulumState state_;
  int steps_ = 0;
};

}  // namespace addpg::envs
