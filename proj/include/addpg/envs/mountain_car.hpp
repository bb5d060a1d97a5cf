#pragma once

#include "addpg/envs/environment.hpp"

namespace addpg::envs {

struct MountainCarParams {
  double min_position = -1.2;
  double max_position = 0.6;
  double max_speed = 0.07;
  double goal_position = 0.45;
  double power = 0.0015;
  double gravity = 0.0025;
  double goal_reward = 100.0;
  int max_episode_steps = 999;
};

struct MountainCarState {
  double position = -0.5;
  double velocity = 0.0;
};

Vector mountaincar_observation(const MountainCarState& s);

/// Velocity then position update with clamping; the left wall zeroes negative velocity.
/// done is set once position >= goal_position.
StepResult mountaincar_step(MountainCarState& state, double action, const MountainCarParams& p = {});

class MountainCarEnv final : public Environment {
 public:
  explicit MountainCarEnv(MountainCarParams params = {});

  const EnvSpec& spec() const override { return spec_; }
  std::string name() const override { return "mountaincar"; }
  Vector reset(std::uint64_t seed) override;
  StepResult step(const Vector& action) override;
  Vector observation() const override { return mountaincar_observation(state_); }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<MountainCarEnv>(*this); }

  const MountainCarState& state() const { return state_; }
  void set_state(const MountainCarState& s) { state_ = s; }

 private:
  MountainCarParams params_;
  EnvSpec spec_;
  MountainCarState state_;
  int steps_ = 0;
};

}  // namespace addpg::envs
