#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "addpg/common.hpp"

namespace addpg::envs {

struct EnvSpec {
  int state_dim = 1;
  int action_dim = 1;
  Vector action_low;
  Vector action_high;
  int max_episode_steps = 1;

  Vector clamp_action(const Vector& a) const { return a.cwiseMax(action_low).cwiseMin(action_high); }
};

struct StepResult {
  Vector next_state;
  double reward = 0.0;
  bool done = false;       // terminal state reached
  bool truncated = false;  // time limit hit
};

/// Episodic environment contract. Instances are single-owner state machines.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual std::string name() const = 0;
  virtual Vector reset(std::uint64_t seed) = 0;
  virtual StepResult step(const Vector& action) = 0;
  virtual Vector observation() const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;
};

/// "pendulum" or "mountaincar"; throws on unknown names.
std::unique_ptr<Environment> make_environment(const std::string& name);

}  // namespace addpg::envs
