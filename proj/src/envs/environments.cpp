#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "addpg/envs/mountain_car.hpp"
#include "addpg/envs/pendulum.hpp"

namespace addpg::envs {
namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw Error(std::string("non-finite ") + what);
}

double scalar_action(const Vector& a) {
  if (a.size() != 1) throw Error("expected a one-dimensional action");
  return a(0);
}

}  // namespace

double wrap_angle(double theta) {
  constexpr double pi = std::numbers::pi;
  double w = std::fmod(theta + pi, 2.0 * pi);
  if (w < 0) w += 2.0 * pi;
  w -= pi;
  // fmod places the branch cut at -pi; the state convention is (-pi, pi].
  return w <= -pi ? pi : w;
}

Vector pendulum_observation(const PendulumState& s) {
  Vector o(3);
  o << std::cos(s.theta), std::sin(s.theta), s.theta_dot;
  return o;
}

double pendulum_energy(const PendulumState& s, const PendulumParams& p) {
  return p.mass * p.length * p.length / 6.0 * s.theta_dot * s.theta_dot +
         p.mass * p.gravity * p.length / 2.0 * std::cos(s.theta);
}

StepResult pendulum_step(PendulumState& state, double action, const PendulumParams& p) {
  require_finite(state.theta, "pendulum angle");
  require_finite(state.theta_dot, "pendulum angular velocity");
  require_finite(action, "pendulum action");

  const double u = std::clamp(action, -p.max_torque, p.max_torque);
  const double th = wrap_angle(state.theta);
  const double cost = th * th + 0.1 * state.theta_dot * state.theta_dot + 0.001 * u * u;

  const double accel = 3.0 * p.gravity / (2.0 * p.length) * std::sin(state.theta) +
                       3.0 / (p.mass * p.length * p.length) * u;
  const double new_dot = std::clamp(state.theta_dot + accel * p.dt, -p.max_speed, p.max_speed);
  state.theta = wrap_angle(state.theta + new_dot * p.dt);
  state.theta_dot = new_dot;

  StepResult r;
  r.next_state = pendulum_observation(state);
  r.reward = -cost;
  return r;
}

PendulumEnv::PendulumEnv(PendulumParams params) : params_(params) {
  spec_.state_dim = 3;
  spec_.action_dim = 1;
  spec_.action_low = Vector::Constant(1, -params_.max_torque);
  spec_.action_high = Vector::Constant(1, params_.max_torque);
  spec_.max_episode_steps = params_.max_episode_steps;
}

Vector PendulumEnv::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  state_.theta = uniform(rng, -std::numbers::pi, std::numbers::pi);
  state_.theta_dot = uniform(rng, -1.0, 1.0);
  steps_ = 0;
  return observation();
}

StepResult PendulumEnv::step(const Vector& action) {
  StepResult r = pendulum_step(state_, scalar_action(action), params_);
  ++steps_;
  r.truncated = steps_ >= params_.max_episode_steps;
  return r;
}

Vector mountaincar_observation(const MountainCarState& s) {
  Vector o(2);
  o << s.position, s.velocity;
  return o;
}

StepResult mountaincar_step(MountainCarState& state, double action, const MountainCarParams& p) {
  require_finite(state.position, "mountain car position");
  require_finite(state.velocity, "mountain car velocity");
  require_finite(action, "mountain car action");

  const double force = std::clamp(action, -1.0, 1.0);
  double v = state.velocity + force * p.power - p.gravity * std::cos(3.0 * state.position);
  v = std::clamp(v, -p.max_speed, p.max_speed);
  double x = std::clamp(state.position + v, p.min_position, p.max_position);
  if (x == p.min_position && v < 0) v = 0.0;
  state.position = x;
  state.velocity = v;

  StepResult r;
  r.done = x >= p.goal_position;
  r.reward = -0.1 * force * force + (r.done ? p.goal_reward : 0.0);
  r.next_state = mountaincar_observation(state);
  return r;
}

MountainCarEnv::MountainCarEnv(MountainCarParams params) : params_(params) {
  spec_.state_dim = 2;
  spec_.action_dim = 1;
  spec_.action_low = Vector::Constant(1, -1.0);
  spec_.action_high = Vector::Constant(1, 1.0);
  spec_.max_episode_steps = params_.max_episode_steps;
}

Vector MountainCarEnv::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  state_.position = uniform(rng, -0.6, -0.4);
  state_.velocity = 0.0;
  steps_ = 0;
  return observation();
}

StepResult MountainCarEnv::step(const Vector& action) {
  StepResult r = mountaincar_step(state_, scalar_action(action), params_);
  ++steps_;
  r.truncated = !r.done && steps_ >= params_.max_episode_steps;
  return r;
}

std::unique_ptr<Environment> make_environment(const std::string& name) {
  if (name == "pendulum") return std::make_unique<PendulumEnv>();
  if (name == "mountaincar") return std::make_unique<MountainCarEnv>();
  throw Error("unknown environment '" + name + "' (expected pendulum or mountaincar)");
}

}  // namespace addpg::envs
