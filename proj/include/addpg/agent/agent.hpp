#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "addpg/common.hpp"
#include "addpg/envs/environment.hpp"
#include "addpg/nn/dense_network.hpp"
#include "addpg/replay/replay_buffer.hpp"

namespace addpg::adviser {
class Adviser;
}

namespace addpg::agent {

struct Hyperparams {
  double gamma = 0.99;
  double tau = 0.005;
  double beta = 0.01;  // policy updating rate of the two-fold update
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  int batch_size = 64;
  std::vector<int> hidden = {64, 64};

  void validate() const;
};

enum class UpdateMode { ddpg, adapted, adapted_with_adviser };

std::string to_string(UpdateMode mode);
UpdateMode parse_update_mode(const std::string& name);

struct StepMetrics {
  double critic_loss = 0.0;
  /// L_pi for the two-fold modes; -mean Q(s, pi(s)) for ddpg.
  double actor_loss = 0.0;
  int adviser_replacements = 0;
};

/// Two-fold policy step: actions + beta * grad_A Q, column per sample.
Matrix improved_actions(const Matrix& actions, const Matrix& action_gradients, double beta);

/// Column-major batch view of a list of transitions.
struct BatchMatrices {
  Matrix states;
  Matrix actions;
  Vector rewards;
  Matrix next_states;
  Eigen::Array<bool, Eigen::Dynamic, 1> done;

  static BatchMatrices from(const std::vector<replay::Transition>& batch);
};

/// Online/target actor and critic with their optimizers.
///
/// The actor's bounded output layer maps tanh units onto the action range, so
/// every network output is in environment action units. The critic consumes the
/// stacked (state, action) vector.
class ActorCriticAgent {
 public:
  ActorCriticAgent(const envs::EnvSpec& spec, Hyperparams hp, std::uint64_t seed);

  Vector act(const Vector& state) const;
  Matrix act(const Matrix& states) const;

  /// Online critic scores, one per column.
  Vector q_values(const Matrix& states, const Matrix& actions) const;
  double q_value(const Vector& state, const Vector& action) const;
  /// grad_A Q(s, a; theta): critic input gradient restricted to the action rows.
  Matrix action_gradients(const Matrix& states, const Matrix& actions) const;

  /// r + gamma * Q-(s', pi-(s')), bootstrap dropped where done.
  Vector critic_targets(const BatchMatrices& batch) const;
  /// One optimizer step on the TD mean squared error; returns the pre-step loss.
  double critic_update(const std::vector<replay::Transition>& batch);
  double critic_update(const BatchMatrices& batch);

  /// pi(S) + beta * grad_A Q(S, pi(S)); left unclamped.
  Matrix policy_targets(const Matrix& states) const;
  /// One optimizer step on mean ||targets - pi(S)||^2; returns the pre-step loss.
  double actor_regress(const Matrix& states, const Matrix& targets);
  /// One ascent step on mean Q(s, pi(s)) through the chained gradient; returns -mean Q before the step.
  double ddpg_actor_update(const Matrix& states);

  void update_targets();

  StepMetrics train_step(const replay::ReplayBuffer& buffer, UpdateMode mode, const adviser::Adviser* adviser,
                         std::mt19937_64& rng);

  const envs::EnvSpec& spec() const { return spec_; }
  const Hyperparams& hyperparams() const { return hp_; }
  Hyperparams& hyperparams() { return hp_; }

  nn::Network& actor() { return actor_; }
  const nn::Network& actor() const { return actor_; }
  nn::Network& critic() { return critic_; }
  const nn::Network& critic() const { return critic_; }
  nn::Network& target_actor() { return target_actor_; }
  const nn::Network& target_actor() const { return target_actor_; }
  nn::Network& target_critic() { return target_critic_; }
  const nn::Network& target_critic() const { return target_critic_; }
  const nn::Adam& actor_optimizer() const { return actor_opt_; }
  const nn::Adam& critic_optimizer() const { return critic_opt_; }

  /// Replaces the online networks (and resets targets to copies); used when loading snapshots.
  void load(nn::Network actor, nn::Network critic);

 private:
  Matrix critic_input(const Matrix& states, const Matrix& actions) const;

  envs::EnvSpec spec_;
  Hyperparams hp_;
  nn::Network actor_;
  nn::Network critic_;
  nn::Network target_actor_;
  nn::Network target_critic_;
  nn::Adam actor_opt_;
  nn::Adam critic_opt_;
};

}  // namespace addpg::agent
