#include "addpg/agent/agent.hpp"

#include <utility>

#include "addpg/adviser/adviser.hpp"

namespace addpg::agent {

void Hyperparams::validate() const {
  if (!(gamma >= 0 && gamma < 1)) throw Error("gamma must lie in [0, 1)");
  if (!(tau > 0 && tau < 1)) throw Error("tau must lie in (0, 1)");
  if (!(beta > 0)) throw Error("beta must be positive");
  if (!(actor_lr > 0) || !(critic_lr > 0)) throw Error("learning rates must be positive");
  if (batch_size < 1) throw Error("batch size must be at least 1");
  for (int h : hidden)
    if (h < 1) throw Error("hidden layer sizes must be positive");
}

std::string to_string(UpdateMode mode) {
  switch (mode) {
    case UpdateMode::ddpg: return "ddpg";
    case UpdateMode::adapted: return "adapted";
    case UpdateMode::adapted_with_adviser: return "adapted_adviser";
  }
  return "?";
}

UpdateMode parse_update_mode(const std::string& name) {
  if (name == "ddpg") return UpdateMode::ddpg;
  if (name == "adapted") return UpdateMode::adapted;
  if (name == "adapted_adviser" || name == "adapted_with_adviser") return UpdateMode::adapted_with_adviser;
  throw Error("unknown mode '" + name + "' (expected ddpg, adapted or adapted_adviser)");
}

Matrix improved_actions(const Matrix& actions, const Matrix& action_gradients, double beta) {
  if (actions.rows() != action_gradients.rows() || actions.cols() != action_gradients.cols())
    throw Error("action and gradient shapes differ");
  if (!action_gradients.allFinite()) throw Error("non-finite critic action gradient");
  return actions + beta * action_gradients;
}

BatchMatrices BatchMatrices::from(const std::vector<replay::Transition>& batch) {
  if (batch.empty()) throw Error("empty batch");
  const auto n = static_cast<Eigen::Index>(batch.size());
  const auto sd = batch.front().state.size();
  const auto ad = batch.front().action.size();
  BatchMatrices m;
  m.states.resize(sd, n);
  m.actions.resize(ad, n);
  m.rewards.resize(n);
  m.next_states.resize(sd, n);
  m.done.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& t = batch[static_cast<std::size_t>(j)];
    if (t.state.size() != sd || t.next_state.size() != sd || t.action.size() != ad)
      throw Error("inconsistent transition shapes in batch");
    m.states.col(j) = t.state;
    m.actions.col(j) = t.action;
    m.rewards(j) = t.reward;
    m.next_states.col(j) = t.next_state;
    m.done(j) = t.done;
  }
  return m;
}

ActorCriticAgent::ActorCriticAgent(const envs::EnvSpec& spec, Hyperparams hp, std::uint64_t seed)
    : spec_(spec), hp_(std::move(hp)) {
  hp_.validate();
  std::vector<int> actor_sizes{spec_.state_dim};
  actor_sizes.insert(actor_sizes.end(), hp_.hidden.begin(), hp_.hidden.end());
  actor_sizes.push_back(spec_.action_dim);
  std::vector<int> critic_sizes{spec_.state_dim + spec_.action_dim};
  critic_sizes.insert(critic_sizes.end(), hp_.hidden.begin(), hp_.hidden.end());
  critic_sizes.push_back(1);

  actor_ = nn::init_network(actor_sizes, mix_seed(seed, 1), nn::OutputKind::bounded, spec_.action_low,
                            spec_.action_high);
  critic_ = nn::init_network(critic_sizes, mix_seed(seed, 2), nn::OutputKind::identity);
  target_actor_ = actor_;
  target_critic_ = critic_;
  actor_opt_ = nn::make_adam(actor_, hp_.actor_lr);
  critic_opt_ = nn::make_adam(critic_, hp_.critic_lr);
}

void ActorCriticAgent::load(nn::Network actor, nn::Network critic) {
  if (actor.input_size() != spec_.state_dim || actor.output_size() != spec_.action_dim)
    throw Error("actor snapshot does not fit the environment");
  if (critic.input_size() != spec_.state_dim + spec_.action_dim || critic.output_size() != 1)
    throw Error("critic snapshot does not fit the environment");
  actor_ = std::move(actor);
  critic_ = std::move(critic);
  target_actor_ = actor_;
  target_critic_ = critic_;
  actor_opt_ = nn::make_adam(actor_, hp_.actor_lr);
  critic_opt_ = nn::make_adam(critic_, hp_.critic_lr);
}

Vector ActorCriticAgent::act(const Vector& state) const {
  if (state.size() != spec_.state_dim) throw Error("state dimension mismatch in act");
  return actor_.forward(state);
}

Matrix ActorCriticAgent::act(const Matrix& states) const { return actor_.forward(states); }

Matrix ActorCriticAgent::critic_input(const Matrix& states, const Matrix& actions) const {
  if (states.rows() != spec_.state_dim || actions.rows() != spec_.action_dim || states.cols() != actions.cols())
    throw Error("critic input shape mismatch");
  Matrix in(spec_.state_dim + spec_.action_dim, states.cols());
  in.topRows(spec_.state_dim) = states;
  in.bottomRows(spec_.action_dim) = actions;
  return in;
}

Vector ActorCriticAgent::q_values(const Matrix& states, const Matrix& actions) const {
  return critic_.forward(critic_input(states, actions)).row(0).transpose();
}

double ActorCriticAgent::q_value(const Vector& state, const Vector& action) const {
  return q_values(Matrix(state), Matrix(action))(0);
}

Matrix ActorCriticAgent::action_gradients(const Matrix& states, const Matrix& actions) const {
  const auto r = critic_.backward(critic_input(states, actions), Matrix::Ones(1, states.cols()));
  return r.inputs.bottomRows(spec_.action_dim);
}

Vector ActorCriticAgent::critic_targets(const BatchMatrices& b) const {
  const Matrix next_actions = target_actor_.forward(b.next_states);
  const Vector next_q = target_critic_.forward(critic_input(b.next_states, next_actions)).row(0).transpose();
  Vector y(b.rewards.size());
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    y(j) = b.done(j) ? b.rewards(j) : b.rewards(j) + hp_.gamma * next_q(j);
  }
  if (!y.allFinite()) throw Error("non-finite critic target");
  return y;
}

double ActorCriticAgent::critic_update(const std::vector<replay::Transition>& batch) {
  return critic_update(BatchMatrices::from(batch));
}

double ActorCriticAgent::critic_update(const BatchMatrices& b) {
  const Vector y = critic_targets(b);
  const Matrix in = critic_input(b.states, b.actions);
  const Vector q = critic_.forward(in).row(0).transpose();
  const double n = static_cast<double>(y.size());
  const Vector residual = y - q;
  const double loss = residual.squaredNorm() / n;
  // d/dQ of mean (y - Q)^2
  const Matrix out_grad = (-2.0 / n) * residual.transpose();
  auto grads = critic_.backward(in, out_grad);
  nn::apply_gradients(critic_, grads.params, critic_opt_);
  return loss;
}

Matrix ActorCriticAgent::policy_targets(const Matrix& states) const {
  const Matrix a = actor_.forward(states);
  return improved_actions(a, action_gradients(states, a), hp_.beta);
}

double ActorCriticAgent::actor_regress(const Matrix& states, const Matrix& targets) {
  if (states.cols() != targets.cols() || targets.rows() != spec_.action_dim)
    throw Error("actor regression shape mismatch");
  if (states.cols() == 0) throw Error("empty regression batch");
  const Matrix a = actor_.forward(states);
  const double n = static_cast<double>(states.cols());
  const Matrix diff = targets - a;
  const double loss = diff.squaredNorm() / n;
  auto grads = actor_.backward(states, (-2.0 / n) * diff);
  nn::apply_gradients(actor_, grads.params, actor_opt_);
  return loss;
}

double ActorCriticAgent::ddpg_actor_update(const Matrix& states) {
  if (states.cols() == 0) throw Error("empty actor batch");
  const Matrix a = actor_.forward(states);
  const Matrix in = critic_input(states, a);
  const double n = static_cast<double>(states.cols());
  const double objective = critic_.forward(in).sum() / n;
  const Matrix g = critic_.backward(in, Matrix::Ones(1, states.cols())).inputs.bottomRows(spec_.action_dim);
  if (!g.allFinite()) throw Error("non-finite critic action gradient");
  // Loss is -mean Q, so its gradient with respect to the actor output is -g / n.
  auto grads = actor_.backward(states, (-1.0 / n) * g);
  nn::apply_gradients(actor_, grads.params, actor_opt_);
  return -objective;
}

void ActorCriticAgent::update_targets() {
  nn::soft_update(target_critic_, critic_, hp_.tau);
  nn::soft_update(target_actor_, actor_, hp_.tau);
}

StepMetrics ActorCriticAgent::train_step(const replay::ReplayBuffer& buffer, UpdateMode mode,
                                         const adviser::Adviser* adviser, std::mt19937_64& rng) {
  if (mode == UpdateMode::adapted_with_adviser && adviser == nullptr)
    throw Error("adapted_adviser mode requires an adviser");

  const BatchMatrices b = BatchMatrices::from(buffer.sample_batch(static_cast<std::size_t>(hp_.batch_size), rng));
  StepMetrics m;
  m.critic_loss = critic_update(b);
  switch (mode) {
    case UpdateMode::ddpg:
      m.actor_loss = ddpg_actor_update(b.states);
      break;
    case UpdateMode::adapted:
      m.actor_loss = actor_regress(b.states, policy_targets(b.states));
      break;
    case UpdateMode::adapted_with_adviser: {
      const Matrix targets =
          adviser::advise_policy_targets(b.states, policy_targets(b.states), *adviser, critic_,
                                         &m.adviser_replacements);
      m.actor_loss = actor_regress(b.states, targets);
      break;
    }
  }
  update_targets();
  return m;
}

}  // namespace addpg::agent
