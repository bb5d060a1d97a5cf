#pragma once

#include <random>

#include "addpg/adviser/adviser.hpp"
#include "addpg/agent/agent.hpp"
#include "addpg/exploration/ou_process.hpp"

namespace addpg::adviser {

/// `verbatim`: eps = e^{-q_adv/T} / (e^{-q_adv/T} + e^{-C q_act/T}).
/// `flipped`:  both exponent signs inverted, so a higher adviser score raises eps.
enum class EpsilonForm { verbatim, flipped };

struct MixingConfig {
  double lambda = 0.005;
  double temperature = 1.0;
  EpsilonForm form = EpsilonForm::verbatim;

  void validate() const;
};

/// Episodes elapsed. During episode e (zero-based) episodes == e.
struct MixerState {
  int episodes = 0;
  void finish_episode() { ++episodes; }
};

/// 1 - exp(-lambda N).
double confidence(int episodes, double lambda);

/// Probability of executing the adviser action; evaluated as a logistic of the
/// exponent difference so large |Q| cannot overflow.
double mix_probability(double q_adv, double q_act, double confidence, double temperature,
                       EpsilonForm form = EpsilonForm::verbatim);

struct ActionChoice {
  Vector action;  // noisy, clamped, ready to execute
  double epsilon = 0.0;
  bool from_adviser = false;
};

/// Bernoulli(epsilon) pick between the two suggestions, then OU noise and clamping.
ActionChoice choose_action(double epsilon, const Vector& adviser_action, const Vector& actor_action,
                           exploration::Ou& noise, const envs::EnvSpec& spec, std::mt19937_64& rng);

/// Data collection with an adviser: compares both suggestions under the online critic.
ActionChoice select_action(const Vector& state, const agent::ActorCriticAgent& agent, const Adviser& adviser,
                           const MixingConfig& cfg, const MixerState& ms, exploration::Ou& noise,
                           std::mt19937_64& rng);

}  // namespace addpg::adviser
