#include "addpg/adviser/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace addpg::adviser {

void MixingConfig::validate() const {
  if (!(lambda > 0)) throw Error("mixing lambda must be positive");
  if (!(temperature > 0)) throw Error("mixing temperature must be positive");
}

double confidence(int episodes, double lambda) {
  if (episodes < 0) throw Error("episode count must be non-negative");
  if (!(lambda > 0)) throw Error("lambda must be positive");
  return -std::expm1(-lambda * static_cast<double>(episodes));
}

double mix_probability(double q_adv, double q_act, double confidence, double temperature, EpsilonForm form) {
  if (!std::isfinite(q_adv) || !std::isfinite(q_act) || !std::isfinite(confidence) || !std::isfinite(temperature))
    throw Error("mix_probability needs finite inputs");
  if (!(temperature > 0)) throw Error("temperature must be positive");
  if (confidence < 0 || confidence > 1) throw Error("confidence must lie in [0, 1]");

  // verbatim: eps = 1 / (1 + exp((q_adv - C q_act) / T))
  double x = (confidence * q_act - q_adv) / temperature;
  if (form == EpsilonForm::flipped) x = -x;
  double eps;
  if (x >= 0) {
    eps = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    eps = e / (1.0 + e);
  }
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
  return std::clamp(eps, lo, hi);
}

ActionChoice choose_action(double epsilon, const Vector& adviser_action, const Vector& actor_action,
                           exploration::Ou& noise, const envs::EnvSpec& spec, std::mt19937_64& rng) {
  if (!(epsilon >= 0 && epsilon <= 1)) throw Error("epsilon must lie in [0, 1]");
  ActionChoice c;
  c.epsilon = epsilon;
  c.from_adviser = uniform01(rng) < epsilon;
  const Vector& picked = c.from_adviser ? adviser_action : actor_action;
  c.action = spec.clamp_action(picked + noise.sample(rng));
  return c;
}

ActionChoice select_action(const Vector& state, const agent::ActorCriticAgent& agent, const Adviser& adviser,
                           const MixingConfig& cfg, const MixerState& ms, exploration::Ou& noise,
                           std::mt19937_64& rng) {
  const Vector a_adv = agent.spec().clamp_action(adviser(state));
  const Vector a_act = agent.act(state);
  const double c = confidence(ms.episodes, cfg.lambda);
  const double eps = mix_probability(agent.q_value(state, a_adv), agent.q_value(state, a_act), c,
                                     cfg.temperature, cfg.form);
  return choose_action(eps, a_adv, a_act, noise, agent.spec(), rng);
}

}  // namespace addpg::adviser
