#include "addpg/harness/harness.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "addpg/exploration/ou_process.hpp"
#include "addpg/replay/replay_buffer.hpp"

namespace addpg::harness {
namespace {

constexpr std::uint64_t kEpisodeStreamBase = std::uint64_t{1} << 32;

enum Stream : std::uint64_t { kAgentInit = 10, kNoise = 11, kReplay = 12, kMixing = 13 };

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void RunConfig::validate() const {
  envs::make_environment(env);
  if (episodes < 1) throw Error("episodes must be at least 1");
  if (eval_episodes < 0) throw Error("eval_episodes must be non-negative");
  if (buffer_capacity < 1) throw Error("buffer capacity must be positive");
  if (warmup_batches < 1) throw Error("warm-up must cover at least one batch");
  if (!(ou_theta >= 0) || !(ou_sigma >= 0)) throw Error("OU parameters must be non-negative");
  hyper.validate();
  mixing.validate();
  const std::string a = resolved_adviser();
  const auto adv = adviser::make_adviser(a);
  if (mode == agent::UpdateMode::adapted_with_adviser && !adv)
    throw Error("mode adapted_adviser needs an adviser, got 'none'");
}

std::string RunConfig::resolved_adviser() const {
  return adviser == "auto" ? adviser::default_adviser_for(env) : adviser;
}

std::uint64_t training_episode_seed(std::uint64_t run_seed, int episode) {
  return mix_seed(run_seed, kEpisodeStreamBase + 2 * static_cast<std::uint64_t>(episode));
}

std::uint64_t evaluation_episode_seed(std::uint64_t eval_seed, int episode) {
  return mix_seed(eval_seed, kEpisodeStreamBase + 2 * static_cast<std::uint64_t>(episode) + 1);
}

RunResult train_run(const RunConfig& cfg, const StepObserver& observer) {
  cfg.validate();
  auto env = envs::make_environment(cfg.env);
  const envs::EnvSpec spec = env->spec();

  RunResult result{{}, agent::ActorCriticAgent(spec, cfg.hyper, mix_seed(cfg.seed, kAgentInit)), {}, 0, 0};
  auto& ag = result.agent;

  std::optional<adviser::Adviser> adv;
  if (cfg.mode == agent::UpdateMode::adapted_with_adviser) adv = adviser::make_adviser(cfg.resolved_adviser());

  replay::ReplayBuffer buffer(cfg.buffer_capacity, spec.state_dim, spec.action_dim);
  exploration::Ou noise(Vector::Zero(spec.action_dim), cfg.ou_theta, cfg.ou_sigma);
  std::mt19937_64 noise_rng(mix_seed(cfg.seed, kNoise));
  std::mt19937_64 replay_rng(mix_seed(cfg.seed, kReplay));
  std::mt19937_64 mixing_rng(mix_seed(cfg.seed, kMixing));
  adviser::MixerState mixer;
  const std::size_t warmup = static_cast<std::size_t>(cfg.warmup_batches) * cfg.hyper.batch_size;

  result.records.reserve(static_cast<std::size_t>(cfg.episodes));
  for (int e = 0; e < cfg.episodes; ++e) {
    const auto started = std::chrono::steady_clock::now();
    result.mixer_episodes.push_back(mixer.episodes);
    Vector state = env->reset(training_episode_seed(cfg.seed, e));
    noise.reset();

    EpisodeRecord rec;
    rec.episode = e;
    int step = 0;
    try {
      for (;; ++step) {
        Vector action;
        if (adv) {
          const auto choice = adviser::select_action(state, ag, *adv, cfg.mixing, mixer, noise, mixing_rng);
          action = choice.action;
          result.adviser_actions += choice.from_adviser ? 1 : 0;
        } else {
          action = spec.clamp_action(ag.act(state) + noise.sample(noise_rng));
        }
        envs::StepResult sr = env->step(action);
        buffer.push({state, action, sr.reward, sr.next_state, sr.done});
        rec.total_score += sr.reward;
        ++rec.steps;
        if (buffer.size() >= warmup) {
          const auto metrics = ag.train_step(buffer, cfg.mode, adv ? &*adv : nullptr, replay_rng);
          ++result.train_steps;
          if (observer) observer(e, metrics);
        }
        state = std::move(sr.next_state);
        if (sr.done || sr.truncated) break;
      }
    } catch (const Error& err) {
      throw Error("run aborted at episode " + std::to_string(e) + ", step " + std::to_string(step) + ": " +
                  err.what());
    }
    rec.reward_per_step = rec.total_score / rec.steps;
    if (cfg.record_wall_time) {
      rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started)
                        .count();
    }
    result.records.push_back(rec);
    mixer.finish_episode();
  }
  return result;
}

double evaluate_policy(const std::function<Vector(const Vector&)>& policy, envs::Environment& env, int episodes,
                       std::uint64_t seed, std::vector<double>* totals) {
  if (episodes < 1) throw Error("evaluation needs at least one episode");
  double sum = 0.0;
  if (totals) totals->clear();
  for (int e = 0; e < episodes; ++e) {
    Vector state = env.reset(evaluation_episode_seed(seed, e));
    double total = 0.0;
    for (;;) {
      envs::StepResult sr = env.step(env.spec().clamp_action(policy(state)));
      total += sr.reward;
      state = std::move(sr.next_state);
      if (sr.done || sr.truncated) break;
    }
    if (totals) totals->push_back(total);
    sum += total;
  }
  return sum / episodes;
}

double evaluate(const agent::ActorCriticAgent& agent, envs::Environment& env, int episodes, std::uint64_t seed,
                std::vector<double>* totals) {
  return evaluate_policy([&agent](const Vector& s) { return agent.act(s); }, env, episodes, seed, totals);
}

std::optional<int> first_episode_above(const std::vector<EpisodeRecord>& records, int window, double threshold) {
  if (window < 1) throw Error("window must be at least 1");
  double sum = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    sum += records[i].reward_per_step;
    if (i >= static_cast<std::size_t>(window)) sum -= records[i - window].reward_per_step;
    if (i + 1 >= static_cast<std::size_t>(window) && sum / window > threshold) return records[i].episode;
  }
  return std::nullopt;
}

void write_csv(const std::vector<EpisodeRecord>& records, std::ostream& os) {
  os << kCsvHeader << '\n';
  for (const auto& r : records) {
    os << r.episode << ',' << format_real(r.total_score) << ',' << r.steps << ',' << format_real(r.reward_per_step)
       << ',' << r.wall_ms << '\n';
  }
}

void write_csv(const std::vector<EpisodeRecord>& records, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_csv(records, os);
  os.flush();
  if (!os) throw Error("write failed for '" + path + "'");
}

std::vector<EpisodeRecord> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw Error("CSV header mismatch");
  std::vector<EpisodeRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string f[5];
    for (auto& field : f)
      if (!std::getline(ls, field, ',')) throw Error("CSV row has too few fields: " + line);
    EpisodeRecord r;
    r.episode = std::stoi(f[0]);
    r.total_score = std::strtod(f[1].c_str(), nullptr);
    r.steps = std::stoi(f[2]);
    r.reward_per_step = std::strtod(f[3].c_str(), nullptr);
    r.wall_ms = std::stoll(f[4]);
    out.push_back(r);
  }
  return out;
}

std::vector<EpisodeRecord> read_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "' for reading");
  return read_csv(is);
}

std::vector<AggregateRow> aggregate(const std::vector<std::vector<EpisodeRecord>>& runs) {
  if (runs.empty()) return {};
  const std::size_t n = runs.front().size();
  for (const auto& r : runs)
    if (r.size() != n) throw Error("runs differ in episode count");
  std::vector<AggregateRow> rows(n);
  const double k = static_cast<double>(runs.size());
  for (std::size_t i = 0; i < n; ++i) {
    AggregateRow& row = rows[i];
    row.episode = runs.front()[i].episode;
    row.runs = static_cast<int>(runs.size());
    for (const auto& r : runs) {
      row.mean_total_score += r[i].total_score;
      row.mean_steps += r[i].steps;
      row.mean_reward_per_step += r[i].reward_per_step;
    }
    row.mean_total_score /= k;
    row.mean_steps /= k;
    row.mean_reward_per_step /= k;
  }
  return rows;
}

void write_aggregate_csv(const std::vector<AggregateRow>& rows, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << kAggregateHeader << '\n';
  for (const auto& r : rows) {
    os << r.episode << ',' << format_real(r.mean_total_score) << ',' << format_real(r.mean_steps) << ','
       << format_real(r.mean_reward_per_step) << ',' << r.runs << '\n';
  }
  if (!os) throw Error("write failed for '" + path + "'");
}

std::string version_stamp() {
#ifdef ADDPG_VERSION
  return ADDPG_VERSION;
#else
  return "unknown";
#endif
}

}  // namespace addpg::harness
