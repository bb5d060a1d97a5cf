#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "addpg/adviser/mixing.hpp"
#include "addpg/agent/agent.hpp"
#include "addpg/envs/environment.hpp"

namespace addpg::harness {

struct RunConfig {
  std::string env = "pendulum";
  agent::UpdateMode mode = agent::UpdateMode::adapted;
  std::string adviser = "auto";  // "auto" picks the environment's built-in adviser
  std::uint64_t seed = 0;
  int episodes = 200;
  int eval_episodes = 50;

  agent::Hyperparams hyper;
  adviser::MixingConfig mixing;
  double ou_theta = 0.15;
  double ou_sigma = 0.2;
  std::size_t buffer_capacity = 100000;
  int warmup_batches = 5;  // learning starts once the buffer holds warmup_batches * batch_size
  bool record_wall_time = true;

  void validate() const;
  std::string resolved_adviser() const;
};

struct EpisodeRecord {
  int episode = 0;
  double total_score = 0.0;
  int steps = 0;
  double reward_per_step = 0.0;
  std::int64_t wall_ms = 0;
};

struct RunResult {
  std::vector<EpisodeRecord> records;
  agent::ActorCriticAgent agent;
  std::vector<int> mixer_episodes;  // MixerState::episodes observed at each episode start
  std::int64_t train_steps = 0;
  std::int64_t adviser_actions = 0;  // executed actions that came from the adviser
};

struct RunSummary {
  RunConfig config;
  double avg_total_score = 0.0;
  std::vector<EpisodeRecord> curve;
  std::string version;
};

/// Seed of training episode `episode`; evaluation seeds use a disjoint stream.
std::uint64_t training_episode_seed(std::uint64_t run_seed, int episode);
std::uint64_t evaluation_episode_seed(std::uint64_t eval_seed, int episode);

using StepObserver = std::function<void(int episode, const agent::StepMetrics&)>;

/// Seeded end-to-end training loop. `observer`, when set, sees every train_step's metrics.
RunResult train_run(const RunConfig& cfg, const StepObserver& observer = {});

/// Average total episode score of a deterministic state -> action policy.
double evaluate_policy(const std::function<Vector(const Vector&)>& policy, envs::Environment& env, int episodes,
                       std::uint64_t seed, std::vector<double>* totals = nullptr);

/// Noise-free, adviser-free evaluation of the actor. Never mutates the agent.
double evaluate(const agent::ActorCriticAgent& agent, envs::Environment& env, int episodes, std::uint64_t seed,
                std::vector<double>* totals = nullptr);

/// Sliding mean over `window` episodes of reward_per_step; returns the first
/// episode index where it exceeds `threshold`, or nullopt.
std::optional<int> first_episode_above(const std::vector<EpisodeRecord>& records, int window, double threshold);

inline constexpr const char* kCsvHeader = "episode,total_score,steps,reward_per_step,wall_ms";

void write_csv(const std::vector<EpisodeRecord>& records, std::ostream& os);
void write_csv(const std::vector<EpisodeRecord>& records, const std::string& path);
std::vector<EpisodeRecord> read_csv(const std::string& path);
std::vector<EpisodeRecord> read_csv(std::istream& is);

struct AggregateRow {
  int episode = 0;
  double mean_total_score = 0.0;
  double mean_steps = 0.0;
  double mean_reward_per_step = 0.0;
  int runs = 0;
};

inline constexpr const char* kAggregateHeader = "episode,mean_total_score,mean_steps,mean_reward_per_step,runs";

/// Per-episode arithmetic means across runs.
std::vector<AggregateRow> aggregate(const std::vector<std::vector<EpisodeRecord>>& runs);
void write_aggregate_csv(const std::vector<AggregateRow>& rows, const std::string& path);

/// Project version stamp for run summaries.
std::string version_stamp();

/// Entry point of the command-line tool.
int cli_main(int argc, char** argv);

}  // namespace addpg::harness
