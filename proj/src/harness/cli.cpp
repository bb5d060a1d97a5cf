#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "addpg/convergence/convergence_lab.hpp"
#include "addpg/harness/harness.hpp"
#include "addpg/nn/snapshot.hpp"

namespace addpg::harness {
namespace {

namespace fs = std::filesystem;

/// Relative output paths land under $ADDPG_OUTPUT_DIR when it is set.
std::string output_path(const std::string& path) {
  if (path.empty()) return path;
  const char* dir = std::getenv("ADDPG_OUTPUT_DIR");
  fs::path p(path);
  if (dir && *dir && p.is_relative()) {
    fs::create_directories(dir);
    return (fs::path(dir) / p).string();
  }
  return path;
}

struct RunOptions {
  RunConfig cfg;
  std::string mode = "adapted";
  std::string epsilon_form = "verbatim";
  bool no_wall_time = false;

  RunConfig finish() const {
    RunConfig c = cfg;
    c.mode = agent::parse_update_mode(mode);
    if (epsilon_form == "verbatim")
      c.mixing.form = adviser::EpsilonForm::verbatim;
    else if (epsilon_form == "flipped")
      c.mixing.form = adviser::EpsilonForm::flipped;
    else
      throw Error("unknown epsilon form '" + epsilon_form + "' (expected verbatim or flipped)");
    c.record_wall_time = !no_wall_time;
    c.validate();
    return c;
  }
};

void add_run_options(CLI::App* app, RunOptions& o) {
  auto& c = o.cfg;
  app->add_option("--env", c.env, "pendulum | mountaincar")->capture_default_str();
  app->add_option("--mode", o.mode, "ddpg | adapted | adapted_adviser")->capture_default_str();
  app->add_option("--adviser", c.adviser, "auto | pendulum_energy | mountaincar_bangbang | none")
      ->capture_default_str();
  app->add_option("--episodes", c.episodes, "training episodes")->capture_default_str();
  app->add_option("--eval-episodes", c.eval_episodes, "evaluation episodes after training (0 skips)")
      ->capture_default_str();
  app->add_option("--gamma", c.hyper.gamma)->capture_default_str();
  app->add_option("--tau", c.hyper.tau)->capture_default_str();
  app->add_option("--beta", c.hyper.beta, "policy updating rate")->capture_default_str();
  app->add_option("--actor-lr", c.hyper.actor_lr)->capture_default_str();
  app->add_option("--critic-lr", c.hyper.critic_lr)->capture_default_str();
  app->add_option("--batch-size", c.hyper.batch_size)->capture_default_str();
  app->add_option("--hidden", c.hyper.hidden, "hidden layer sizes")->delimiter(',')->capture_default_str();
  app->add_option("--lambda", c.mixing.lambda, "confidence decay per episode")->capture_default_str();
  app->add_option("--temperature", c.mixing.temperature)->capture_default_str();
  app->add_option("--epsilon-form", o.epsilon_form, "verbatim | flipped")->capture_default_str();
  app->add_option("--ou-theta", c.ou_theta)->capture_default_str();
  app->add_option("--ou-sigma", c.ou_sigma)->capture_default_str();
  app->add_option("--buffer-capacity", c.buffer_capacity)->capture_default_str();
  app->add_option("--warmup-batches", c.warmup_batches)->capture_default_str();
  app->add_flag("--no-wall-time", o.no_wall_time, "write wall_ms as 0 so output is byte-reproducible");
}

nlohmann::json config_json(const RunConfig& c) {
  return {{"env", c.env},
          {"mode", agent::to_string(c.mode)},
          {"adviser", c.mode == agent::UpdateMode::adapted_with_adviser ? c.resolved_adviser() : "none"},
          {"seed", c.seed},
          {"episodes", c.episodes},
          {"eval_episodes", c.eval_episodes},
          {"gamma", c.hyper.gamma},
          {"tau", c.hyper.tau},
          {"beta", c.hyper.beta},
          {"actor_lr", c.hyper.actor_lr},
          {"critic_lr", c.hyper.critic_lr},
          {"batch_size", c.hyper.batch_size},
          {"hidden", c.hyper.hidden},
          {"lambda", c.mixing.lambda},
          {"temperature", c.mixing.temperature},
          {"epsilon_form", c.mixing.form == adviser::EpsilonForm::verbatim ? "verbatim" : "flipped"},
          {"ou_theta", c.ou_theta},
          {"ou_sigma", c.ou_sigma},
          {"buffer_capacity", c.buffer_capacity},
          {"warmup_batches", c.warmup_batches}};
}

struct TrainOutcome {
  RunSummary summary;
  std::vector<EpisodeRecord> records;
};

TrainOutcome run_and_evaluate(const RunConfig& cfg, const std::string& snapshot_out) {
  RunResult r = train_run(cfg);
  TrainOutcome out;
  out.summary.config = cfg;
  out.summary.curve = r.records;
  out.summary.version = version_stamp();
  if (cfg.eval_episodes > 0) {
    auto env = envs::make_environment(cfg.env);
    out.summary.avg_total_score = evaluate(r.agent, *env, cfg.eval_episodes, cfg.seed);
  }
  if (!snapshot_out.empty()) nn::save_networks(output_path(snapshot_out), {&r.agent.actor(), &r.agent.critic()});
  out.records = std::move(r.records);
  return out;
}

void write_summary(const std::string& path, const RunSummary& s) {
  nlohmann::json j{{"config", config_json(s.config)},
                   {"avg_total_score", s.config.eval_episodes > 0 ? nlohmann::json(s.avg_total_score) : nullptr},
                   {"episodes_recorded", s.curve.size()},
                   {"version", s.version}};
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << j.dump(2) << '\n';
}

int cmd_train(const RunOptions& opts, std::uint64_t seed, const std::string& out, const std::string& snapshot_out) {
  RunConfig cfg = opts.finish();
  cfg.seed = seed;
  const TrainOutcome o = run_and_evaluate(cfg, snapshot_out);
  if (!out.empty()) {
    const std::string path = output_path(out);
    write_csv(o.records, path);
    write_summary(path + ".summary.json", o.summary);
  } else {
    write_csv(o.records, std::cout);
  }
  if (cfg.eval_episodes > 0)
    std::cerr << "avg_total_score " << std::setprecision(10) << o.summary.avg_total_score << " over "
              << cfg.eval_episodes << " evaluation episodes\n";
  return 0;
}

int cmd_sweep(const RunOptions& opts, const std::vector<std::uint64_t>& seeds, const std::string& prefix, int jobs) {
  if (seeds.empty()) throw Error("sweep needs at least one seed");
  const RunConfig base = opts.finish();
  std::vector<TrainOutcome> outcomes(seeds.size());
  jobs = std::max(1, jobs);
  for (std::size_t start = 0; start < seeds.size(); start += static_cast<std::size_t>(jobs)) {
    std::vector<std::future<TrainOutcome>> running;
    const std::size_t end = std::min(seeds.size(), start + static_cast<std::size_t>(jobs));
    for (std::size_t i = start; i < end; ++i) {
      RunConfig cfg = base;
      cfg.seed = seeds[i];
      running.push_back(std::async(std::launch::async, [cfg] { return run_and_evaluate(cfg, ""); }));
    }
    for (std::size_t i = start; i < end; ++i) outcomes[i] = running[i - start].get();
  }

  std::vector<std::vector<EpisodeRecord>> curves;
  std::ofstream eval_os(output_path(prefix + "_eval.csv"));
  eval_os << "seed,avg_total_score\n" << std::setprecision(17);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    write_csv(outcomes[i].records, output_path(prefix + "_seed" + std::to_string(seeds[i]) + ".csv"));
    eval_os << seeds[i] << ',' << outcomes[i].summary.avg_total_score << '\n';
    curves.push_back(outcomes[i].records);
  }
  write_aggregate_csv(aggregate(curves), output_path(prefix + "_aggregate.csv"));
  return 0;
}

int cmd_eval(const std::string& snapshot, const std::string& adviser_name, const std::string& env_name, int episodes,
             std::uint64_t seed) {
  auto env = envs::make_environment(env_name);
  double avg = 0.0;
  if (!snapshot.empty()) {
    auto nets = nn::load_networks(snapshot);
    const nn::Network& actor = nets.front();
    if (actor.input_size() != env->spec().state_dim || actor.output_size() != env->spec().action_dim)
      throw Error("snapshot actor does not fit environment '" + env_name + "'");
    avg = evaluate_policy([&actor](const Vector& s) { return actor.forward(s); }, *env, episodes, seed);
  } else if (!adviser_name.empty()) {
    const std::string name = adviser_name == "auto" ? adviser::default_adviser_for(env_name) : adviser_name;
    auto adv = adviser::make_adviser(name);
    if (!adv) throw Error("eval needs a concrete adviser, got 'none'");
    avg = evaluate_policy([&adv](const Vector& s) { return (*adv)(s); }, *env, episodes, seed);
  } else {
    throw Error("eval needs --snapshot or --adviser");
  }
  std::cout << "avg_total_score " << std::setprecision(10) << avg << '\n';
  return 0;
}

int cmd_verify(int steps, const std::string& trace_csv, const std::string& critic_snapshot,
               const std::string& env_name) {
  const auto report = convergence::run_convergence_suite(steps);
  convergence::print_suite_report(std::cout, report);
  if (!trace_csv.empty()) convergence::write_suite_traces_csv(output_path(trace_csv), report);

  if (!critic_snapshot.empty()) {
    auto nets = nn::load_networks(critic_snapshot);
    if (nets.size() < 2) throw Error("snapshot lacks a critic network");
    auto env = envs::make_environment(env_name);
    std::cout << "learned critic diagnostic (informational, not a gate):\n";
    for (int i = 0; i < 5; ++i) {
      const Vector s = env->reset(evaluation_episode_seed(0, i));
      const Vector a0 = nets[0].forward(s);
      const auto d = convergence::diagnose_learned_critic(nets[1], s, a0, 0.01, 1000);
      std::cout << "  state " << i << ": non-decreasing " << d.non_decreasing_steps << "/" << d.steps
                << "  Q " << d.initial_q << " -> " << d.final_q << "  |grad| " << d.final_gradient_norm << '\n';
    }
  }
  return report.all_passed() ? 0 : 1;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Adapted DDPG with domain-knowledge advisers"};
  app.require_subcommand(1);

  RunOptions train_opts;
  std::uint64_t train_seed = 0;
  std::string train_out, train_snapshot;
  auto* train = app.add_subcommand("train", "train one agent and write its learning curve as CSV");
  add_run_options(train, train_opts);
  train->add_option("--seed", train_seed)->capture_default_str();
  train->add_option("--out", train_out, "CSV path (stdout when omitted)");
  train->add_option("--snapshot-out", train_snapshot, "save actor and critic parameters");

  RunOptions sweep_opts;
  std::vector<std::uint64_t> sweep_seeds{1, 2, 3, 4, 5};
  std::string sweep_prefix = "sweep";
  int sweep_jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "repeat train over several seeds and aggregate the curves");
  add_run_options(sweep, sweep_opts);
  sweep->add_option("--seeds", sweep_seeds, "comma-separated seed list")->delimiter(',')->capture_default_str();
  sweep->add_option("--out", sweep_prefix, "output prefix")->capture_default_str();
  sweep->add_option("--jobs", sweep_jobs, "seeds trained concurrently")->capture_default_str();

  std::string eval_snapshot, eval_adviser, eval_env = "pendulum";
  int eval_episodes = 50;
  std::uint64_t eval_seed = 0;
  auto* eval = app.add_subcommand("eval", "evaluate a saved actor (or an adviser alone) without noise");
  eval->add_option("--snapshot", eval_snapshot, "snapshot written by train --snapshot-out");
  eval->add_option("--adviser", eval_adviser, "evaluate an adviser instead of a snapshot");
  eval->add_option("--env", eval_env)->capture_default_str();
  eval->add_option("--episodes", eval_episodes)->capture_default_str();
  eval->add_option("--seed", eval_seed)->capture_default_str();

  int verify_steps = 10000;
  std::string verify_trace, verify_critic, verify_env = "pendulum";
  auto* verify = app.add_subcommand("verify-convergence", "check monotone improvement on analytic concave Q");
  verify->add_option("--steps", verify_steps)->capture_default_str();
  verify->add_option("--trace-csv", verify_trace, "write every iterate as CSV");
  verify->add_option("--critic-snapshot", verify_critic, "also run the iteration on a learned critic");
  verify->add_option("--env", verify_env)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*train) return cmd_train(train_opts, train_seed, train_out, train_snapshot);
    if (*sweep) return cmd_sweep(sweep_opts, sweep_seeds, sweep_prefix, sweep_jobs);
    if (*eval) return cmd_eval(eval_snapshot, eval_adviser, eval_env, eval_episodes, eval_seed);
    if (*verify) return cmd_verify(verify_steps, verify_trace, verify_critic, verify_env);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }
  return 2;
}

}  // namespace addpg::harness
