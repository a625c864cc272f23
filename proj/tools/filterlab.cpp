#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "filterlab/dynamic_programming.hpp"
#include "filterlab/errors.hpp"
#include "filterlab/harness.hpp"
#include "filterlab/irl.hpp"
#include "filterlab/run_errors.hpp"
#include "filterlab/variance.hpp"

namespace fs = std::filesystem;
using namespace filterlab;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string env;
  std::string algorithm;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_path, "INI config file");
  cmd->add_option("-s,--set", c.overrides, "Override, section.key=value")->take_all();
  cmd->add_option("-e,--env", c.env, "Environment, e.g. tree:branching=2,horizon=3");
  cmd->add_option("-a,--algorithm", c.algorithm, "Algorithm name");
}

bench::Settings gather(const Common& c) {
  bench::Settings s;
  if (!c.config_path.empty()) s = bench::load_settings(c.config_path);
  for (const auto& o : c.overrides) bench::apply_override(s, o);
  if (!c.env.empty()) s["env.spec"] = c.env;
  if (!c.algorithm.empty()) s["algorithm.name"] = c.algorithm;
  return s;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }

int cmd_run(const Common& common, const std::optional<std::string>& seeds_text, const std::string& out_flag) {
  bench::Settings s = gather(common);
  if (!out_flag.empty()) s["run.output_dir"] = out_flag;
  const envs::EnvSpec env = bench::env_from_settings(s);
  irl::RunConfig config = bench::run_config_from_settings(s);
  std::vector<std::uint64_t> seeds{config.seed};
  if (seeds_text) {
    seeds = bench::parse_seeds(*seeds_text);
    if (seeds.empty()) throw ConfigurationError("run.seeds: empty seed list");
  }
  const std::string dir = bench::output_dir(s);
  const envs::EnvBundle bundle = envs::make_env(env);
  std::vector<irl::RunTranscript> transcripts;
  for (auto seed : seeds) {
    config.seed = seed;
    const irl::Problem problem = irl::make_problem(bundle, config);
    irl::RunTranscript tr = irl::run_algorithm(problem, config);
    const std::string path = (fs::path(dir) / "transcripts" / (bench::cell_id({env, config}) + ".json")).string();
    write_file_atomic(path, irl::dump_transcript(tr));
    const auto& ret = tr.iterates.at(tr.returned_policy);
    std::cout << tr.algorithm << " " << envs::label(env) << " seed=" << seed << " rounds=" << tr.iterates.size()
              << " interactions=" << tr.total_interactions << " stop=" << tr.stop_reason
              << " returned_round=" << ret.round;
    if (ret.true_gap) std::cout << " gap=" << fmt(*ret.true_gap);
    std::cout << " -> " << path << "\n";
    transcripts.push_back(std::move(tr));
  }
  const auto files = bench::emit_report(transcripts, dir);
  std::cout << "report: " << files.summary << "\n";
  return 0;
}

int cmd_sweep(const Common& common, const std::string& out_flag, bool complexity, int workers) {
  bench::Settings s = gather(common);
  if (!out_flag.empty()) s["run.output_dir"] = out_flag;
  if (complexity) {
    bench::SampleComplexitySpec spec;
    if (auto it = s.find("sweep.algorithms"); it != s.end()) {
      spec.algorithms.clear();
      std::stringstream in(it->second);
      std::string name;
      while (std::getline(in, name, ','))
        if (!name.empty()) spec.algorithms.push_back(name);
    }
    const auto seeds = s.find("sweep.seeds");
    spec.seeds = bench::parse_seeds(seeds != s.end() ? seeds->second : "0-19");
    if (auto it = s.find("sweep.branching"); it != s.end()) spec.branching = std::stoi(it->second);
    if (auto it = s.find("sweep.horizons"); it != s.end()) {
      spec.horizons.clear();
      for (auto h : bench::parse_seeds(it->second)) spec.horizons.push_back(static_cast<int>(h));
    }
    spec.workers = workers;
    std::vector<std::vector<std::string>> rows;
    for (const auto& res : bench::sample_complexity_sweep(spec)) {
      std::cout << res.algorithm << "\n";
      for (const auto& p : res.points) {
        std::cout << "  T=" << p.horizon << " median=" << fmt(p.median) << " censored=" << p.censored << "\n";
        rows.push_back({res.algorithm, std::to_string(p.horizon), fmt(p.median), std::to_string(p.censored)});
      }
      if (res.fit)
        std::cout << "  fit: " << (res.fit->model == bench::GrowthModel::Exponential ? "exponential" : "polynomial")
                  << " base=" << fmt(res.fit->base) << " degree=" << fmt(res.fit->degree)
                  << " r2_exp=" << fmt(res.fit->r2_exponential) << " r2_poly=" << fmt(res.fit->r2_polynomial) << "\n";
    }
    bench::write_csv((fs::path(bench::output_dir(s)) / "complexity.csv").string(),
                     {"algorithm", "horizon", "median_interactions", "censored"}, rows);
    return 0;
  }
  bench::SweepSpec spec = bench::sweep_from_settings(s);
  if (workers > 0) spec.workers = workers;
  const auto transcripts = bench::run_sweep(spec);
  const auto files = bench::emit_report(transcripts, spec.output_dir);
  std::cout << transcripts.size() << " cells, " << files.long_rows << " rounds -> " << spec.output_dir << "\n";
  return 0;
}

int cmd_trace(const Common& common, int rounds, int initial) {
  bench::Settings s = gather(common);
  if (!s.count("env.spec") && !s.count("env.kind")) s["env.spec"] = "forked_tree";
  const envs::EnvSpec env = bench::env_from_settings(s);
  irl::RunConfig config = bench::run_config_from_settings(s);
  if (rounds > 0) config.filter.rounds = rounds;
  if (initial >= -1) config.initial_policy = initial;
  const envs::EnvBundle bundle = envs::make_env(env);
  const irl::Problem problem = irl::make_problem(bundle, config);
  const irl::RunTranscript tr = irl::run_algorithm(problem, config);
  std::cout << tr.algorithm << " on " << envs::label(env) << "\n";
  std::cout << pad("i", 6) << pad(tr.algorithm == "mmdp" ? "t" : "", 4) << pad("pi_i", 12) << pad("f_i", 12) << "gap\n";
  for (const auto& it : tr.iterates) {
    const std::string pi = it.policy_index >= 0 && it.policy_index < static_cast<int>(bundle.policy_labels.size())
                               ? bundle.policy_labels[it.policy_index]
                               : "(policy)";
    std::cout << pad(std::to_string(it.round), 6) << pad(it.timestep > 0 ? std::to_string(it.timestep) : "", 4)
              << pad(pi, 12) << pad(bundle.reward_class.label(it.reward_index), 12)
              << (it.true_gap ? fmt(*it.true_gap) : "") << "\n";
  }
  return 0;
}

int cmd_variance(int horizon, long samples, std::uint64_t seed) {
  std::cout << pad("rewards", 12) << pad("suffix", 14) << pad("trajectory", 14) << "ratio\n";
  for (bool dependent : {false, true}) {
    const envs::EnvBundle env = envs::make_variance_chain(horizon, dependent);
    const VisitationProfile expert = exact_visitation(*env.mdp, env.expert);
    const auto suf = irl::discriminator_estimator_variance(*env.mdp, expert, env.expert, env.reward_class[0],
                                                           irl::DiscriminatorLoss::SuffixLevel, samples, seed);
    const auto traj = irl::discriminator_estimator_variance(*env.mdp, expert, env.expert, env.reward_class[0],
                                                            irl::DiscriminatorLoss::TrajectoryLevel, samples, seed + 1);
    std::cout << pad(dependent ? "dependent" : "iid", 12) << pad(fmt(suf.variance), 14) << pad(fmt(traj.variance), 14)
              << fmt(suf.variance / traj.variance) << "\n";
  }
  return 0;
}

int cmd_golden() {
  const auto got = envs::forked_tree_tables(envs::make_forked_tree());
  const auto want = envs::forked_tree_expected_tables();
  const std::vector<std::string> rows{"pi_E", "pi_1", "pi_2"}, cols{"r", "r~"};
  int diffs = 0;
  auto check = [&](const char* name, const auto& g, const auto& w) {
    int local = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
      for (std::size_t j = 0; j < w[i].size(); ++j)
        if (std::abs(g.at(i).at(j) - w[i][j]) > 1e-12) {
          std::cout << "  " << name << "[" << rows[i] << "," << cols[j] << "]: got " << fmt(g[i][j]) << ", expected "
                    << fmt(w[i][j]) << "\n";
          ++local;
        }
    std::cout << pad(name, 10) << (local == 0 ? "ok" : "DIFF") << "\n";
    diffs += local;
  };
  check("J-J_E", got.gap, want.gap);
  check("J_E^1", got.reset_pi1, want.reset_pi1);
  check("J_E^2", got.reset_pi2, want.reset_pi2);
  check("J_E^E", got.reset_expert, want.reset_expert);
  std::cout << diffs << " diffs\n";
  return diffs == 0 ? 0 : 1;
}

int cmd_validate(const std::vector<std::string>& paths) {
  std::vector<std::string> files;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      for (const auto& e : fs::recursive_directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path().string());
    } else {
      files.push_back(p);
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigurationError("validate: no transcript files given");
  int failures = 0;
  for (const auto& f : files) {
    const irl::RunTranscript tr = irl::transcript_from_json(Json::parse(read_file(f)));
    const irl::Problem problem = irl::make_problem(envs::make_env(tr.env), tr.config);
    const bool replay_ok = irl::dump_transcript(irl::replay(tr)) == read_file(f);
    for (const auto& a : irl::audit_transcript(tr, problem)) {
      std::cout << pad(a.skipped ? "skip" : (a.holds ? "ok" : "FAIL"), 6) << pad(a.kind, 13) << f;
      if (!a.skipped) std::cout << " gap=" << fmt(a.gap) << " bound=" << fmt(a.bound);
      if (!a.note.empty()) std::cout << " (" << a.note << ")";
      std::cout << "\n";
      if (!a.skipped && !a.holds) ++failures;
    }
    std::cout << pad(replay_ok ? "ok" : "FAIL", 6) << pad("replay", 13) << f << "\n";
    if (!replay_ok) ++failures;
  }
  std::cout << files.size() << " transcripts, " << failures << " failures\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"filterlab: tabular imitation and inverse RL laboratory"};
  app.require_subcommand(1);

  Common run_c, sweep_c, trace_c;
  std::optional<std::string> seeds;
  std::string run_out, sweep_out;
  auto* run = app.add_subcommand("run", "Run one environment/algorithm cell per seed");
  add_common(run, run_c);
  run->add_option("--seeds", seeds, "Seeds, e.g. 0-4 or 1,3");
  run->add_option("-o,--out", run_out, "Output directory");

  bool complexity = false;
  int workers = 0;
  auto* sweep = app.add_subcommand("sweep", "Fan out a sweep over envs, algorithms and seeds");
  add_common(sweep, sweep_c);
  sweep->add_option("-o,--out", sweep_out, "Output directory");
  sweep->add_flag("--complexity", complexity, "Interactions-to-threshold sweep over Tree horizons");
  sweep->add_option("-j,--workers", workers, "Worker threads");

  int rounds = 0, initial = -2;
  auto* trace = app.add_subcommand("trace", "Print per-round (policy, reward) choices");
  add_common(trace, trace_c);
  trace->add_option("-n,--rounds", rounds, "Rounds");
  trace->add_option("--initial-policy", initial, "Starting class index, -1 for uniform");

  int horizon = 10;
  long samples = 100000;
  std::uint64_t vseed = 0;
  auto* variance = app.add_subcommand("variance", "Compare discriminator estimator variances on a reward chain");
  variance->add_option("-T,--horizon", horizon, "Horizon");
  variance->add_option("--samples", samples, "Samples per estimate");
  variance->add_option("--seed", vseed, "Seed");

  auto* golden = app.add_subcommand("golden", "Re-derive the Forked Tree payoff tables and diff them");

  std::vector<std::string> paths;
  auto* validate = app.add_subcommand("validate", "Re-audit bounds and replay stored transcripts");
  validate->add_option("paths", paths, "Transcript files or directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0) std::cerr << app.help();
    return code;
  }

  try {
    if (run->parsed()) return cmd_run(run_c, seeds, run_out);
    if (sweep->parsed()) return cmd_sweep(sweep_c, sweep_out, complexity, workers);
    if (trace->parsed()) return cmd_trace(trace_c, rounds, initial);
    if (variance->parsed()) return cmd_variance(horizon, samples, vseed);
    if (golden->parsed()) return cmd_golden();
    if (validate->parsed()) return cmd_validate(paths);
  } catch (const ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const StructuralError& e) {
    std::cerr << "structural error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
