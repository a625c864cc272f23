#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "filterlab/environments.hpp"
#include "filterlab/irl.hpp"

namespace filterlab::bench {

/// Flat key-value settings, keyed "section.key".
using Settings = std::map<std::string, std::string>;

/// Reads an INI file with sections [env], [algorithm], [run], [sweep].
Settings load_settings(const std::string& path);
/// "section.key=value" override, as given on the command line.
void apply_override(Settings& settings, const std::string& assignment);

envs::EnvSpec env_from_settings(const Settings& settings);
irl::RunConfig run_config_from_settings(const Settings& settings);
/// run.output_dir, replaced by FILTER_LAB_OUT when that is set.
std::string output_dir(const Settings& settings, const std::string& fallback = "filterlab-out");

struct StopRule {
  int rounds = 20;
  double eps_threshold = 0.0;
  double gap_threshold = -1.0;
};

struct SweepSpec {
  std::vector<envs::EnvSpec> env_grid;
  std::vector<irl::RunConfig> algo_grid;  // seed is overwritten per cell
  std::vector<std::uint64_t> seeds;
  StopRule stop;
  std::string output_dir;
  int workers = 1;
};

/// Throws ConfigurationError on empty grids or repeated seeds.
void validate(const SweepSpec& spec);
SweepSpec sweep_from_settings(const Settings& settings);
/// "0-4" or "1,5,9".
std::vector<std::uint64_t> parse_seeds(const std::string& text);

struct Cell {
  envs::EnvSpec env;
  irl::RunConfig config;
};

std::string cell_id(const Cell& cell);
irl::RunTranscript run_cell(const Cell& cell);

/// Runs every (env, algorithm, seed) cell on a bounded pool. Cells whose
/// transcript file already exists under output_dir/transcripts are loaded, not rerun.
std::vector<irl::RunTranscript> run_sweep(const SweepSpec& spec);

enum class GrowthModel { Exponential, Polynomial };

struct GrowthFit {
  std::vector<double> x;
  std::vector<double> y;
  GrowthModel model = GrowthModel::Polynomial;
  double base = 0.0;    // exponential: y ~ c * base^x
  double degree = 0.0;  // polynomial: y ~ c * x^degree
  double fit_quality = 0.0;  // R^2 of the chosen model
  double r2_exponential = 0.0;
  double r2_polynomial = 0.0;
};

/// Least squares on ln y against x and against ln x; the better R^2 wins.
GrowthFit fit_growth(const std::vector<double>& x, const std::vector<double>& y);

struct SampleComplexitySpec {
  std::vector<std::string> algorithms{"dual_irl", "mmdp"};
  int branching = 2;
  std::vector<int> horizons{2, 3, 4, 5, 6};
  std::vector<std::uint64_t> seeds;
  double gap_threshold = 0.5;
  std::uint64_t budget = 10'000'000;
  int max_rounds = 50;
  int workers = 1;
};

struct ComplexityPoint {
  int horizon = 0;
  double median = 0.0;
  int censored = 0;
  std::vector<double> samples;
};

struct ComplexityResult {
  std::string algorithm;
  std::vector<ComplexityPoint> points;
  std::optional<GrowthFit> fit;
};

/// Interactions until the true gap reaches the threshold, or nullopt when the
/// budget runs out. MMDP doubles its per-timestep rollout count until it succeeds.
std::optional<std::uint64_t> interactions_to_threshold(const std::string& algorithm, const envs::EnvSpec& env,
                                                       std::uint64_t seed, const SampleComplexitySpec& spec);

std::vector<ComplexityResult> sample_complexity_sweep(const SampleComplexitySpec& spec);

inline const std::vector<std::string>& long_columns() {
  static const std::vector<std::string> cols{"algorithm", "env", "seed", "round", "env_interactions",
                                             "eps_i", "delta_i", "gap", "alpha"};
  return cols;
}

std::uint64_t fnv1a(const std::string& text);

struct ReportFiles {
  std::string summary;
  std::string audit;
  std::string long_format;
  std::size_t long_rows = 0;
};

/// summary.csv, audit.csv and long.csv under output_dir, each with a .schema
/// sibling holding the FNV-1a hash of its header. IoError when unwritable.
ReportFiles emit_report(const std::vector<irl::RunTranscript>& transcripts, const std::string& output_dir);

/// Writes one CSV plus its schema file atomically.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Runs fn(0..n-1) on at most `workers` threads; the first exception is rethrown.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace filterlab::bench
