#include "filterlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "filterlab/errors.hpp"
#include "filterlab/run_errors.hpp"
#include "filterlab/serialization.hpp"

namespace filterlab::bench {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string join_row(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += csv_field(fields[i]);
  }
  return line;
}

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

Settings load_settings(const std::string& path) {
  if (!fs::exists(path)) throw IoError("config file not found: " + path);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigurationError(std::string("config: ") + e.what());
  }
  Settings out;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigurationError(section + ": keys must sit inside a [section]");
    for (const auto& [key, value] : body) out[section + "." + key] = trim(value.data());
  }
  return out;
}

void apply_override(Settings& settings, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigurationError("override '" + assignment + "': expected section.key=value");
  const std::string key = trim(assignment.substr(0, eq));
  if (key.find('.') == std::string::npos) throw ConfigurationError("override '" + key + "': expected section.key");
  settings[key] = trim(assignment.substr(eq + 1));
}

envs::EnvSpec env_from_settings(const Settings& settings) {
  if (auto it = settings.find("env.spec"); it != settings.end()) return envs::parse_env_spec(it->second);
  const auto kind = settings.find("env.kind");
  if (kind == settings.end()) throw ConfigurationError("env.kind: missing");
  std::map<std::string, std::string> values;
  for (const auto& [key, value] : settings)
    if (key.rfind("env.", 0) == 0 && key != "env.kind") values[key.substr(4)] = value;
  try {
    return envs::env_spec_from_map(kind->second, values);
  } catch (const ConfigurationError& e) {
    const std::string what = e.what();
    throw ConfigurationError(what.rfind("env.", 0) == 0 ? what : "env." + what);
  }
}

irl::RunConfig run_config_from_settings(const Settings& settings) {
  irl::RunConfig config;
  for (const auto& [key, value] : settings) {
    if (key.rfind("algorithm.", 0) != 0) continue;
    try {
      irl::apply_setting(config, key.substr(10), value);
    } catch (const ConfigurationError& e) {
      throw ConfigurationError(std::string("algorithm.") + e.what());
    }
  }
  if (auto it = settings.find("run.seed"); it != settings.end()) {
    try {
      irl::apply_setting(config, "seed", it->second);
    } catch (const ConfigurationError& e) {
      throw ConfigurationError(std::string("run.") + e.what());
    }
  }
  return config;
}

std::string output_dir(const Settings& settings, const std::string& fallback) {
  if (const char* env = std::getenv("FILTER_LAB_OUT"); env && *env) return env;
  if (auto it = settings.find("run.output_dir"); it != settings.end()) return it->second;
  return fallback;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split(text, ',')) {
    try {
      const auto dash = item.find('-');
      std::size_t used = 0;
      if (dash != std::string::npos && dash > 0) {
        const std::string lo_s = item.substr(0, dash), hi_s = item.substr(dash + 1);
        const auto lo = std::stoull(lo_s, &used);
        if (used != lo_s.size()) throw std::invalid_argument(item);
        const auto hi = std::stoull(hi_s, &used);
        if (used != hi_s.size() || hi < lo) throw std::invalid_argument(item);
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
      } else {
        if (item[0] == '-') throw std::invalid_argument(item);
        out.push_back(std::stoull(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      }
    } catch (const std::logic_error&) {
      throw ConfigurationError("seeds: cannot read '" + item + "'");
    }
  }
  return out;
}

void validate(const SweepSpec& spec) {
  if (spec.env_grid.empty()) throw ConfigurationError("sweep.envs: empty environment grid");
  if (spec.algo_grid.empty()) throw ConfigurationError("sweep.algorithms: empty algorithm grid");
  if (spec.seeds.empty()) throw ConfigurationError("sweep.seeds: empty seed list");
  std::set<std::uint64_t> seen;
  for (auto s : spec.seeds)
    if (!seen.insert(s).second) throw ConfigurationError("sweep.seeds: seed " + std::to_string(s) + " repeated");
  if (spec.workers < 1) throw ConfigurationError("sweep.workers: must be >= 1");
  if (spec.stop.rounds < 1) throw ConfigurationError("sweep.rounds: must be >= 1");
}

SweepSpec sweep_from_settings(const Settings& settings) {
  SweepSpec spec;
  const irl::RunConfig base = run_config_from_settings(settings);
  if (auto it = settings.find("sweep.envs"); it != settings.end()) {
    for (const auto& text : split(it->second, ';')) spec.env_grid.push_back(envs::parse_env_spec(text));
  } else {
    spec.env_grid.push_back(env_from_settings(settings));
  }
  if (auto it = settings.find("sweep.algorithms"); it != settings.end()) {
    for (const auto& name : split(it->second, ',')) {
      irl::RunConfig c = base;
      c.algorithm = irl::algorithm_from_string(name);
      spec.algo_grid.push_back(c);
    }
  } else {
    spec.algo_grid.push_back(base);
  }
  const auto seeds = settings.find("sweep.seeds");
  spec.seeds = seeds != settings.end() ? parse_seeds(seeds->second) : std::vector<std::uint64_t>{base.seed};
  spec.stop.rounds = base.filter.rounds;
  spec.stop.eps_threshold = base.eps_threshold;
  spec.stop.gap_threshold = base.gap_threshold;
  auto number = [&](const char* key, auto& target) {
    if (auto it = settings.find(key); it != settings.end()) {
      irl::RunConfig scratch;
      const std::string field = std::string(key).substr(6);
      try {
        irl::apply_setting(scratch, field, it->second);
      } catch (const ConfigurationError& e) {
        throw ConfigurationError(std::string("sweep.") + e.what());
      }
      if (field == "rounds") target = scratch.filter.rounds;
      if (field == "eps_threshold") target = scratch.eps_threshold;
      if (field == "gap_threshold") target = scratch.gap_threshold;
    }
  };
  number("sweep.rounds", spec.stop.rounds);
  number("sweep.eps_threshold", spec.stop.eps_threshold);
  number("sweep.gap_threshold", spec.stop.gap_threshold);
  if (auto it = settings.find("sweep.workers"); it != settings.end()) {
    try {
      spec.workers = std::stoi(it->second);
    } catch (const std::logic_error&) {
      throw ConfigurationError("sweep.workers: expected an integer");
    }
  }
  spec.output_dir = output_dir(settings);
  validate(spec);
  return spec;
}

std::string cell_id(const Cell& cell) {
  std::string env = envs::label(cell.env);
  for (char& c : env)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-') c = '_';
  while (!env.empty() && env.back() == '_') env.pop_back();
  return irl::to_string(cell.config.algorithm) + "__" + env + "__seed" + std::to_string(cell.config.seed) + "__" +
         hex(fnv1a(irl::to_json(cell.config).dump())).substr(8);
}

irl::RunTranscript run_cell(const Cell& cell) {
  const irl::Problem problem = irl::make_problem(envs::make_env(cell.env), cell.config);
  return irl::run_algorithm(problem, cell.config);
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex guard;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (;;) {
        {
          std::lock_guard lock(guard);
          if (failure) return;
        }
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(guard);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<irl::RunTranscript> run_sweep(const SweepSpec& spec) {
  validate(spec);
  std::vector<Cell> cells;
  for (const auto& env : spec.env_grid)
    for (const auto& algo : spec.algo_grid)
      for (auto seed : spec.seeds) {
        Cell cell{env, algo};
        cell.config.seed = seed;
        cell.config.filter.rounds = spec.stop.rounds;
        cell.config.eps_threshold = spec.stop.eps_threshold;
        cell.config.gap_threshold = spec.stop.gap_threshold;
        cells.push_back(cell);
      }
  std::vector<irl::RunTranscript> out(cells.size());
  const fs::path dir = fs::path(spec.output_dir) / "transcripts";
  parallel_for(cells.size(), spec.workers, [&](std::size_t i) {
    const std::string path = (dir / (cell_id(cells[i]) + ".json")).string();
    if (fs::exists(path)) {
      out[i] = irl::transcript_from_json(Json::parse(read_file(path)));
      return;
    }
    out[i] = run_cell(cells[i]);
    write_file_atomic(path, irl::dump_transcript(out[i]));
  });
  return out;
}

GrowthFit fit_growth(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigurationError("growth fit: need at least two (x, y) points");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0)) throw ConfigurationError("growth fit: y must be positive");
    if (!(x[i] > 0.0)) throw ConfigurationError("growth fit: x must be positive");
    if (i > 0 && !(x[i] > x[i - 1])) throw ConfigurationError("growth fit: x must be strictly increasing");
  }
  auto regress = [](const std::vector<double>& u, const std::vector<double>& v) {
    const double n = static_cast<double>(u.size());
    double mu = 0, mv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) mu += u[i] / n, mv += v[i] / n;
    double suu = 0, suv = 0, svv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      suu += (u[i] - mu) * (u[i] - mu);
      suv += (u[i] - mu) * (v[i] - mv);
      svv += (v[i] - mv) * (v[i] - mv);
    }
    const double slope = suv / suu;
    const double r2 = svv > 0.0 ? (suv * suv) / (suu * svv) : 1.0;
    return std::pair{slope, r2};
  };
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) lx.push_back(std::log(x[i])), ly.push_back(std::log(y[i]));
  const auto [exp_slope, exp_r2] = regress(x, ly);
  const auto [poly_slope, poly_r2] = regress(lx, ly);
  GrowthFit fit;
  fit.x = x;
  fit.y = y;
  fit.base = std::exp(exp_slope);
  fit.degree = poly_slope;
  fit.r2_exponential = exp_r2;
  fit.r2_polynomial = poly_r2;
  fit.model = exp_r2 > poly_r2 ? GrowthModel::Exponential : GrowthModel::Polynomial;
  fit.fit_quality = std::max(exp_r2, poly_r2);
  return fit;
}

std::optional<std::uint64_t> interactions_to_threshold(const std::string& algorithm, const envs::EnvSpec& env,
                                                       std::uint64_t seed, const SampleComplexitySpec& spec) {
  const envs::EnvBundle bundle = envs::make_env(env);
  irl::RunConfig config;
  config.algorithm = irl::algorithm_from_string(algorithm);
  config.mode = irl::OracleMode::Sampled;
  config.seed = seed;
  config.interaction_budget = spec.budget;
  if (config.algorithm == irl::Algorithm::Mmdp) {
    for (long m = 1;; m *= 2) {
      config.filter.rollouts_per_round = static_cast<int>(m);
      const irl::Problem problem = irl::make_problem(bundle, config);
      const irl::RunTranscript tr = irl::run_algorithm(problem, config);
      if (tr.total_interactions > spec.budget) return std::nullopt;
      if (irl::gap_to_profile(problem, tr.output_policy) <= spec.gap_threshold) return tr.total_interactions;
      if (m > static_cast<long>(spec.budget)) return std::nullopt;
    }
  }
  config.adversary_decode = irl::Decode::Mixture;
  config.filter.rounds = spec.max_rounds;
  config.gap_threshold = spec.gap_threshold;
  const irl::Problem problem = irl::make_problem(bundle, config);
  const irl::RunTranscript tr = irl::run_algorithm(problem, config);
  if (tr.stop_reason != "gap_threshold") return std::nullopt;
  return tr.iterates.back().env_interactions;
}

std::vector<ComplexityResult> sample_complexity_sweep(const SampleComplexitySpec& spec) {
  if (spec.algorithms.empty() || spec.horizons.empty() || spec.seeds.empty())
    throw ConfigurationError("sample complexity sweep: empty algorithm, horizon or seed list");
  std::vector<ComplexityResult> results;
  for (const auto& algo : spec.algorithms) {
    ComplexityResult res;
    res.algorithm = algo;
    for (int T : spec.horizons) {
      envs::EnvSpec env;
      env.kind = envs::EnvKind::Tree;
      env.params.branching = spec.branching;
      env.params.horizon = T;
      envs::validate(env);
      std::vector<std::optional<std::uint64_t>> found(spec.seeds.size());
      parallel_for(spec.seeds.size(), spec.workers,
                   [&](std::size_t i) { found[i] = interactions_to_threshold(algo, env, spec.seeds[i], spec); });
      ComplexityPoint point;
      point.horizon = T;
      for (const auto& f : found) {
        if (f)
          point.samples.push_back(static_cast<double>(*f));
        else
          ++point.censored;
      }
      if (point.censored > 0)
        log_warning(algo + " T=" + std::to_string(T) + ": " + std::to_string(point.censored) +
                    " censored cells left out of the fit");
      if (!point.samples.empty()) point.median = median(point.samples);
      res.points.push_back(std::move(point));
    }
    std::vector<double> x, y;
    for (const auto& p : res.points)
      if (!p.samples.empty() && p.median > 0.0) x.push_back(p.horizon), y.push_back(p.median);
    if (x.size() >= 2) res.fit = fit_growth(x, y);
    results.push_back(std::move(res));
  }
  return results;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::string body = join_row(header) + "\n";
  for (const auto& row : rows) body += join_row(row) + "\n";
  write_file_atomic(path, body);
  const std::string head = join_row(header);
  write_file_atomic(path + ".schema", hex(fnv1a(head)) + "\n" + head + "\n");
}

ReportFiles emit_report(const std::vector<irl::RunTranscript>& transcripts, const std::string& dir) {
  if (transcripts.empty()) throw ConfigurationError("report: no transcripts");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
  ReportFiles files;
  files.summary = (fs::path(dir) / "summary.csv").string();
  files.audit = (fs::path(dir) / "audit.csv").string();
  files.long_format = (fs::path(dir) / "long.csv").string();

  std::vector<std::vector<std::string>> summary, audit, longf;
  for (const auto& tr : transcripts) {
    const std::string env = envs::label(tr.env);
    const std::string seed = std::to_string(tr.seed);
    const auto& ret = tr.iterates.at(tr.returned_policy);
    summary.push_back({tr.algorithm, env, seed, std::to_string(tr.iterates.size()),
                       std::to_string(ret.round), std::to_string(tr.total_interactions), tr.stop_reason,
                       num(tr.eps_bar), num(tr.delta_bar), num(tr.eps_rl_bar),
                       ret.true_gap ? num(*ret.true_gap) : ""});
    for (const auto& it : tr.iterates)
      longf.push_back({tr.algorithm, env, seed, std::to_string(it.round), std::to_string(it.env_interactions),
                       num(it.learner_loss), num(it.adversary_loss), it.true_gap ? num(*it.true_gap) : "",
                       num(it.alpha)});
    const irl::Problem problem = irl::make_problem(envs::make_env(tr.env), tr.config);
    for (const auto& a : irl::audit_transcript(tr, problem)) {
      const std::string ratio = a.skipped || a.bound == 0.0 ? "" : num(a.gap / a.bound);
      audit.push_back({tr.algorithm, env, seed, a.kind, a.skipped ? "" : num(a.gap), a.skipped ? "" : num(a.bound),
                       ratio, a.skipped ? "" : (a.holds ? "true" : "false"), a.skipped ? "true" : "false", a.note});
    }
  }
  write_csv(files.summary,
            {"algorithm", "env", "seed", "rounds", "returned_round", "total_interactions", "stop_reason", "eps_bar",
             "delta_bar", "eps_rl_bar", "returned_gap"},
            summary);
  write_csv(files.audit,
            {"algorithm", "env", "seed", "kind", "gap", "bound", "ratio", "holds", "skipped", "note"}, audit);
  write_csv(files.long_format, long_columns(), longf);
  files.long_rows = longf.size();
  return files;
}

}  // namespace filterlab::bench
