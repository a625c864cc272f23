#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "filterlab/errors.hpp"
#include "filterlab/harness.hpp"
#include "filterlab/serialization.hpp"

using namespace filterlab;
using namespace filterlab::bench;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("filterlab_bench_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

template <typename Fn>
std::string config_error(Fn&& fn) {
  try {
    fn();
  } catch (const ConfigurationError& e) {
    return e.what();
  }
  return "";
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("ini settings and overrides") {
  const auto dir = scratch_dir("ini");
  const std::string path = (dir / "run.ini").string();
  write_file_atomic(path,
                    "[env]\nkind = tree\nbranching = 2\nhorizon = 3\n\n"
                    "[algorithm]\nname = nrmm_br\nrounds = 6\n\n[run]\nseed = 4\noutput_dir = out\n");
  auto s = load_settings(path);
  CHECK(s.at("env.kind") == "tree");
  apply_override(s, "env.horizon=2");
  apply_override(s, "algorithm.alpha=0.5");
  const auto env = env_from_settings(s);
  CHECK(env.kind == envs::EnvKind::Tree);
  CHECK(env.params.horizon == 2);
  const auto cfg = run_config_from_settings(s);
  CHECK(cfg.algorithm == irl::Algorithm::NrmmBr);
  CHECK(cfg.filter.rounds == 6);
  CHECK(cfg.filter.alpha == 0.5);
  CHECK(cfg.seed == 4u);

  ::unsetenv("FILTER_LAB_OUT");
  CHECK(output_dir(s) == "out");
  ::setenv("FILTER_LAB_OUT", (dir / "elsewhere").c_str(), 1);
  CHECK(output_dir(s) == (dir / "elsewhere").string());
  ::unsetenv("FILTER_LAB_OUT");

  CHECK_THROWS_AS(load_settings((dir / "missing.ini").string()), IoError);
  CHECK(config_error([&] { apply_override(s, "horizon=3"); }) != "");
  CHECK(config_error([&] { apply_override(s, "env.horizon"); }) != "");
  Settings bad = s;
  bad["algorithm.rounds"] = "many";
  CHECK(config_error([&] { run_config_from_settings(bad); }).rfind("algorithm.rounds", 0) == 0);
  bad = s;
  bad["env.horizon"] = "-1";
  CHECK(config_error([&] { env_from_settings(bad); }).rfind("env.horizon", 0) == 0);
  bad = s;
  bad.erase("env.kind");
  CHECK(config_error([&] { env_from_settings(bad); }).rfind("env.kind", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("seed lists") {
  CHECK(parse_seeds("0-3") == std::vector<std::uint64_t>{0, 1, 2, 3});
  CHECK(parse_seeds("1,5,9") == std::vector<std::uint64_t>{1, 5, 9});
  CHECK(parse_seeds("2,7-8") == std::vector<std::uint64_t>{2, 7, 8});
  CHECK_THROWS_AS(parse_seeds("3-1"), ConfigurationError);
  CHECK_THROWS_AS(parse_seeds("x"), ConfigurationError);
  CHECK_THROWS_AS(parse_seeds("-2"), ConfigurationError);
}

TEST_CASE("sweep validation") {
  SweepSpec spec;
  spec.env_grid.push_back(envs::parse_env_spec("forked_tree"));
  spec.algo_grid.push_back(irl::RunConfig{});
  spec.seeds = {1, 2};
  CHECK_NOTHROW(validate(spec));
  auto no_envs = spec;
  no_envs.env_grid.clear();
  CHECK(config_error([&] { validate(no_envs); }).rfind("sweep.envs", 0) == 0);
  auto no_algos = spec;
  no_algos.algo_grid.clear();
  CHECK(config_error([&] { validate(no_algos); }).rfind("sweep.algorithms", 0) == 0);
  auto no_seeds = spec;
  no_seeds.seeds.clear();
  CHECK(config_error([&] { validate(no_seeds); }).rfind("sweep.seeds", 0) == 0);
  auto repeated = spec;
  repeated.seeds = {1, 1};
  CHECK(config_error([&] { validate(repeated); }).find("repeated") != std::string::npos);
  auto workers = spec;
  workers.workers = 0;
  CHECK(config_error([&] { validate(workers); }).rfind("sweep.workers", 0) == 0);

  Settings s{{"env.kind", "forked_tree"},
             {"sweep.envs", "tree:horizon=2;cliff:horizon=4"},
             {"sweep.algorithms", "dual_irl,mmdp"},
             {"sweep.seeds", "0-2"},
             {"sweep.rounds", "5"},
             {"sweep.workers", "3"}};
  const auto from = sweep_from_settings(s);
  CHECK(from.env_grid.size() == 2u);
  CHECK(from.algo_grid.size() == 2u);
  CHECK(from.algo_grid[1].algorithm == irl::Algorithm::Mmdp);
  CHECK(from.seeds.size() == 3u);
  CHECK(from.stop.rounds == 5);
  CHECK(from.workers == 3);
  s["sweep.rounds"] = "0";
  CHECK(config_error([&] { sweep_from_settings(s); }).rfind("sweep.rounds", 0) == 0);
  s["sweep.rounds"] = "x";
  CHECK(config_error([&] { sweep_from_settings(s); }).rfind("sweep.rounds", 0) == 0);
}

TEST_CASE("cell ids are stable and distinct") {
  Cell a{envs::parse_env_spec("tree:branching=2,horizon=3"), irl::RunConfig{}};
  Cell b = a;
  CHECK(cell_id(a) == cell_id(b));
  CHECK(cell_id(a).rfind("nrmm_br__tree_A_2_T_3__seed0__", 0) == 0);
  b.config.filter.alpha = 0.5;
  CHECK(cell_id(a) != cell_id(b));
  b = a;
  b.config.seed = 1;
  CHECK(cell_id(a) != cell_id(b));
}

TEST_CASE("parallel for") {
  std::vector<std::atomic<int>> hits(200);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(50, 4,
                               [](std::size_t i) {
                                 if (i == 17) throw std::runtime_error("cell failed");
                               }),
                  std::runtime_error);
  int serial = 0;
  parallel_for(5, 1, [&](std::size_t) { ++serial; });
  CHECK(serial == 5);
}

TEST_CASE("sweeps resume from stored transcripts") {
  const auto dir = scratch_dir("sweep");
  SweepSpec spec;
  spec.env_grid = {envs::parse_env_spec("forked_tree"), envs::parse_env_spec("tree:horizon=2")};
  for (auto algo : {irl::Algorithm::DualIrl, irl::Algorithm::NrmmBr}) {
    irl::RunConfig c;
    c.algorithm = algo;
    spec.algo_grid.push_back(c);
  }
  spec.seeds = {0, 1};
  spec.stop.rounds = 4;
  spec.output_dir = dir.string();
  spec.workers = 3;
  const auto first = run_sweep(spec);
  CHECK(first.size() == 8u);
  std::size_t stored = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "transcripts")) ++stored;
  CHECK(stored == 8u);

  // a tampered file is loaded as is, which shows the cell was not rerun
  Cell cell{spec.env_grid[0], spec.algo_grid[0]};
  cell.config.filter.rounds = 4;
  const auto path = dir / "transcripts" / (cell_id(cell) + ".json");
  REQUIRE(fs::exists(path));
  auto doc = Json::parse(read_file(path.string()));
  doc["stop_reason"] = "loaded";
  write_file_atomic(path.string(), doc.dump(2) + "\n");
  const auto second = run_sweep(spec);
  CHECK(second[0].stop_reason == "loaded");
  for (std::size_t i = 1; i < second.size(); ++i)
    CHECK(irl::dump_transcript(second[i]) == irl::dump_transcript(first[i]));

  spec.workers = 1;
  fs::remove_all(dir / "transcripts");
  const auto serial = run_sweep(spec);
  for (std::size_t i = 0; i < serial.size(); ++i) CHECK(irl::dump_transcript(serial[i]) == irl::dump_transcript(first[i]));

  const auto files = emit_report(first, (dir / "report").string());
  const auto summary = lines(read_file(files.summary));
  CHECK(summary.size() == 9u);
  CHECK(summary[0] ==
        "algorithm,env,seed,rounds,returned_round,total_interactions,stop_reason,eps_bar,delta_bar,eps_rl_bar,"
        "returned_gap");
  const auto schema = lines(read_file(files.long_format + ".schema"));
  REQUIRE(schema.size() == 2u);
  CHECK(schema[1] == "algorithm,env,seed,round,env_interactions,eps_i,delta_i,gap,alpha");
  std::ostringstream hash;
  hash << std::hex << fnv1a(schema[1]);
  CHECK(schema[0].find(hash.str()) != std::string::npos);
  CHECK(lines(read_file(files.long_format)).size() == files.long_rows + 1);
  CHECK(lines(read_file(files.audit))[0] == "algorithm,env,seed,kind,gap,bound,ratio,holds,skipped,note");
  CHECK_THROWS_AS(emit_report({}, (dir / "empty").string()), ConfigurationError);
  write_file_atomic((dir / "blocker").string(), "x");
  CHECK_THROWS_AS(emit_report(first, (dir / "blocker" / "sub").string()), IoError);
  fs::remove_all(dir);
}

TEST_CASE("fnv1a") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("growth fits") {
  std::vector<double> x{1, 2, 3, 4, 5, 6};
  std::vector<double> expo, poly;
  for (double v : x) {
    expo.push_back(3.0 * std::pow(2.5, v));
    poly.push_back(2.0 * v * v);
  }
  const auto e = fit_growth(x, expo);
  CHECK(e.model == GrowthModel::Exponential);
  CHECK(e.base == doctest::Approx(2.5));
  CHECK(e.fit_quality == doctest::Approx(1.0));
  const auto p = fit_growth(x, poly);
  CHECK(p.model == GrowthModel::Polynomial);
  CHECK(p.degree == doctest::Approx(2.0));
  CHECK(p.r2_polynomial > p.r2_exponential);
  CHECK_THROWS_AS(fit_growth({1}, {1}), ConfigurationError);
  CHECK_THROWS_AS(fit_growth({1, 2}, {1, 0}), ConfigurationError);
  CHECK_THROWS_AS(fit_growth({2, 1}, {1, 2}), ConfigurationError);
}

TEST_CASE("interactions to threshold") {
  SampleComplexitySpec spec;
  spec.seeds = {0};
  const auto env = envs::parse_env_spec("tree:branching=2,horizon=2");
  const auto mmdp = interactions_to_threshold("mmdp", env, 0, spec);
  REQUIRE(mmdp.has_value());
  CHECK(*mmdp > 0u);
  CHECK(interactions_to_threshold("mmdp", env, 0, spec) == mmdp);
  const auto dual = interactions_to_threshold("dual_irl", env, 0, spec);
  REQUIRE(dual.has_value());
  spec.budget = 3;
  CHECK_FALSE(interactions_to_threshold("dual_irl", env, 0, spec).has_value());

  SampleComplexitySpec small;
  small.horizons = {1, 2, 3};
  small.seeds = {0, 1, 2};
  const auto results = sample_complexity_sweep(small);
  REQUIRE(results.size() == 2u);
  CHECK(results[0].algorithm == "dual_irl");
  CHECK(results[0].points.size() == 3u);
  for (const auto& pt : results[1].points) CHECK(pt.censored == 0);
  small.seeds.clear();
  CHECK_THROWS_AS(sample_complexity_sweep(small), ConfigurationError);
}
