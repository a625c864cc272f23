#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "filterlab/dynamic_programming.hpp"
#include "filterlab/environments.hpp"
#include "filterlab/errors.hpp"
#include "filterlab/irl.hpp"
#include "filterlab/run_errors.hpp"
#include "filterlab/variance.hpp"

namespace py = pybind11;
using namespace filterlab;

namespace {

irl::RunConfig config_from(const std::string& algorithm, const std::map<std::string, std::string>& settings,
                           std::uint64_t seed) {
  irl::RunConfig config;
  config.algorithm = irl::algorithm_from_string(algorithm);
  for (const auto& [k, v] : settings) irl::apply_setting(config, k, v);
  config.seed = seed;
  return config;
}

std::string run(const std::string& env, const std::string& algorithm,
                const std::map<std::string, std::string>& settings, std::uint64_t seed) {
  const irl::RunConfig config = config_from(algorithm, settings, seed);
  py::gil_scoped_release release;
  const irl::Problem problem = irl::make_problem(envs::make_env(envs::parse_env_spec(env)), config);
  return irl::dump_transcript(irl::run_algorithm(problem, config));
}

std::string replay(const std::string& transcript_json) {
  const irl::RunTranscript tr = irl::transcript_from_json(Json::parse(transcript_json));
  return irl::dump_transcript(irl::replay(tr));
}

std::vector<py::dict> audit(const std::string& transcript_json) {
  const irl::RunTranscript tr = irl::transcript_from_json(Json::parse(transcript_json));
  const irl::Problem problem = irl::make_problem(envs::make_env(tr.env), tr.config);
  std::vector<py::dict> out;
  for (const auto& a : irl::audit_transcript(tr, problem)) {
    py::dict d;
    d["kind"] = a.kind;
    d["gap"] = a.gap;
    d["bound"] = a.bound;
    d["holds"] = a.holds;
    d["skipped"] = a.skipped;
    d["note"] = a.note;
    out.push_back(d);
  }
  return out;
}

py::dict tables(const envs::ForkedTreeTables& t) {
  py::dict d;
  d["gap"] = t.gap;
  d["reset_pi1"] = t.reset_pi1;
  d["reset_pi2"] = t.reset_pi2;
  d["reset_expert"] = t.reset_expert;
  return d;
}

double policy_value(const std::string& env, const std::string& policy, const std::string& reward) {
  const envs::EnvBundle b = envs::make_env(envs::parse_env_spec(env));
  const PolicySequence* pi = policy == "expert" ? &b.expert : nullptr;
  for (std::size_t k = 0; k < b.policy_labels.size() && !pi; ++k)
    if (b.policy_labels[k] == policy) pi = &b.policy_class[k];
  if (!pi) throw ConfigurationError("policy: no class member labelled '" + policy + "'");
  for (std::size_t j = 0; j < b.reward_class.size(); ++j)
    if (b.reward_class.label(j) == reward) return exact_policy_value(*b.mdp, *pi, b.reward_class[j]);
  throw ConfigurationError("reward: no class member labelled '" + reward + "'");
}

double variance(int horizon, bool dependent, const std::string& mode, long samples, std::uint64_t seed) {
  const envs::EnvBundle env = envs::make_variance_chain(horizon, dependent);
  const VisitationProfile expert = exact_visitation(*env.mdp, env.expert);
  irl::DiscriminatorLoss m;
  if (mode == "suffix")
    m = irl::DiscriminatorLoss::SuffixLevel;
  else if (mode == "trajectory")
    m = irl::DiscriminatorLoss::TrajectoryLevel;
  else
    throw ConfigurationError("mode: expected 'suffix' or 'trajectory'");
  py::gil_scoped_release release;
  return irl::discriminator_estimator_variance(*env.mdp, expert, env.expert, env.reward_class[0], m, samples, seed)
      .variance;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Tabular imitation and inverse RL laboratory";
  py::register_exception<ConfigurationError>(m, "ConfigurationError", PyExc_ValueError);
  py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("run", &run, py::arg("env"), py::arg("algorithm"), py::arg("settings") = std::map<std::string, std::string>{},
        py::arg("seed") = 0, "Run one cell and return the transcript as JSON text.");
  m.def("replay", &replay, py::arg("transcript"));
  m.def("audit", &audit, py::arg("transcript"));
  m.def("forked_tree_tables", [] { return tables(envs::forked_tree_tables(envs::make_forked_tree())); });
  m.def("forked_tree_expected_tables", [] { return tables(envs::forked_tree_expected_tables()); });
  m.def("policy_value", &policy_value, py::arg("env"), py::arg("policy"), py::arg("reward"));
  m.def("discriminator_variance", &variance, py::arg("horizon"), py::arg("dependent"), py::arg("mode"),
        py::arg("samples") = 100000, py::arg("seed") = 0);
  m.def("hoeffding_sample_size", &irl::hoeffding_sample_size, py::arg("policy_count"), py::arg("reward_count"),
        py::arg("horizon"), py::arg("num_actions"), py::arg("epsilon"), py::arg("delta"));
}
