#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "filterlab/dynamic_programming.hpp"
#include "filterlab/environments.hpp"
#include "filterlab/errors.hpp"
#include "filterlab/irl.hpp"
#include "filterlab/run_errors.hpp"
#include "filterlab/variance.hpp"

using namespace filterlab;
using namespace filterlab::irl;

namespace {

struct Trace {
  std::vector<int> policies;
  std::vector<int> rewards;
};

Trace trace(const RunTranscript& tr) {
  Trace out;
  for (const auto& it : tr.iterates) {
    out.policies.push_back(it.policy_index);
    out.rewards.push_back(it.reward_index);
  }
  return out;
}

RunTranscript forked(Algorithm algo, int rounds = 8) {
  const auto env = envs::make_forked_tree();
  RunConfig c;
  c.algorithm = algo;
  c.initial_policy = 1;
  c.filter.rounds = rounds;
  return run_algorithm(make_problem(env, c), c);
}

std::string setting_error(const std::string& key, const std::string& value) {
  RunConfig c;
  try {
    apply_setting(c, key, value);
  } catch (const ConfigurationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("settings") {
  for (auto a : {Algorithm::DualIrl, Algorithm::PrimalIrl, Algorithm::Mmdp, Algorithm::NrmmBr, Algorithm::NrmmNr,
                 Algorithm::NrmmDual, Algorithm::Filter, Algorithm::BehavioralCloning})
    CHECK(algorithm_from_string(to_string(a)) == a);
  RunConfig c;
  apply_setting(c, "name", "filter");
  apply_setting(c, "alpha", "0.25");
  apply_setting(c, "alpha_schedule", "linear_anneal");
  apply_setting(c, "adversary_mode", "no_regret");
  apply_setting(c, "discriminator_loss_mode", "suffix");
  apply_setting(c, "policy_learner", "mw");
  apply_setting(c, "rounds", "12");
  apply_setting(c, "seed", "99");
  CHECK(c.algorithm == Algorithm::Filter);
  CHECK(c.filter.alpha == 0.25);
  CHECK(c.filter.alpha_schedule == AlphaSchedule::LinearAnneal);
  CHECK(c.filter.adversary_mode == AdversaryMode::NoRegret);
  CHECK(c.filter.discriminator_loss_mode == DiscriminatorLoss::SuffixLevel);
  CHECK(c.policy_learner == game::LearnerAlgorithm::MultiplicativeWeights);
  CHECK(c.filter.rounds == 12);
  CHECK(c.seed == 99u);
  CHECK(run_config_from_json(to_json(c)) == c);

  CHECK(setting_error("rounds", "ten").rfind("rounds", 0) == 0);
  CHECK(setting_error("mode", "approximate").rfind("mode", 0) == 0);
  CHECK(setting_error("bogus", "1").rfind("bogus", 0) == 0);
  CHECK(setting_error("algorithm", "gail") != "");
}

TEST_CASE("forked tree traces") {
  SUBCASE("dual IRL finds the expert after one round") {
    const auto t = trace(forked(Algorithm::DualIrl));
    REQUIRE(t.policies.size() >= 2u);
    CHECK(t.policies[0] == 1);
    CHECK(t.rewards[0] == 1);
    CHECK(t.policies[1] == 0);
  }
  SUBCASE("primal IRL") {
    const auto t = trace(forked(Algorithm::PrimalIrl));
    REQUIRE(t.policies.size() >= 2u);
    CHECK(t.policies[0] == 1);
    CHECK(t.rewards[0] == 1);
    CHECK(t.policies[1] == 0);
    CHECK(t.rewards[1] == 0);
  }
  SUBCASE("best-response NRMM visits pi_2 before the expert") {
    const auto t = trace(forked(Algorithm::NrmmBr));
    REQUIRE(t.policies.size() >= 3u);
    CHECK(std::vector<int>(t.policies.begin(), t.policies.begin() + 3) == std::vector<int>{1, 2, 0});
    CHECK(std::vector<int>(t.rewards.begin(), t.rewards.begin() + 3) == std::vector<int>{1, 1, 0});
  }
  SUBCASE("no-regret NRMM") {
    const auto t = trace(forked(Algorithm::NrmmNr));
    REQUIRE(t.policies.size() >= 3u);
    CHECK(std::vector<int>(t.policies.begin(), t.policies.begin() + 3) == std::vector<int>{1, 2, 0});
    CHECK(std::vector<int>(t.rewards.begin(), t.rewards.begin() + 3) == std::vector<int>{1, 1, 1});
  }
  SUBCASE("dual NRMM cycles between the two wrong policies") {
    const auto t = trace(forked(Algorithm::NrmmDual, 10));
    for (int p : t.policies) CHECK(p != 0);
    for (std::size_t i = 1; i < t.policies.size(); ++i) CHECK(t.policies[i] != t.policies[i - 1]);
    for (int r : t.rewards) CHECK(r == 1);
  }
  SUBCASE("filter with alpha 1 matches best-response NRMM") {
    CHECK(trace(forked(Algorithm::Filter)).policies == trace(forked(Algorithm::NrmmBr)).policies);
  }
}

TEST_CASE("audits hold on the forked tree") {
  const auto env = envs::make_forked_tree();
  for (auto algo : {Algorithm::DualIrl, Algorithm::PrimalIrl, Algorithm::Mmdp, Algorithm::NrmmBr, Algorithm::NrmmNr,
                    Algorithm::NrmmDual, Algorithm::Filter}) {
    RunConfig c;
    c.algorithm = algo;
    c.initial_policy = 1;
    c.filter.rounds = 8;
    const auto p = make_problem(env, c);
    CHECK(true_reward_in_class(p));
    CHECK(expert_in_class(p));
    const auto tr = run_algorithm(p, c);
    const auto audits = audit_transcript(tr, p);
    CHECK_FALSE(audits.empty());
    for (const auto& a : audits) {
      CAPTURE(tr.algorithm);
      CAPTURE(a.kind);
      CHECK_FALSE(a.skipped);
      CHECK(a.holds);
    }
  }
}

TEST_CASE("transcripts round trip and replay identically") {
  const auto env = envs::make_random_mdp(4, 2, 3, 3, 6);
  for (auto mode : {OracleMode::Exact, OracleMode::Sampled}) {
    for (auto algo : {Algorithm::DualIrl, Algorithm::Mmdp, Algorithm::Filter}) {
      RunConfig c;
      c.algorithm = algo;
      c.mode = mode;
      c.filter.rounds = 4;
      c.filter.rollouts_per_round = 16;
      c.seed = 3;
      const auto tr = run_algorithm(make_problem(env, c), c);
      const std::string text = dump_transcript(tr);
      CHECK(dump_transcript(transcript_from_json(Json::parse(text))) == text);
      CHECK(dump_transcript(replay(tr)) == text);
      if (mode == OracleMode::Sampled) CHECK(tr.total_interactions > 0u);
    }
  }
}

TEST_CASE("interaction budget stops sampled runs") {
  const auto env = envs::make_tree(2, 3);
  RunConfig c;
  c.algorithm = Algorithm::DualIrl;
  c.mode = OracleMode::Sampled;
  c.filter.rounds = 50;
  c.interaction_budget = 200;
  const auto tr = run_algorithm(make_problem(env, c), c);
  CHECK(tr.stop_reason == "budget");
  CHECK(tr.iterates.size() < 50u);
  for (std::size_t i = 1; i < tr.iterates.size(); ++i)
    CHECK(tr.iterates[i].env_interactions >= tr.iterates[i - 1].env_interactions);
}

TEST_CASE("gap threshold stops early") {
  const auto env = envs::make_tree(2, 3);
  RunConfig c;
  c.algorithm = Algorithm::NrmmBr;
  c.filter.rounds = 50;
  c.gap_threshold = 0.0;
  const auto tr = run_algorithm(make_problem(env, c), c);
  CHECK(tr.stop_reason == "gap_threshold");
  CHECK(*tr.iterates.back().true_gap <= 0.0);
}

TEST_CASE("mmdp on the cliff and dante") {
  const auto cliff = envs::make_cliff(6);
  RunConfig c;
  c.algorithm = Algorithm::Mmdp;
  const auto p = make_problem(cliff, c);
  const auto tr = run_algorithm(p, c);
  CHECK(tr.stop_reason == "timesteps");
  CHECK(tr.iterates.size() == 6u);
  CHECK(gap_to_profile(p, tr.output_policy) == doctest::Approx(0.0));

  for (int t = 1; t <= 6; ++t) {
    const auto m = mmdp_payoff_exact(p, t, cliff.expert);
    CHECK(m(p.policy_class.size() - 1, 0) == doctest::Approx(0.0));
  }

  const int T = 10;
  envs::EnvSpec spec{envs::EnvKind::Dante, {}};
  spec.params.horizon = T;
  spec.params.epsilon = 0.05;
  const auto dante = envs::make_env(spec);
  const auto dp = make_problem(dante, c);
  const auto dtr = run_algorithm(dp, c);
  CHECK(dtr.iterates.front().policy_index == envs::kUp);
  CHECK(gap_to_profile(dp, dtr.output_policy) == doctest::Approx(0.0));
}

TEST_CASE("behavioral cloning") {
  const auto env = envs::make_tree(2, 2);
  RunConfig c;
  c.algorithm = Algorithm::BehavioralCloning;
  const auto exact = make_problem(env, c);
  CHECK(gap_to_profile(exact, run_algorithm(exact, c).output_policy) == doctest::Approx(0.0));
  c.expert_demos = 5;
  const auto p = make_problem(env, c);
  const auto tr = run_algorithm(p, c);
  CHECK(tr.stop_reason == "offline");
  CHECK(tr.iterates.size() == 1u);
  CHECK(performance_gap(*env.mdp, env.expert, tr.output_policy) == doctest::Approx(0.0));
  for (const auto& a : audit_transcript(tr, p)) CHECK(a.skipped);

  std::vector<Trajectory> demos;
  for (int k = 0; k < 3; ++k) demos.push_back(sample_trajectory(*env.mdp, env.expert, k));
  const auto cloned = run_behavioral_cloning(*env.mdp, demos, env.policy_class);
  CHECK(performance_gap(*env.mdp, env.expert, cloned) == doctest::Approx(0.0));
}

TEST_CASE("run errors") {
  const auto env = envs::make_forked_tree();
  RunConfig c;
  const auto p = make_problem(env, c);
  const std::vector<PolicySequence> experts(3, env.expert);
  const std::vector<std::vector<double>> on_r(3, std::vector<double>{1.0, 0.0});
  const auto e = stationary_errors(p, experts, on_r);
  CHECK(e.eps_rl_bar == doctest::Approx(0.0));
  CHECK(e.eps_bar == doctest::Approx(0.0));
  const std::vector<PolicySequence> wrong(2, env.policy_class[1]);
  const auto w = stationary_errors(p, wrong, std::vector<std::vector<double>>(2, {0.0, 1.0}));
  // max_f J(pi_E, f) - J(pi_1, f) = 3, over T = 2
  CHECK(w.eps_rl_bar == doctest::Approx(1.5));
  CHECK(w.eps_bar > 0.0);
  CHECK(mmdp_errors(p, env.expert).eps_bar == doctest::Approx(0.0));
}

TEST_CASE("hoeffding sample size") {
  const long m = hoeffding_sample_size(4, 4, 2, 2, 0.1, 0.1);
  CHECK(m == static_cast<long>(std::ceil(std::log(2.0 * 16 / 0.1) * 16.0 / (2 * 0.01))));
  CHECK(hoeffding_sample_size(4, 4, 4, 2, 0.1, 0.1) > m);
}

TEST_CASE("discriminator variance on the chain") {
  const int T = 6;
  const auto env = envs::make_variance_chain(T, false);
  const auto profile = exact_visitation(*env.mdp, env.expert);
  const auto v = discriminator_estimator_variance(*env.mdp, profile, env.expert, env.reward_class[0],
                                                  DiscriminatorLoss::TrajectoryLevel, 40000, 1);
  CHECK(v.samples == 40000);
  CHECK(std::abs(v.mean) < 0.1);
  CHECK(v.variance == doctest::Approx(2.0 * T).epsilon(0.05));
  CHECK_THROWS_AS(discriminator_estimator_variance(*env.mdp, profile, env.expert, env.reward_class[0],
                                                   DiscriminatorLoss::SuffixLevel, 10, 1),
                  ConfigurationError);
}
