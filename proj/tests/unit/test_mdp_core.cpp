#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "filterlab/dynamic_programming.hpp"
#include "filterlab/environments.hpp"
#include "filterlab/errors.hpp"
#include "filterlab/serialization.hpp"
#include "filterlab/simulator.hpp"

using namespace filterlab;

namespace {

TabularMdp single_state(int T) { return TabularMdp(1, 2, T, {1.0, 1.0}, {1.0}); }

double mc_value(const TabularMdp& mdp, const PolicySequence& pi, const RewardFn& f, int n, std::uint64_t seed,
                double* stderr_out) {
  Simulator sim(mdp);
  Rng root(seed);
  RewardClass cls({f});
  double mean = 0.0, m2 = 0.0;
  for (int k = 0; k < n; ++k) {
    Rng r = root.split(k);
    const double x = sim.rollout(pi, r, 0.0, &cls).suffix_return_under.at(0);
    const double d = x - mean;
    mean += d / (k + 1);
    m2 += d * (x - mean);
  }
  *stderr_out = std::sqrt(m2 / (n - 1) / n);
  return mean;
}

}  // namespace

TEST_CASE("rng splits depend only on seed and key") {
  Rng a(7), b(7);
  a.uniform();
  a.uniform();
  CHECK(a.split(3).seed() == b.split(3).seed());
  Rng c = a.split(3), d = b.split(3);
  for (int i = 0; i < 10; ++i) CHECK(c.next_u64() == d.next_u64());
  CHECK(Rng(1).split(2).seed() != Rng(1).split(3).seed());
  Rng u(4);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK((x >= 0.0 && x < 1.0));
    CHECK(u.uniform_index(5) < 5u);
  }
}

TEST_CASE("constructors reject malformed inputs") {
  CHECK_THROWS_AS(RewardFn(1, 2, {0.5, 1.5}), StructuralError);
  CHECK_NOTHROW(RewardFn(1, 2, {0.5, 1.5}, 2.0));
  CHECK_THROWS_AS(StationaryPolicy(1, 2, {0.5, 0.6}), StructuralError);
  CHECK_THROWS_AS(StationaryPolicy(1, 2, {-0.1, 1.1}), StructuralError);
  CHECK_THROWS_AS(TabularMdp(1, 2, 3, {1.0, 0.9}, {1.0}), StructuralError);
  CHECK_THROWS_AS(TabularMdp(1, 2, 3, {1.0, 1.0}, {0.5}), StructuralError);
  CHECK_THROWS_AS(RewardClass(std::vector<RewardFn>{}), ConfigurationError);
  CHECK_THROWS_AS(VisitationProfile(1, 1, 1, {0.7}), StructuralError);
  CHECK_NOTHROW(VisitationProfile(1, 1, 2, {1.0, 0.0}));
}

TEST_CASE("probabilities within tolerance are renormalized") {
  StationaryPolicy pi(1, 2, {0.5, 0.5 + 5e-10});
  CHECK(pi(0, 0) + pi(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("exact value on the Forked Tree") {
  const auto env = envs::make_forked_tree();
  const auto& r = env.reward_class[0];
  CHECK(exact_policy_value(*env.mdp, env.expert, r) == 2.0);
  CHECK(exact_policy_value(*env.mdp, env.policy_class[1], r) == 0.0);
  CHECK(exact_policy_value(*env.mdp, env.policy_class[1], r) - exact_policy_value(*env.mdp, env.expert, r) == -2.0);
  CHECK(exact_policy_value(*env.mdp, env.expert, RewardFn::zeros(13, 3)) == 0.0);
}

TEST_CASE("policy and mdp shapes must agree") {
  const auto env = envs::make_forked_tree();
  const auto short_pi = PolicySequence::stationary(StationaryPolicy::uniform(13, 3), 1);
  CHECK_THROWS_AS(exact_policy_value(*env.mdp, short_pi, env.reward_class[0]), StructuralError);
  CHECK_THROWS_AS(exact_visitation(*env.mdp, short_pi), StructuralError);
}

TEST_CASE("visitation of deterministic examples") {
  SUBCASE("single state") {
    const auto mdp = single_state(4);
    const auto pi = PolicySequence::stationary(StationaryPolicy::deterministic(2, {1}), 4);
    const auto occ = exact_visitation(mdp, pi);
    for (int t = 1; t <= 4; ++t) CHECK(occ(t, 0, 1) == 1.0);
  }
  SUBCASE("cliff expert walks the path") {
    const auto env = envs::make_cliff(5);
    const auto occ = exact_visitation(*env.mdp, env.expert);
    for (int t = 1; t <= 5; ++t) CHECK(occ(t, t - 1, 0) == 1.0);
  }
  SUBCASE("dante expert stays in the center row") {
    const auto env = envs::make_dante(6);
    const auto occ = exact_visitation(*env.mdp, env.expert);
    for (int t = 1; t <= 6; ++t) CHECK(occ(t, envs::dante_state(1, t - 1), envs::kStraight) == 1.0);
  }
}

TEST_CASE("occupancy properties on random MDPs") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto env = envs::make_random_mdp(3 + seed % 6, 2 + seed % 2, 1 + seed % 6, 3, seed);
    const auto& mdp = *env.mdp;
    const int S = mdp.num_states(), A = mdp.num_actions(), T = mdp.horizon();
    const auto pi = env.policy_class.front();
    const auto occ = exact_visitation(mdp, pi);
    for (int t = 1; t < T; ++t)
      for (int sp = 0; sp < S; ++sp) {
        double flow = 0.0;
        for (int s = 0; s < S; ++s)
          for (int a = 0; a < A; ++a) flow += occ(t, s, a) * mdp.next(t, s, a)[sp];
        double mass = 0.0;
        for (int a = 0; a < A; ++a) mass += occ(t + 1, sp, a);
        CHECK(mass == doctest::Approx(flow).epsilon(1e-9));
      }
    const auto& f1 = env.reward_class[0];
    const auto& f2 = env.reward_class[1];
    CHECK(occ.expected(f1) == doctest::Approx(exact_policy_value(mdp, pi, f1)).epsilon(1e-9));
    for (double alpha : {0.0, 0.25, 0.5, 1.0}) {
      const std::vector<double> w{alpha, 1.0 - alpha};
      const RewardFn mixed = mix_rewards(env.reward_class.members().subspan(0, 2), w);
      CHECK(exact_policy_value(mdp, pi, mixed) ==
            doctest::Approx(alpha * exact_policy_value(mdp, pi, f1) + (1 - alpha) * exact_policy_value(mdp, pi, f2))
                .epsilon(1e-9));
    }
  }
}

TEST_CASE("Monte Carlo returns agree with exact values") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto env = envs::make_random_mdp(6, 3, 5, 2, 40 + seed);
    const auto pi = env.policy_class.front();
    double se = 0.0;
    const double mc = mc_value(*env.mdp, pi, env.reward_class[0], 100000, seed, &se);
    const double exact = exact_policy_value(*env.mdp, pi, env.reward_class[0]);
    CHECK(std::abs(mc - exact) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("sampled trajectories") {
  SUBCASE("same seed gives the same trajectory") {
    const auto env = envs::make_random_mdp(5, 2, 4, 2, 3);
    CHECK(sample_trajectory(*env.mdp, env.expert, 11) == sample_trajectory(*env.mdp, env.expert, 11));
  }
  SUBCASE("deterministic policy stays on the visitation support") {
    const auto env = envs::make_cliff(4);
    const auto tr = sample_trajectory(*env.mdp, env.expert, 1);
    REQUIRE(tr.steps.size() == 4u);
    for (const auto& st : tr.steps) CHECK(st.state == st.t - 1);
  }
  SUBCASE("a_2 at s_0 falls into the absorbing state") {
    const auto env = envs::make_cliff(5);
    const auto tr = sample_trajectory(*env.mdp, envs::cliff_adversarial_policy(5, 1.0), 2);
    for (std::size_t k = 1; k < tr.steps.size(); ++k) CHECK(tr.steps[k].state == 6);
  }
  SUBCASE("full tremble gives uniform actions") {
    const auto env = envs::make_cliff(2);
    long count = 0;
    const int n = 10000;
    for (int k = 0; k < n; ++k) count += sample_trajectory(*env.mdp, env.expert, k, 1.0).steps[0].action;
    const double sd = std::sqrt(n * 0.25);
    CHECK(std::abs(count - n / 2.0) <= 3 * sd);
  }
  SUBCASE("tremble outside [0,1] is rejected") {
    const auto env = envs::make_cliff(2);
    CHECK_THROWS_AS(sample_trajectory(*env.mdp, env.expert, 0, 1.5), ConfigurationError);
  }
}

TEST_CASE("reset rollouts") {
  const auto ft = envs::make_forked_tree();
  SUBCASE("forked tree root, left, then pi_1") {
    const auto tr = reset_rollout(*ft.mdp, 1, 0, 0, ft.policy_class[1], 5, &ft.reward_class);
    REQUIRE(tr.reset_point.has_value());
    CHECK(tr.reset_point->first == 1);
    CHECK(tr.steps.front().action == 0);
    CHECK(tr.suffix_return_under.at(0) == 2.0);
  }
  SUBCASE("reset at the horizon is one step") {
    const auto tr = reset_rollout(*ft.mdp, 2, 1, 1, ft.expert, 5);
    CHECK(tr.steps.size() == 1u);
  }
  SUBCASE("out of range reset") { CHECK_THROWS_AS(reset_rollout(*ft.mdp, 3, 0, 0, ft.expert, 1), StructuralError); }
  SUBCASE("cliff a_2 then always a_1 returns -T") {
    const auto cliff = envs::make_cliff(6);
    const auto tr = reset_rollout(*cliff.mdp, 1, 0, 1, cliff.expert, 9, &cliff.reward_class);
    CHECK(tr.suffix_return_under.at(0) == -6.0);
  }
  SUBCASE("reset values match Q in expectation") {
    const auto env = envs::make_random_mdp(4, 2, 4, 2, 8);
    const auto pi = env.policy_class.front();
    const auto q = evaluate_policy(*env.mdp, pi, env.reward_class[0]);
    const auto occ = exact_visitation(*env.mdp, pi);
    const int t = 2;
    std::vector<double> joint;
    for (int s = 0; s < 4; ++s)
      for (int a = 0; a < 2; ++a) joint.push_back(occ(t, s, a));
    double expect = 0.0;
    for (int s = 0; s < 4; ++s)
      for (int a = 0; a < 2; ++a) expect += occ(t, s, a) * q.q(t, s, a);
    Rng rng(3);
    double mean = 0.0, m2 = 0.0;
    const int n = 50000;
    for (int k = 0; k < n; ++k) {
      const auto sa = rng.categorical(joint);
      const double x = reset_rollout(*env.mdp, t, sa / 2, sa % 2, pi, k, &env.reward_class).suffix_return_under.at(0);
      const double d = x - mean;
      mean += d / (k + 1);
      m2 += d * (x - mean);
    }
    CHECK(std::abs(mean - expect) <= 3 * std::sqrt(m2 / (n - 1) / n));
  }
}

TEST_CASE("performance gap") {
  const auto cliff = envs::make_cliff(10);
  CHECK(performance_gap(*cliff.mdp, cliff.expert, cliff.expert) == 0.0);
  CHECK(performance_gap(*cliff.mdp, cliff.expert, envs::cliff_adversarial_policy(10, 0.01 * 10)) ==
        doctest::Approx(1.0).epsilon(1e-12));
  const int T = 10;
  const double eps = 0.05;
  const auto dante = envs::make_dante(T);
  const auto bc = envs::dante_with_suffix(T, eps, envs::dante_constant(T, envs::kStraight));
  CHECK(performance_gap(*dante.mdp, dante.expert, bc) == doctest::Approx(eps * T * (T - 1)).epsilon(1e-12));
  const TabularMdp no_reward = single_state(2);
  const auto pi = PolicySequence::stationary(StationaryPolicy::uniform(1, 2), 2);
  CHECK_THROWS_AS(performance_gap(no_reward, pi, pi), ConfigurationError);
}

TEST_CASE("empirical expert visitation") {
  const auto ft = envs::make_forked_tree();
  std::vector<Trajectory> demos;
  for (int k = 0; k < 25; ++k) demos.push_back(sample_trajectory(*ft.mdp, ft.expert, k));
  const auto prof = empirical_expert_visitation(demos, 13, 3, 2);
  CHECK(prof(1, 0, 0) == doctest::Approx(1.0));
  CHECK(prof(2, 1, 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(empirical_expert_visitation({}, 13, 3, 2), ConfigurationError);

  const auto mixed = mix_policies(std::vector<PolicySequence>{ft.policy_class[1], ft.policy_class[2]},
                                  std::vector<double>{0.5, 0.5});
  std::vector<Trajectory> half;
  const int n = 4000;
  for (int k = 0; k < n; ++k) half.push_back(sample_trajectory(*ft.mdp, mixed, 100 + k));
  const auto p = empirical_expert_visitation(half, 13, 3, 2);
  const double sd = std::sqrt(0.25 / n);
  CHECK(std::abs(p(1, 0, 1) - 0.5) <= 3 * sd);
  CHECK(std::abs(p(1, 0, 2) - 0.5) <= 3 * sd);
}

TEST_CASE("json round trips") {
  const auto env = envs::make_random_mdp(3, 2, 3, 2, 5);
  const Json doc = mdp_to_json(*env.mdp);
  CHECK(doc.contains("num_states"));
  CHECK(doc.contains("transitions"));
  CHECK(mdp_from_json(doc) == *env.mdp);
  CHECK(policy_from_json(policy_to_json(env.expert)) == env.expert);
  const auto ft = envs::make_forked_tree();
  CHECK(mdp_from_json(mdp_to_json(*ft.mdp)) == *ft.mdp);

  std::vector<Trajectory> trajs{sample_trajectory(*env.mdp, env.expert, 1, 0.0, &env.reward_class),
                                reset_rollout(*env.mdp, 2, 1, 0, env.expert, 2, &env.reward_class)};
  std::stringstream buf;
  write_trajectories(buf, trajs);
  CHECK(read_trajectories(buf) == trajs);
  CHECK_THROWS_AS(mdp_from_json(Json::parse(R"({"num_states": 1})")), StructuralError);
}

TEST_CASE("atomic file writes") {
  const auto dir = std::filesystem::temp_directory_path() / "filterlab_unit_io";
  std::filesystem::remove_all(dir);
  const std::string path = (dir / "nested" / "a.txt").string();
  write_file_atomic(path, "hello\n");
  CHECK(read_file(path) == "hello\n");
  write_file_atomic(path, "again\n");
  CHECK(read_file(path) == "again\n");
  CHECK_THROWS_AS(read_file((dir / "missing").string()), IoError);
  std::filesystem::remove_all(dir);
}
