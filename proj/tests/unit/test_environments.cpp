#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "filterlab/dynamic_programming.hpp"
#include "filterlab/environments.hpp"
#include "filterlab/errors.hpp"

using namespace filterlab;
using namespace filterlab::envs;

namespace {

double value(const EnvBundle& env, const PolicySequence& pi) {
  return exact_policy_value(*env.mdp, pi, env.mdp->require_true_reward());
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

}  // namespace

TEST_CASE("tree") {
  const auto env = make_tree(2, 3);
  CHECK(env.mdp->num_states() == 15);
  CHECK(env.reward_class.size() == 8u);
  CHECK(env.policy_class.size() == 8u);
  CHECK(env.policy_labels.back() == "path000");
  CHECK(env.expert == env.policy_class.back());
  CHECK(value(env, env.expert) == 1.0);
  for (std::size_t k = 0; k + 1 < env.policy_class.size(); ++k) CHECK(value(env, env.policy_class[k]) == 0.0);
  // each path policy is optimal for its own leaf reward
  for (std::size_t k = 0; k < env.policy_class.size(); ++k) {
    const std::size_t leaf = env.policy_class.size() - 1 - k;
    CHECK(exact_policy_value(*env.mdp, env.policy_class[k], env.reward_class[leaf]) == 1.0);
  }
  CHECK(config_error([] { make_tree(3, 5); }).rfind("env.size_cap", 0) == 0);
  CHECK_NOTHROW(make_tree(3, 5, 243));
  CHECK(config_error([] { make_tree(1, 2); }).rfind("env.branching", 0) == 0);
}

TEST_CASE("cliff") {
  const int T = 8;
  const auto env = make_cliff(T);
  CHECK(env.mdp->num_states() == T + 2);
  CHECK(value(env, env.expert) == 0.0);
  CHECK(value(env, env.policy_class[0]) == -T);
  CHECK(value(env, env.policy_class[1]) == doctest::Approx(-T / 2.0));
  for (double p : {0.0, 0.125, 0.5, 1.0}) CHECK(value(env, cliff_adversarial_policy(T, p)) == doctest::Approx(-p * T));
  CHECK_THROWS_AS(cliff_adversarial_policy(T, 1.5), ConfigurationError);
  CHECK(config_error([] { make_cliff(1); }).rfind("env.horizon", 0) == 0);
}

TEST_CASE("dante") {
  const int T = 10;
  const auto env = make_dante(T);
  CHECK(env.mdp->num_states() == 3 * T);
  CHECK(value(env, env.expert) == T);
  CHECK(value(env, env.policy_class[kUp]) == T);
  CHECK(value(env, env.policy_class[kDown]) == 0.0);
  CHECK(dante_state(2, 4) == 14);

  const double eps = 0.05;
  const auto suffix = dante_erring_suffix(T, eps);
  CHECK(suffix.size() == static_cast<std::size_t>(T - 1));
  CHECK(suffix.at(2)(dante_state(1, 1), kDown) == doctest::Approx(eps * T));
  CHECK(value(env, dante_with_suffix(T, eps, dante_constant(T, kStraight))) == doctest::Approx(T - eps * T * (T - 1)));
  // going up at t=1 keeps the down-step inside the rewarded rows
  CHECK(value(env, dante_with_suffix(T, eps, dante_constant(T, kUp))) == doctest::Approx(T));
  CHECK_THROWS_AS(dante_erring_suffix(T, 0.2), ConfigurationError);

  EnvSpec spec{EnvKind::Dante, {}};
  spec.params.horizon = T;
  spec.params.epsilon = eps;
  const auto pinned = make_env(spec);
  CHECK(pinned.pinned.size() == static_cast<std::size_t>(T - 1));
  spec.params.horizon = 2;
  CHECK(config_error([&] { validate(spec); }).rfind("env.horizon", 0) == 0);
}

TEST_CASE("forked tree tables") {
  const auto env = make_forked_tree();
  CHECK(env.policy_labels == std::vector<std::string>{"pi_E", "pi_1", "pi_2"});
  CHECK(env.reward_class.label(1) == "r~");
  CHECK(env.reward_class.max_bound() == 4.0);
  const auto got = forked_tree_tables(env);
  const auto want = forked_tree_expected_tables();
  CHECK(got.gap == want.gap);
  CHECK(got.reset_pi1 == want.reset_pi1);
  CHECK(got.reset_pi2 == want.reset_pi2);
  CHECK(got.reset_expert == want.reset_expert);

  EnvSpec spec{EnvKind::ForkedTree, {}};
  spec.params.suffix = 2;
  const auto pinned = make_env(spec);
  REQUIRE(pinned.pinned.count(2) == 1);
  CHECK(pinned.pinned.at(2) == env.policy_class[2].at(2));
  spec.params.suffix = 3;
  CHECK_THROWS_AS(make_env(spec), ConfigurationError);
}

TEST_CASE("random grid") {
  const auto a = make_random_grid(4, 3, 5, 0.1, 9, 3);
  const auto b = make_random_grid(4, 3, 5, 0.1, 9, 3);
  CHECK(*a.mdp == *b.mdp);
  CHECK(a.reward_class.size() == 3u);
  CHECK(a.policy_class.size() == 3u);
  CHECK(value(a, a.expert) == doctest::Approx(optimal_policy(*a.mdp, a.reward_class[0]).value));
  CHECK_THROWS_AS(make_random_grid(30, 30, 5, 0.1, 1), ConfigurationError);
  CHECK_THROWS_AS(make_random_grid(4, 4, 5, 1.0, 1), ConfigurationError);
}

TEST_CASE("random mdp") {
  const auto a = make_random_mdp(5, 3, 4, 4, 21);
  CHECK(*a.mdp == *make_random_mdp(5, 3, 4, 4, 21).mdp);
  CHECK_FALSE(*a.mdp == *make_random_mdp(5, 3, 4, 4, 22).mdp);
  CHECK(a.reward_class.label(0) == "r");
  CHECK(a.policy_labels.back() == "expert");
  CHECK(a.policy_class.size() == 4u);
  const double best = optimal_policy(*a.mdp, a.reward_class[0]).value;
  CHECK(value(a, a.expert) == doctest::Approx(best));
  for (const auto& pi : a.policy_class) CHECK(value(a, pi) <= best + 1e-12);
  for (std::size_t k = 0; k < a.reward_class.size(); ++k)
    for (double v : a.reward_class[k].values()) CHECK((v >= -1.0 && v <= 1.0));
}

TEST_CASE("variance chain") {
  const auto iid = make_variance_chain(6, false);
  const auto dep = make_variance_chain(6, true);
  CHECK(value(iid, iid.expert) == doctest::Approx(0.0));
  CHECK(value(dep, dep.expert) == doctest::Approx(0.0));
  CHECK(iid.mdp->next(1, 0, 0)[1] == 0.5);
  CHECK(dep.mdp->next(1, 0, 0)[1] == 0.0);
}

TEST_CASE("env specs") {
  const auto spec = parse_env_spec("tree:branching=3,horizon=2");
  CHECK(spec.kind == EnvKind::Tree);
  CHECK(spec.params.branching == 3);
  CHECK(label(spec) == "tree(A=3;T=2)");
  CHECK(env_spec_from_json(to_json(spec)) == spec);
  CHECK(parse_env_spec("chain:horizon=4,dependent=true").params.dependent);
  CHECK(make_env(parse_env_spec("random_mdp:num_states=3,seed=5")).mdp->num_states() == 3);

  CHECK(config_error([] { parse_env_spec("maze"); }).rfind("env.kind", 0) == 0);
  CHECK(config_error([] { parse_env_spec("tree:depth=3"); }).rfind("env.depth", 0) == 0);
  CHECK(config_error([] { parse_env_spec("tree:horizon=3x"); }).rfind("env.horizon", 0) == 0);
  CHECK(config_error([] { parse_env_spec("chain:dependent=maybe"); }).rfind("env.dependent", 0) == 0);
  CHECK(config_error([] { parse_env_spec("tree:horizon"); }) != "");
  for (EnvKind k : {EnvKind::Tree, EnvKind::Cliff, EnvKind::Dante, EnvKind::ForkedTree, EnvKind::RandomGrid,
                    EnvKind::RandomMdp, EnvKind::Chain})
    CHECK(env_kind_from_string(to_string(k)) == k);
}
