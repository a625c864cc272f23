#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "filterlab/dynamic_programming.hpp"
#include "filterlab/environments.hpp"
#include "filterlab/errors.hpp"
#include "filterlab/game.hpp"
#include "filterlab/rng.hpp"

using namespace filterlab;
using namespace filterlab::game;

TEST_CASE("argmax breaks ties toward the lowest index") {
  CHECK(argmax_lowest(std::vector<double>{1.0, 3.0, 3.0}) == 1u);
  CHECK(argmax_lowest(std::vector<double>{2.0, 2.0 - 1e-12, 1.0}) == 0u);
  CHECK(argmax_lowest(std::vector<double>{2.0 - 1e-12, 2.0}) == 0u);
  CHECK(argmax_lowest(std::vector<double>{0.0, 1e-6}) == 1u);
  CHECK_THROWS_AS(argmax_lowest(std::vector<double>{}), StructuralError);
  CHECK(SimplexWeights(std::vector<double>{0.25, 0.5, 0.25}).argmax() == 1u);
}

TEST_CASE("simplex weights") {
  CHECK_THROWS_AS(SimplexWeights(std::vector<double>{}), StructuralError);
  CHECK_THROWS_AS(SimplexWeights(std::vector<double>{0.5, 0.6}), StructuralError);
  CHECK_THROWS_AS(SimplexWeights(std::vector<double>{1.5, -0.5}), StructuralError);
  CHECK(SimplexWeights::point(3, 2)[2] == 1.0);
  CHECK(SimplexWeights::uniform(4)[3] == 0.25);
}

TEST_CASE("simplex projection") {
  const auto p = project_to_simplex(std::vector<double>{0.2, 0.3, 0.5});
  CHECK(p[0] == doctest::Approx(0.2));
  CHECK(p[2] == doctest::Approx(0.5));
  const auto q = project_to_simplex(std::vector<double>{2.0, 0.0, -1.0});
  CHECK(q == std::vector<double>{1.0, 0.0, 0.0});
  Rng rng(5);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> v(5);
    for (auto& x : v) x = 4.0 * rng.uniform() - 2.0;
    const auto w = project_to_simplex(v);
    CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0));
    for (double x : w) CHECK(x >= 0.0);
  }
}

TEST_CASE("learner construction and names") {
  CHECK(learner_from_string("ftrl") == LearnerAlgorithm::FTRL);
  CHECK(learner_from_string(to_string(LearnerAlgorithm::OnlineGradientDescent)) ==
        LearnerAlgorithm::OnlineGradientDescent);
  CHECK_THROWS_AS(learner_from_string("hedge"), ConfigurationError);
  CHECK_THROWS_AS(make_learner(LearnerAlgorithm::FTRL, 3, 0.0), ConfigurationError);
  CHECK_THROWS_AS(make_learner(LearnerAlgorithm::FTRL, 0, 0.1), ConfigurationError);
  CHECK(default_step_size(4) == 0.1);
  CHECK(default_step_size(4, 50) == doctest::Approx(std::sqrt(8.0 * std::log(4.0) / 50)));
  const auto mw = make_learner(LearnerAlgorithm::MultiplicativeWeights, 3, 0.5);
  CHECK(mw.schedule == StepSchedule::Constant);
  CHECK(current_weights(mw)[0] == doctest::Approx(1.0 / 3));
  CHECK_THROWS_AS(no_regret_step(mw, std::vector<double>{1.0, 2.0}), StructuralError);
  CHECK_THROWS_AS(no_regret_step(mw, std::vector<double>{1.0, NAN, 0.0}), StructuralError);
}

TEST_CASE("multiplicative weights update") {
  auto s = make_learner(LearnerAlgorithm::MultiplicativeWeights, 2, 1.0);
  auto [next, w] = no_regret_step(s, std::vector<double>{1.0, 0.0});
  CHECK(w[0] == doctest::Approx(std::exp(1.0) / (1.0 + std::exp(1.0))));
  CHECK(greedy_choice(next) == 0u);
  auto [after, w2] = no_regret_step(next, std::vector<double>{0.0, 2.0});
  CHECK(greedy_choice(after) == 1u);
  CHECK(w2[1] == doctest::Approx(std::exp(2.0) / (std::exp(1.0) + std::exp(2.0))));
}

TEST_CASE("no-regret learners have sublinear regret") {
  const int N = 2000;
  const std::size_t K = 5;
  for (auto algo : {LearnerAlgorithm::MultiplicativeWeights, LearnerAlgorithm::FTRL,
                    LearnerAlgorithm::OnlineGradientDescent}) {
    CAPTURE(to_string(algo));
    const double eta = algo == LearnerAlgorithm::MultiplicativeWeights ? default_step_size(K, N)
                       : algo == LearnerAlgorithm::FTRL               ? std::sqrt(8.0 * std::log(double(K)))
                                                                      : 1.0;
    auto s = make_learner(algo, K, eta);
    Rng rng(17);
    std::vector<double> totals(K, 0.0);
    double earned = 0.0;
    for (int n = 0; n < N; ++n) {
      const auto w = current_weights(s);
      std::vector<double> g(K);
      for (std::size_t i = 0; i < K; ++i) g[i] = rng.uniform() * (i == 3 ? 1.0 : 0.8);
      for (std::size_t i = 0; i < K; ++i) {
        earned += w[i] * g[i];
        totals[i] += g[i];
      }
      s = no_regret_step(s, g).first;
    }
    const double regret = *std::max_element(totals.begin(), totals.end()) - earned;
    CHECK(regret <= std::sqrt(N * std::log(double(K)) / 2.0) * 3.0);
    CHECK(regret / N < 0.05);
    CHECK(greedy_choice(s) == 3u);
  }
}

TEST_CASE("matrix games") {
  SUBCASE("pure saddle point") {
    const PayoffMatrix A({{3, 1}, {4, 2}});
    const auto sol = solve_matrix_game(A, 1e-6, 100);
    CHECK(sol.converged);
    CHECK(sol.rounds == 0);
    CHECK(sol.row[1] == 1.0);
    CHECK(sol.col[1] == 1.0);
    CHECK(sol.gap == 0.0);
  }
  SUBCASE("matching pennies") {
    const PayoffMatrix A({{1, -1}, {-1, 1}});
    const auto sol = solve_matrix_game(A, 0.01, 20000);
    CHECK(sol.converged);
    CHECK(sol.gap <= 0.01);
    CHECK(sol.row[0] == doctest::Approx(0.5).epsilon(0.01));
  }
  SUBCASE("rock paper scissors") {
    const PayoffMatrix A({{0, -1, 1}, {1, 0, -1}, {-1, 1, 0}});
    const auto sol = solve_matrix_game(A, 0.02, 20000);
    CHECK(sol.converged);
    CHECK(duality_gap(A, sol.row, sol.col) == doctest::Approx(sol.gap));
    CHECK(duality_gap(A, SimplexWeights::uniform(3), SimplexWeights::uniform(3)) == doctest::Approx(0.0));
    CHECK(duality_gap(A, SimplexWeights::point(3, 0), SimplexWeights::point(3, 0)) == doctest::Approx(2.0));
  }
  SUBCASE("round budget exhausted") {
    const PayoffMatrix A({{1, -1}, {-1, 1.5}});
    const auto sol = solve_matrix_game(A, 1e-9, 3);
    CHECK_FALSE(sol.converged);
    CHECK(sol.rounds == 3);
  }
  CHECK_THROWS_AS(solve_matrix_game(PayoffMatrix(1, 1, {1.0}), 0.0, 10), ConfigurationError);
  CHECK_THROWS_AS(PayoffMatrix(2, 2, {1.0, 2.0}), StructuralError);
  CHECK_THROWS_AS(PayoffMatrix(std::vector<std::vector<double>>{{1, 2}, {3}}), StructuralError);
}

TEST_CASE("best response reward") {
  const auto ft = envs::make_forked_tree();
  const auto expert = exact_visitation(*ft.mdp, ft.expert);
  const auto pi1 = exact_visitation(*ft.mdp, ft.policy_class[1]);
  const auto br = best_response_reward(pi1, expert, ft.reward_class);
  CHECK(br.index == 1u);
  CHECK(br.value == doctest::Approx(3.0));
  const auto self = best_response_reward(expert, expert, ft.reward_class);
  CHECK(self.index == 0u);
  CHECK(self.value == 0.0);
  const auto other = exact_visitation(*envs::make_cliff(2).mdp, envs::make_cliff(2).expert);
  CHECK_THROWS_AS(best_response_reward(other, expert, ft.reward_class), StructuralError);
}

TEST_CASE("soft best response") {
  const auto env = envs::make_random_mdp(5, 3, 4, 2, 12);
  const auto& r = env.reward_class[0];
  const double best = optimal_policy(*env.mdp, r).value;
  double previous = -1e9;
  for (double temp : {1.0, 0.3, 0.1, 0.01}) {
    const auto pi = soft_best_response_policy(*env.mdp, r, temp);
    const double v = exact_policy_value(*env.mdp, pi, r);
    CHECK(v <= best + 1e-12);
    CHECK(v >= best - 4 * temp * std::log(3.0) - 1e-12);
    CHECK(v >= previous - 1e-12);
    previous = v;
  }
  CHECK(greedy_decode(soft_best_response_policy(*env.mdp, r, 0.01)) == optimal_policy(*env.mdp, r).policy);
  CHECK_THROWS_AS(soft_best_response_policy(*env.mdp, r, 0.0), ConfigurationError);
}
