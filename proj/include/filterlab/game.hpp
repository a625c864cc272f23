#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "filterlab/mdp.hpp"

namespace filterlab::game {

inline constexpr double kTieTolerance = 1e-9;

class SimplexWeights {
 public:
  SimplexWeights() = default;
  explicit SimplexWeights(std::vector<double> weights);
  static SimplexWeights uniform(std::size_t n);
  static SimplexWeights point(std::size_t n, std::size_t i);

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_.at(i); }
  std::span<const double> values() const { return w_; }
  /// Lowest index among the maximal weights.
  std::size_t argmax() const;

 private:
  std::vector<double> w_;
};

/// Index of the largest entry; entries within kTieTolerance (scaled) of the max
/// count as ties and go to the lowest index.
std::size_t argmax_lowest(std::span<const double> values);

enum class LearnerAlgorithm { FTRL, MultiplicativeWeights, OnlineGradientDescent };
enum class StepSchedule { Constant, InverseSqrt };

std::string to_string(LearnerAlgorithm algo);
LearnerAlgorithm learner_from_string(const std::string& name);

struct OnlineLearnerState {
  LearnerAlgorithm algorithm = LearnerAlgorithm::MultiplicativeWeights;
  std::vector<double> cumulative_payoffs;
  std::vector<double> point;  // current iterate; the OGD state
  double step_size = 0.1;
  StepSchedule schedule = StepSchedule::Constant;
  int round = 0;
};

/// sqrt(8 ln K / N) when a round budget is declared, otherwise 0.1.
double default_step_size(std::size_t strategies, std::optional<int> rounds = std::nullopt);

/// MW uses a constant step by default; FTRL and OGD shrink it as 1/sqrt(round).
OnlineLearnerState make_learner(LearnerAlgorithm algo, std::size_t strategies, double step_size);
OnlineLearnerState make_learner(LearnerAlgorithm algo, std::size_t strategies, double step_size, StepSchedule schedule);

SimplexWeights current_weights(const OnlineLearnerState& state);
/// Deterministic decode of the learner: argmax of cumulative payoff (MW, FTRL) or of the OGD point.
std::size_t greedy_choice(const OnlineLearnerState& state);

std::pair<OnlineLearnerState, SimplexWeights> no_regret_step(const OnlineLearnerState& state,
                                                             std::span<const double> payoff_vector);

std::vector<double> project_to_simplex(std::span<const double> v);

/// Row player maximizes, column player minimizes.
class PayoffMatrix {
 public:
  PayoffMatrix() = default;
  PayoffMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  explicit PayoffMatrix(const std::vector<std::vector<double>>& rows);
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct MatrixGameSolution {
  SimplexWeights row;
  SimplexWeights col;
  double gap = 0.0;
  int rounds = 0;
  bool converged = false;
};

/// max_i (A y)_i - min_j (x^T A)_j
double duality_gap(const PayoffMatrix& payoff, const SimplexWeights& row, const SimplexWeights& col);

/// MW-vs-MW self-play on averaged strategies; returns the best pair seen. A pure
/// saddle point, when one exists, is returned immediately with gap 0.
MatrixGameSolution solve_matrix_game(const PayoffMatrix& payoff, double epsilon, int max_rounds);

struct RewardChoice {
  std::size_t index;
  double value;
};

/// argmax_f sum_t E_{rho_E}[f] - E_{rho_pi}[f], lowest index on ties.
RewardChoice best_response_reward(const VisitationProfile& learner_profile, const VisitationProfile& expert_profile,
                                  const RewardClass& reward_class);

/// Soft value iteration: maximizes J(pi, f) + temperature * H(pi).
PolicySequence soft_best_response_policy(const TabularMdp& mdp, const RewardFn& f, double temperature);

}  // namespace filterlab::game
