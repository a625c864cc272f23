#include "filterlab/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "filterlab/errors.hpp"

namespace filterlab::game {

namespace {

std::vector<double> softmax(std::span<const double> scores, double scale) {
  double top = -std::numeric_limits<double>::infinity();
  for (double s : scores) top = std::max(top, s);
  std::vector<double> w(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    w[i] = std::exp(scale * (scores[i] - top));
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

double effective_step(const OnlineLearnerState& s) {
  if (s.schedule == StepSchedule::Constant || s.round <= 0) return s.step_size;
  return s.step_size / std::sqrt(static_cast<double>(s.round));
}

}  // namespace

SimplexWeights::SimplexWeights(std::vector<double> weights) : w_(std::move(weights)) {
  if (w_.empty()) throw StructuralError("simplex weights are empty");
  double total = 0.0;
  for (double x : w_) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw StructuralError("simplex weights must be finite and nonnegative");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) throw StructuralError("simplex weights sum to " + std::to_string(total));
}

SimplexWeights SimplexWeights::uniform(std::size_t n) {
  return SimplexWeights(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

SimplexWeights SimplexWeights::point(std::size_t n, std::size_t i) {
  std::vector<double> w(n, 0.0);
  w.at(i) = 1.0;
  return SimplexWeights(std::move(w));
}

std::size_t SimplexWeights::argmax() const { return argmax_lowest(w_); }

std::size_t argmax_lowest(std::span<const double> values) {
  if (values.empty()) throw StructuralError("argmax of an empty vector");
  double top = values[0];
  for (double v : values) top = std::max(top, v);
  const double tol = kTieTolerance * std::max(1.0, std::abs(top));
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] >= top - tol) return i;
  return 0;
}

std::string to_string(LearnerAlgorithm algo) {
  switch (algo) {
    case LearnerAlgorithm::FTRL: return "ftrl";
    case LearnerAlgorithm::MultiplicativeWeights: return "mw";
    case LearnerAlgorithm::OnlineGradientDescent: return "ogd";
  }
  return "unknown";
}

LearnerAlgorithm learner_from_string(const std::string& name) {
  if (name == "ftrl") return LearnerAlgorithm::FTRL;
  if (name == "mw") return LearnerAlgorithm::MultiplicativeWeights;
  if (name == "ogd") return LearnerAlgorithm::OnlineGradientDescent;
  throw ConfigurationError("unknown no-regret learner '" + name + "' (expected ftrl, mw or ogd)");
}

double default_step_size(std::size_t strategies, std::optional<int> rounds) {
  if (!rounds || *rounds <= 0 || strategies < 2) return 0.1;
  return std::sqrt(8.0 * std::log(static_cast<double>(strategies)) / *rounds);
}

OnlineLearnerState make_learner(LearnerAlgorithm algo, std::size_t strategies, double step_size) {
  return make_learner(algo, strategies, step_size,
                      algo == LearnerAlgorithm::MultiplicativeWeights ? StepSchedule::Constant : StepSchedule::InverseSqrt);
}

OnlineLearnerState make_learner(LearnerAlgorithm algo, std::size_t strategies, double step_size, StepSchedule schedule) {
  if (strategies == 0) throw ConfigurationError("learner over an empty strategy set");
  if (!(step_size > 0.0)) throw ConfigurationError("learner step size must be positive");
  OnlineLearnerState s;
  s.algorithm = algo;
  s.cumulative_payoffs.assign(strategies, 0.0);
  s.point.assign(strategies, 1.0 / static_cast<double>(strategies));
  s.step_size = step_size;
  s.schedule = schedule;
  return s;
}

SimplexWeights current_weights(const OnlineLearnerState& state) {
  if (state.algorithm == LearnerAlgorithm::OnlineGradientDescent || state.round == 0)
    return SimplexWeights(state.point);
  return SimplexWeights(softmax(state.cumulative_payoffs, effective_step(state)));
}

std::size_t greedy_choice(const OnlineLearnerState& state) {
  if (state.algorithm == LearnerAlgorithm::OnlineGradientDescent) return argmax_lowest(state.point);
  return argmax_lowest(state.cumulative_payoffs);
}

std::pair<OnlineLearnerState, SimplexWeights> no_regret_step(const OnlineLearnerState& state,
                                                             std::span<const double> payoff_vector) {
  if (payoff_vector.size() != state.cumulative_payoffs.size())
    throw StructuralError("payoff vector has " + std::to_string(payoff_vector.size()) + " entries, learner has " +
                          std::to_string(state.cumulative_payoffs.size()));
  for (double g : payoff_vector)
    if (!std::isfinite(g)) throw StructuralError("non-finite payoff");
  OnlineLearnerState next = state;
  next.round += 1;
  for (std::size_t i = 0; i < payoff_vector.size(); ++i) next.cumulative_payoffs[i] += payoff_vector[i];
  if (next.algorithm == LearnerAlgorithm::OnlineGradientDescent) {
    const double eta = effective_step(next);
    std::vector<double> moved(next.point);
    for (std::size_t i = 0; i < moved.size(); ++i) moved[i] += eta * payoff_vector[i];
    next.point = project_to_simplex(moved);
  } else {
    next.point = softmax(next.cumulative_payoffs, effective_step(next));
  }
  SimplexWeights w(next.point);
  return {std::move(next), std::move(w)};
}

std::vector<double> project_to_simplex(std::span<const double> v) {
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double acc = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    acc += sorted[k];
    const double candidate = (acc - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) theta = candidate;
  }
  std::vector<double> out(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::max(0.0, v[i] - theta);
    total += out[i];
  }
  for (double& x : out) x /= total;
  return out;
}

PayoffMatrix::PayoffMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0 || data_.size() != rows * cols) throw StructuralError("payoff matrix shape mismatch");
  for (double x : data_)
    if (!std::isfinite(x)) throw StructuralError("payoff matrix has a non-finite entry");
}

PayoffMatrix::PayoffMatrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) throw StructuralError("payoff matrix is empty");
  std::vector<double> flat;
  for (const auto& r : rows) {
    if (r.size() != rows.front().size()) throw StructuralError("payoff matrix rows differ in length");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  *this = PayoffMatrix(rows.size(), rows.front().size(), std::move(flat));
}

double duality_gap(const PayoffMatrix& A, const SimplexWeights& x, const SimplexWeights& y) {
  double best_row = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < A.rows(); ++i) {
    double v = 0.0;
    for (std::size_t j = 0; j < A.cols(); ++j) v += A(i, j) * y[j];
    best_row = std::max(best_row, v);
  }
  double best_col = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < A.cols(); ++j) {
    double v = 0.0;
    for (std::size_t i = 0; i < A.rows(); ++i) v += A(i, j) * x[i];
    best_col = std::min(best_col, v);
  }
  return best_row - best_col;
}

MatrixGameSolution solve_matrix_game(const PayoffMatrix& A, double epsilon, int max_rounds) {
  if (!(epsilon > 0.0)) throw ConfigurationError("matrix game epsilon must be positive");
  const std::size_t m = A.rows();
  const std::size_t n = A.cols();
  // pure saddle point: maximin over rows equals minimax over columns
  {
    std::size_t best_i = 0;
    double maximin = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      double lo = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) lo = std::min(lo, A(i, j));
      if (lo > maximin) maximin = lo, best_i = i;
    }
    std::size_t best_j = 0;
    double minimax = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      double hi = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) hi = std::max(hi, A(i, j));
      if (hi < minimax) minimax = hi, best_j = j;
    }
    if (minimax - maximin <= 0.0) {
      MatrixGameSolution s{SimplexWeights::point(m, best_i), SimplexWeights::point(n, best_j), 0.0, 0, true};
      s.gap = duality_gap(A, s.row, s.col);
      return s;
    }
  }
  double range = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) range = std::max(range, std::abs(A(i, j)));
  const double log_k = std::log(static_cast<double>(std::max<std::size_t>({m, n, 2})));
  std::vector<double> row_gain(m, 0.0), col_loss(n, 0.0), row_avg(m, 0.0), col_avg(n, 0.0);
  std::vector<double> x(m, 1.0 / m), y(n, 1.0 / n);
  MatrixGameSolution best{SimplexWeights::uniform(m), SimplexWeights::uniform(n), 0.0, 0, false};
  best.gap = duality_gap(A, best.row, best.col);
  for (int k = 1; k <= max_rounds && best.gap > epsilon; ++k) {
    for (std::size_t i = 0; i < m; ++i) {
      row_avg[i] += (x[i] - row_avg[i]) / k;
      double g = 0.0;
      for (std::size_t j = 0; j < n; ++j) g += A(i, j) * y[j];
      row_gain[i] += g;
    }
    for (std::size_t j = 0; j < n; ++j) {
      col_avg[j] += (y[j] - col_avg[j]) / k;
      double l = 0.0;
      for (std::size_t i = 0; i < m; ++i) l += A(i, j) * x[i];
      col_loss[j] -= l;
    }
    const double eta = std::sqrt(8.0 * log_k / k) / range;
    x = softmax(row_gain, eta);
    y = softmax(col_loss, eta);
    auto normalized = [](std::vector<double> v) {
      double t = 0.0;
      for (double a : v) t += a;
      for (double& a : v) a /= t;
      return v;
    };
    SimplexWeights xr(normalized(row_avg)), yc(normalized(col_avg));
    const double gap = duality_gap(A, xr, yc);
    if (gap < best.gap) best = {std::move(xr), std::move(yc), gap, k, false};
    best.rounds = k;
  }
  best.converged = best.gap <= epsilon;
  return best;
}

RewardChoice best_response_reward(const VisitationProfile& learner_profile, const VisitationProfile& expert_profile,
                                  const RewardClass& reward_class) {
  if (reward_class.size() == 0) throw ConfigurationError("best_response_reward: empty reward class");
  if (learner_profile.num_states() != expert_profile.num_states() ||
      learner_profile.num_actions() != expert_profile.num_actions() ||
      learner_profile.horizon() != expert_profile.horizon())
    throw StructuralError("best_response_reward: profiles differ in shape");
  std::vector<double> values;
  for (const auto& f : reward_class.members()) values.push_back(expert_profile.expected(f) - learner_profile.expected(f));
  const std::size_t i = argmax_lowest(values);
  return {i, values[i]};
}

PolicySequence soft_best_response_policy(const TabularMdp& mdp, const RewardFn& f, double temperature) {
  if (!(temperature > 0.0)) throw ConfigurationError("temperature must be positive");
  check_reward_shape(mdp, f);
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const int T = mdp.horizon();
  std::vector<double> v_next(S, 0.0);
  std::vector<StationaryPolicy> steps(static_cast<std::size_t>(T));
  for (int t = T; t >= 1; --t) {
    std::vector<double> v(S, 0.0);
    std::vector<double> probs(static_cast<std::size_t>(S) * A);
    std::vector<double> q(A);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        double cont = 0.0;
        if (t < T) {
          const auto p = mdp.next(t, s, a);
          for (int sp = 0; sp < S; ++sp) cont += p[sp] * v_next[sp];
        }
        q[a] = f(s, a) + cont;
      }
      const double top = *std::max_element(q.begin(), q.end());
      double z = 0.0;
      for (int a = 0; a < A; ++a) z += std::exp((q[a] - top) / temperature);
      v[s] = top + temperature * std::log(z);
      for (int a = 0; a < A; ++a)
        probs[static_cast<std::size_t>(s) * A + a] = std::exp((q[a] - top) / temperature) / z;
    }
    steps[static_cast<std::size_t>(t - 1)] = StationaryPolicy(S, A, std::move(probs));
    v_next = std::move(v);
  }
  return PolicySequence(std::move(steps));
}

}  // namespace filterlab::game
