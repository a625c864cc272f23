#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace filterlab {

inline constexpr double kProbTolerance = 1e-9;

/// Reward over (state, action). Values must lie in [-bound, bound]; bound is 1
/// unless a construction declares otherwise.
class RewardFn {
 public:
  RewardFn() = default;
  RewardFn(int num_states, int num_actions, std::vector<double> values, double bound = 1.0);
  static RewardFn zeros(int num_states, int num_actions);

  double operator()(int s, int a) const { return values_[static_cast<std::size_t>(s) * num_actions_ + a]; }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  double bound() const { return bound_; }
  std::span<const double> values() const { return values_; }
  bool operator==(const RewardFn&) const = default;

 private:
  int num_states_ = 0;
  int num_actions_ = 0;
  double bound_ = 1.0;
  std::vector<double> values_;
};

/// Weighted combination of class members (weights need not be normalized).
RewardFn mix_rewards(std::span<const RewardFn> members, std::span<const double> weights);

class RewardClass {
 public:
  RewardClass() = default;
  explicit RewardClass(std::vector<RewardFn> members, std::vector<std::string> labels = {});

  std::size_t size() const { return members_.size(); }
  const RewardFn& operator[](std::size_t i) const { return members_.at(i); }
  std::span<const RewardFn> members() const { return members_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  double max_bound() const;
  /// Index of a member equal to f within tol, if any.
  std::optional<std::size_t> find(const RewardFn& f, double tol = 1e-12) const;

 private:
  std::vector<RewardFn> members_;
  std::vector<std::string> labels_;
};

class StationaryPolicy {
 public:
  StationaryPolicy() = default;
  StationaryPolicy(int num_states, int num_actions, std::vector<double> probs);
  static StationaryPolicy uniform(int num_states, int num_actions);
  static StationaryPolicy deterministic(int num_actions, const std::vector<int>& actions);

  double operator()(int s, int a) const { return probs_[static_cast<std::size_t>(s) * num_actions_ + a]; }
  std::span<const double> row(int s) const {
    return std::span<const double>(probs_).subspan(static_cast<std::size_t>(s) * num_actions_, num_actions_);
  }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  std::span<const double> probs() const { return probs_; }
  bool operator==(const StationaryPolicy&) const = default;

 private:
  int num_states_ = 0;
  int num_actions_ = 0;
  std::vector<double> probs_;
};

/// Time-indexed policy, timesteps 1..T.
class PolicySequence {
 public:
  PolicySequence() = default;
  explicit PolicySequence(std::vector<StationaryPolicy> per_step);
  static PolicySequence stationary(const StationaryPolicy& pi, int horizon);

  const StationaryPolicy& at(int t) const { return steps_.at(static_cast<std::size_t>(t - 1)); }
  void set(int t, StationaryPolicy pi);
  int horizon() const { return static_cast<int>(steps_.size()); }
  int num_states() const { return steps_.empty() ? 0 : steps_.front().num_states(); }
  int num_actions() const { return steps_.empty() ? 0 : steps_.front().num_actions(); }
  bool operator==(const PolicySequence&) const = default;

 private:
  std::vector<StationaryPolicy> steps_;
};

/// Convex combination of policy sequences, timestep by timestep.
PolicySequence mix_policies(std::span<const PolicySequence> members, std::span<const double> weights);
/// Per-step, per-state argmax (lowest index on ties).
PolicySequence greedy_decode(const PolicySequence& policy);

/// Per-timestep state-action occupancy. A timestep is either a distribution or
/// entirely zero (not covered, e.g. demos that never reach it).
class VisitationProfile {
 public:
  VisitationProfile() = default;
  VisitationProfile(int num_states, int num_actions, int horizon, std::vector<double> mass);

  double operator()(int t, int s, int a) const { return mass_[index(t, s, a)]; }
  std::vector<double> state_marginal(int t) const;
  /// pi(a|s) implied by the profile at t; uniform where the state has no mass.
  StationaryPolicy conditional_policy(int t) const;
  double total(int t) const;
  bool covered(int t) const { return total(t) > 0.5; }
  double expected(const RewardFn& f) const;
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int horizon() const { return horizon_; }
  std::span<const double> mass() const { return mass_; }

 private:
  std::size_t index(int t, int s, int a) const {
    return (static_cast<std::size_t>(t - 1) * num_states_ + s) * num_actions_ + a;
  }
  int num_states_ = 0;
  int num_actions_ = 0;
  int horizon_ = 0;
  std::vector<double> mass_;
};

class TabularMdp {
 public:
  /// transitions holds either one layer (time-homogeneous) or horizon layers,
  /// each laid out [s][a][s'].
  TabularMdp(int num_states, int num_actions, int horizon, std::vector<double> transitions,
             std::vector<double> start_dist, std::optional<RewardFn> true_reward = std::nullopt);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int horizon() const { return horizon_; }
  bool time_homogeneous() const { return layers_ == 1; }
  std::span<const double> next(int t, int s, int a) const;
  std::span<const double> start_dist() const { return start_; }
  const std::optional<RewardFn>& true_reward() const { return true_reward_; }
  const RewardFn& require_true_reward() const;
  std::span<const double> transitions() const { return transitions_; }
  bool operator==(const TabularMdp&) const = default;

 private:
  int num_states_;
  int num_actions_;
  int horizon_;
  int layers_;
  std::vector<double> transitions_;
  std::vector<double> start_;
  std::optional<RewardFn> true_reward_;
};

struct Step {
  int t = 0;
  int state = 0;
  int action = 0;
  bool operator==(const Step&) const = default;
};

struct Trajectory {
  std::vector<Step> steps;
  std::optional<std::pair<int, int>> reset_point;
  std::map<std::size_t, double> suffix_return_under;
  bool operator==(const Trajectory&) const = default;
};

void check_policy_shape(const TabularMdp& mdp, const PolicySequence& policy);
void check_reward_shape(const TabularMdp& mdp, const RewardFn& f);

}  // namespace filterlab
