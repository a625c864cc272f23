#include "filterlab/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "filterlab/errors.hpp"

namespace filterlab {
namespace {

void normalize_distribution(std::span<double> p, const std::string& what) {
  double total = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) throw StructuralError(what + ": negative or non-finite probability");
    total += v;
  }
  if (std::abs(total - 1.0) > kProbTolerance)
    throw StructuralError(what + ": probabilities sum to " + std::to_string(total));
  // already normalized up to rounding: leave untouched so reconstruction is exact
  if (std::abs(total - 1.0) <= 1e-14) return;
  for (double& v : p) v /= total;
}

}  // namespace

RewardFn::RewardFn(int num_states, int num_actions, std::vector<double> values, double bound)
    : num_states_(num_states), num_actions_(num_actions), bound_(bound), values_(std::move(values)) {
  if (num_states <= 0 || num_actions <= 0) throw StructuralError("reward: dimensions must be positive");
  if (values_.size() != static_cast<std::size_t>(num_states) * num_actions)
    throw StructuralError("reward: expected " + std::to_string(num_states * num_actions) + " values");
  if (!(bound > 0.0)) throw StructuralError("reward: bound must be positive");
  for (double v : values_)
    if (!std::isfinite(v) || std::abs(v) > bound_ + 1e-12)
      throw StructuralError("reward: value " + std::to_string(v) + " outside [-bound, bound]");
}

RewardFn RewardFn::zeros(int num_states, int num_actions) {
  return RewardFn(num_states, num_actions, std::vector<double>(static_cast<std::size_t>(num_states) * num_actions, 0.0));
}

RewardFn mix_rewards(std::span<const RewardFn> members, std::span<const double> weights) {
  if (members.empty() || members.size() != weights.size()) throw StructuralError("mix_rewards: size mismatch");
  const RewardFn& first = members.front();
  std::vector<double> out(first.values().size(), 0.0);
  double bound = 0.0;
  for (std::size_t k = 0; k < members.size(); ++k) {
    if (members[k].values().size() != out.size()) throw StructuralError("mix_rewards: shape mismatch");
    bound = std::max(bound, members[k].bound());
    if (weights[k] == 0.0) continue;
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += weights[k] * members[k].values()[j];
  }
  double wsum = 0.0;
  for (double w : weights) wsum += std::abs(w);
  return RewardFn(first.num_states(), first.num_actions(), std::move(out), bound * std::max(1.0, wsum));
}

RewardClass::RewardClass(std::vector<RewardFn> members, std::vector<std::string> labels)
    : members_(std::move(members)), labels_(std::move(labels)) {
  if (members_.empty()) throw ConfigurationError("reward class is empty");
  for (const auto& m : members_)
    if (m.num_states() != members_.front().num_states() || m.num_actions() != members_.front().num_actions())
      throw StructuralError("reward class members differ in shape");
  if (labels_.empty())
    for (std::size_t i = 0; i < members_.size(); ++i) labels_.push_back("f" + std::to_string(i));
  if (labels_.size() != members_.size()) throw StructuralError("reward class labels do not match members");
}

double RewardClass::max_bound() const {
  double b = 0.0;
  for (const auto& m : members_) b = std::max(b, m.bound());
  return b;
}

std::optional<std::size_t> RewardClass::find(const RewardFn& f, double tol) const {
  for (std::size_t i = 0; i < members_.size(); ++i) {
    const auto a = members_[i].values();
    const auto b = f.values();
    if (a.size() != b.size()) continue;
    bool same = true;
    for (std::size_t j = 0; j < a.size() && same; ++j) same = std::abs(a[j] - b[j]) <= tol;
    if (same) return i;
  }
  return std::nullopt;
}

StationaryPolicy::StationaryPolicy(int num_states, int num_actions, std::vector<double> probs)
    : num_states_(num_states), num_actions_(num_actions), probs_(std::move(probs)) {
  if (num_states <= 0 || num_actions <= 0) throw StructuralError("policy: dimensions must be positive");
  if (probs_.size() != static_cast<std::size_t>(num_states) * num_actions)
    throw StructuralError("policy: expected " + std::to_string(num_states * num_actions) + " entries");
  for (int s = 0; s < num_states; ++s)
    normalize_distribution(std::span<double>(probs_).subspan(static_cast<std::size_t>(s) * num_actions, num_actions),
                           "policy row " + std::to_string(s));
}

StationaryPolicy StationaryPolicy::uniform(int num_states, int num_actions) {
  return StationaryPolicy(num_states, num_actions,
                          std::vector<double>(static_cast<std::size_t>(num_states) * num_actions, 1.0 / num_actions));
}

StationaryPolicy StationaryPolicy::deterministic(int num_actions, const std::vector<int>& actions) {
  std::vector<double> p(actions.size() * num_actions, 0.0);
  for (std::size_t s = 0; s < actions.size(); ++s) {
    if (actions[s] < 0 || actions[s] >= num_actions) throw StructuralError("policy: action index out of range");
    p[s * num_actions + actions[s]] = 1.0;
  }
  return StationaryPolicy(static_cast<int>(actions.size()), num_actions, std::move(p));
}

PolicySequence::PolicySequence(std::vector<StationaryPolicy> per_step) : steps_(std::move(per_step)) {
  if (steps_.empty()) throw StructuralError("policy sequence is empty");
  for (const auto& p : steps_)
    if (p.num_states() != steps_.front().num_states() || p.num_actions() != steps_.front().num_actions())
      throw StructuralError("policy sequence steps differ in shape");
}

PolicySequence PolicySequence::stationary(const StationaryPolicy& pi, int horizon) {
  if (horizon <= 0) throw StructuralError("horizon must be positive");
  return PolicySequence(std::vector<StationaryPolicy>(static_cast<std::size_t>(horizon), pi));
}

void PolicySequence::set(int t, StationaryPolicy pi) {
  if (t < 1 || t > horizon()) throw StructuralError("timestep " + std::to_string(t) + " out of range");
  if (pi.num_states() != num_states() || pi.num_actions() != num_actions())
    throw StructuralError("policy step has the wrong shape");
  steps_[static_cast<std::size_t>(t - 1)] = std::move(pi);
}

PolicySequence mix_policies(std::span<const PolicySequence> members, std::span<const double> weights) {
  if (members.empty() || members.size() != weights.size()) throw StructuralError("mix_policies: size mismatch");
  const int T = members.front().horizon();
  const int S = members.front().num_states();
  const int A = members.front().num_actions();
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  std::vector<StationaryPolicy> steps;
  for (int t = 1; t <= T; ++t) {
    std::vector<double> p(static_cast<std::size_t>(S) * A, 0.0);
    for (std::size_t k = 0; k < members.size(); ++k) {
      if (members[k].horizon() != T) throw StructuralError("mix_policies: horizon mismatch");
      if (weights[k] == 0.0) continue;
      const auto src = members[k].at(t).probs();
      for (std::size_t j = 0; j < p.size(); ++j) p[j] += weights[k] / wsum * src[j];
    }
    steps.emplace_back(S, A, std::move(p));
  }
  return PolicySequence(std::move(steps));
}

PolicySequence greedy_decode(const PolicySequence& policy) {
  std::vector<StationaryPolicy> steps;
  for (int t = 1; t <= policy.horizon(); ++t) {
    const auto& pi = policy.at(t);
    std::vector<int> actions(pi.num_states());
    for (int s = 0; s < pi.num_states(); ++s) {
      const auto row = pi.row(s);
      actions[s] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    steps.push_back(StationaryPolicy::deterministic(pi.num_actions(), actions));
  }
  return PolicySequence(std::move(steps));
}

VisitationProfile::VisitationProfile(int num_states, int num_actions, int horizon, std::vector<double> mass)
    : num_states_(num_states), num_actions_(num_actions), horizon_(horizon), mass_(std::move(mass)) {
  if (num_states <= 0 || num_actions <= 0 || horizon <= 0) throw StructuralError("profile: dimensions must be positive");
  const std::size_t per = static_cast<std::size_t>(num_states) * num_actions;
  if (mass_.size() != per * horizon) throw StructuralError("profile: wrong number of entries");
  for (int t = 1; t <= horizon; ++t) {
    double total = 0.0;
    for (std::size_t j = 0; j < per; ++j) {
      const double v = mass_[(t - 1) * per + j];
      if (!std::isfinite(v) || v < 0.0) throw StructuralError("profile: negative or non-finite mass");
      total += v;
    }
    if (total != 0.0 && std::abs(total - 1.0) > 1e-8)
      throw StructuralError("profile: timestep " + std::to_string(t) + " sums to " + std::to_string(total));
  }
}

std::vector<double> VisitationProfile::state_marginal(int t) const {
  std::vector<double> out(num_states_, 0.0);
  for (int s = 0; s < num_states_; ++s)
    for (int a = 0; a < num_actions_; ++a) out[s] += (*this)(t, s, a);
  return out;
}

StationaryPolicy VisitationProfile::conditional_policy(int t) const {
  std::vector<double> p(static_cast<std::size_t>(num_states_) * num_actions_);
  for (int s = 0; s < num_states_; ++s) {
    double row = 0.0;
    for (int a = 0; a < num_actions_; ++a) row += (*this)(t, s, a);
    for (int a = 0; a < num_actions_; ++a)
      p[static_cast<std::size_t>(s) * num_actions_ + a] = row > 0.0 ? (*this)(t, s, a) / row : 1.0 / num_actions_;
  }
  return StationaryPolicy(num_states_, num_actions_, std::move(p));
}

double VisitationProfile::total(int t) const {
  double total = 0.0;
  const std::size_t per = static_cast<std::size_t>(num_states_) * num_actions_;
  for (std::size_t j = 0; j < per; ++j) total += mass_[(t - 1) * per + j];
  return total;
}

double VisitationProfile::expected(const RewardFn& f) const {
  if (f.num_states() != num_states_ || f.num_actions() != num_actions_)
    throw StructuralError("profile and reward differ in shape");
  const auto vals = f.values();
  const std::size_t per = vals.size();
  double total = 0.0;
  for (int t = 0; t < horizon_; ++t)
    for (std::size_t j = 0; j < per; ++j) total += mass_[t * per + j] * vals[j];
  return total;
}

TabularMdp::TabularMdp(int num_states, int num_actions, int horizon, std::vector<double> transitions,
                       std::vector<double> start_dist, std::optional<RewardFn> true_reward)
    : num_states_(num_states),
      num_actions_(num_actions),
      horizon_(horizon),
      layers_(1),
      transitions_(std::move(transitions)),
      start_(std::move(start_dist)),
      true_reward_(std::move(true_reward)) {
  if (num_states <= 0 || num_actions <= 0 || horizon <= 0) throw StructuralError("mdp: dimensions must be positive");
  const std::size_t layer = static_cast<std::size_t>(num_states) * num_actions * num_states;
  if (transitions_.size() == layer)
    layers_ = 1;
  else if (transitions_.size() == layer * horizon)
    layers_ = horizon;
  else
    throw StructuralError("mdp: transition tensor has " + std::to_string(transitions_.size()) + " entries");
  for (std::size_t row = 0; row < transitions_.size() / num_states; ++row)
    normalize_distribution(std::span<double>(transitions_).subspan(row * num_states, num_states),
                           "transition row " + std::to_string(row));
  if (start_.size() != static_cast<std::size_t>(num_states)) throw StructuralError("mdp: start_dist has wrong length");
  normalize_distribution(start_, "start_dist");
  if (true_reward_) check_reward_shape(*this, *true_reward_);
}

std::span<const double> TabularMdp::next(int t, int s, int a) const {
  const std::size_t layer = layers_ == 1 ? 0 : static_cast<std::size_t>(t - 1);
  const std::size_t offset = ((layer * num_states_ + s) * num_actions_ + a) * num_states_;
  return std::span<const double>(transitions_).subspan(offset, num_states_);
}

const RewardFn& TabularMdp::require_true_reward() const {
  if (!true_reward_) throw ConfigurationError("mdp has no true_reward");
  return *true_reward_;
}

void check_policy_shape(const TabularMdp& mdp, const PolicySequence& policy) {
  if (policy.horizon() != mdp.horizon())
    throw StructuralError("policy horizon " + std::to_string(policy.horizon()) + " != mdp horizon " +
                          std::to_string(mdp.horizon()));
  if (policy.num_states() != mdp.num_states() || policy.num_actions() != mdp.num_actions())
    throw StructuralError("policy shape does not match mdp");
}

void check_reward_shape(const TabularMdp& mdp, const RewardFn& f) {
  if (f.num_states() != mdp.num_states() || f.num_actions() != mdp.num_actions())
    throw StructuralError("reward shape does not match mdp");
}

}  // namespace filterlab
