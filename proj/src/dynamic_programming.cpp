#include "filterlab/dynamic_programming.hpp"

#include "filterlab/errors.hpp"

namespace filterlab {

ValueTables::ValueTables(int num_states, int num_actions, int horizon)
    : num_states_(num_states),
      num_actions_(num_actions),
      horizon_(horizon),
      q_(static_cast<std::size_t>(horizon) * num_states * num_actions, 0.0),
      v_(static_cast<std::size_t>(horizon + 1) * num_states, 0.0) {}

namespace {

double continuation_value(const TabularMdp& mdp, const ValueTables& tables, int t, int s, int a) {
  if (t == mdp.horizon()) return 0.0;
  const auto p = mdp.next(t, s, a);
  double acc = 0.0;
  for (int sp = 0; sp < mdp.num_states(); ++sp)
    if (p[sp] != 0.0) acc += p[sp] * tables.v(t + 1, sp);
  return acc;
}

}  // namespace

ValueTables evaluate_policy(const TabularMdp& mdp, const PolicySequence& policy, const RewardFn& f) {
  check_policy_shape(mdp, policy);
  check_reward_shape(mdp, f);
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  ValueTables tables(S, A, mdp.horizon());
  for (int t = mdp.horizon(); t >= 1; --t) {
    const auto& pi = policy.at(t);
    for (int s = 0; s < S; ++s) {
      double v = 0.0;
      for (int a = 0; a < A; ++a) {
        const double q = f(s, a) + continuation_value(mdp, tables, t, s, a);
        tables.q(t, s, a) = q;
        v += pi(s, a) * q;
      }
      tables.v(t, s) = v;
    }
  }
  return tables;
}

double exact_policy_value(const TabularMdp& mdp, const PolicySequence& policy, const RewardFn& f) {
  const ValueTables tables = evaluate_policy(mdp, policy, f);
  const auto start = mdp.start_dist();
  double value = 0.0;
  for (int s = 0; s < mdp.num_states(); ++s) value += start[s] * tables.v(1, s);
  return value;
}

VisitationProfile exact_visitation(const TabularMdp& mdp, const PolicySequence& policy) {
  check_policy_shape(mdp, policy);
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const int T = mdp.horizon();
  std::vector<double> mass(static_cast<std::size_t>(T) * S * A, 0.0);
  std::vector<double> d(mdp.start_dist().begin(), mdp.start_dist().end());
  for (int t = 1; t <= T; ++t) {
    std::vector<double> next(S, 0.0);
    const auto& pi = policy.at(t);
    for (int s = 0; s < S; ++s) {
      if (d[s] == 0.0) continue;
      for (int a = 0; a < A; ++a) {
        const double m = d[s] * pi(s, a);
        mass[(static_cast<std::size_t>(t - 1) * S + s) * A + a] = m;
        if (m == 0.0 || t == T) continue;
        const auto p = mdp.next(t, s, a);
        for (int sp = 0; sp < S; ++sp) next[sp] += m * p[sp];
      }
    }
    d = std::move(next);
  }
  return VisitationProfile(S, A, T, std::move(mass));
}

double performance_gap(const TabularMdp& mdp, const PolicySequence& expert, const PolicySequence& learner) {
  const RewardFn& r = mdp.require_true_reward();
  return exact_policy_value(mdp, expert, r) - exact_policy_value(mdp, learner, r);
}

OptimalSolution optimal_policy(const TabularMdp& mdp, const RewardFn& f) {
  check_reward_shape(mdp, f);
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const int T = mdp.horizon();
  ValueTables tables(S, A, T);
  std::vector<StationaryPolicy> steps(static_cast<std::size_t>(T));
  for (int t = T; t >= 1; --t) {
    std::vector<int> actions(S, 0);
    for (int s = 0; s < S; ++s) {
      double best = 0.0;
      for (int a = 0; a < A; ++a) {
        const double q = f(s, a) + continuation_value(mdp, tables, t, s, a);
        tables.q(t, s, a) = q;
        if (a == 0 || q > best + 1e-12) {
          best = q;
          actions[s] = a;
        }
      }
      tables.v(t, s) = best;
    }
    steps[static_cast<std::size_t>(t - 1)] = StationaryPolicy::deterministic(A, actions);
  }
  double value = 0.0;
  for (int s = 0; s < S; ++s) value += mdp.start_dist()[s] * tables.v(1, s);
  return {PolicySequence(std::move(steps)), std::move(tables), value};
}

StateDistributions state_marginals(const VisitationProfile& profile) {
  StateDistributions out;
  for (int t = 1; t <= profile.horizon(); ++t) out.push_back(profile.state_marginal(t));
  return out;
}

double reset_payoff(const StateDistributions& rollin, const PolicySequence& policy, const ValueTables& continuation_q) {
  const int T = policy.horizon();
  if (static_cast<int>(rollin.size()) != T) throw StructuralError("reset_payoff: roll-in length != horizon");
  double total = 0.0;
  for (int t = 1; t <= T; ++t) {
    const auto& pi = policy.at(t);
    const auto& d = rollin[static_cast<std::size_t>(t - 1)];
    for (int s = 0; s < pi.num_states(); ++s) {
      if (d[s] == 0.0) continue;
      double inner = 0.0;
      for (int a = 0; a < pi.num_actions(); ++a) inner += pi(s, a) * continuation_q.q(t, s, a);
      total += d[s] * inner;
    }
  }
  return total / T;
}

double reset_payoff(const TabularMdp& mdp, const StateDistributions& rollin, const PolicySequence& policy,
                    const PolicySequence& continuation, const RewardFn& f) {
  check_policy_shape(mdp, policy);
  return reset_payoff(rollin, policy, evaluate_policy(mdp, continuation, f));
}

}  // namespace filterlab
