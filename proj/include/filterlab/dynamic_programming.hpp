#pragma once

#include <vector>

#include "filterlab/mdp.hpp"

namespace filterlab {

/// Q_t(s,a) for t in 1..T and V_t(s) for t in 1..T+1 (V_{T+1} = 0).
class ValueTables {
 public:
  ValueTables(int num_states, int num_actions, int horizon);
  double q(int t, int s, int a) const { return q_[qi(t, s, a)]; }
  double& q(int t, int s, int a) { return q_[qi(t, s, a)]; }
  double v(int t, int s) const { return v_[static_cast<std::size_t>(t - 1) * num_states_ + s]; }
  double& v(int t, int s) { return v_[static_cast<std::size_t>(t - 1) * num_states_ + s]; }
  int horizon() const { return horizon_; }

 private:
  std::size_t qi(int t, int s, int a) const {
    return (static_cast<std::size_t>(t - 1) * num_states_ + s) * num_actions_ + a;
  }
  int num_states_;
  int num_actions_;
  int horizon_;
  std::vector<double> q_;
  std::vector<double> v_;
};

/// Backward recursion for Q^pi_f and V^pi_f.
ValueTables evaluate_policy(const TabularMdp& mdp, const PolicySequence& policy, const RewardFn& f);

double exact_policy_value(const TabularMdp& mdp, const PolicySequence& policy, const RewardFn& f);

VisitationProfile exact_visitation(const TabularMdp& mdp, const PolicySequence& policy);

/// J(expert, r) - J(learner, r) under the mdp's true reward.
double performance_gap(const TabularMdp& mdp, const PolicySequence& expert, const PolicySequence& learner);

struct OptimalSolution {
  PolicySequence policy;
  ValueTables values;
  double value;
};

/// Hard backward value iteration; ties go to the lowest action index.
OptimalSolution optimal_policy(const TabularMdp& mdp, const RewardFn& f);

/// Per-timestep state distributions d_t (t = 1..T), e.g. expert state marginals.
using StateDistributions = std::vector<std::vector<double>>;

StateDistributions state_marginals(const VisitationProfile& profile);

/// (1/T) sum_t E_{s ~ d_t} E_{a ~ policy_t(.|s)} Q^{continuation}_{t,f}(s,a).
double reset_payoff(const StateDistributions& rollin, const PolicySequence& policy, const ValueTables& continuation_q);

double reset_payoff(const TabularMdp& mdp, const StateDistributions& rollin, const PolicySequence& policy,
                    const PolicySequence& continuation, const RewardFn& f);

}  // namespace filterlab
