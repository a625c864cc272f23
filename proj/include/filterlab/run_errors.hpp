#pragma once

#include <string>
#include <vector>

#include "filterlab/irl.hpp"

namespace filterlab::irl {

/// Regrets recomputed by exact DP. For stationary algorithms, with
/// L_i(pi, f) = (1/T) sum_t E_{s~rho_E^t, a~pi} Q^{pi_i}_{t,f}(s,a):
///   eps_i   = (1/T)(L_i(pi*, f_i) - L_i(pi_i, f_i)),   pi* best in hindsight over the class
///   delta_i = (1/T)(G_i(f*) - G_i(f_i)),                 G_i(f) = L_i(pi_E, f) - L_i(pi_i, f)
///   eps_rl  = (1/(NT)) sum_i max_f (J(pi_E, f) - J(pi_i, f)).
/// For an MMDP policy sequence eps_t is the step-t game loss against the best f.
struct RunErrors {
  double eps_bar = 0.0;
  double delta_bar = 0.0;
  double eps_rl_bar = 0.0;
  std::vector<double> eps;
  std::vector<double> delta;
};

/// policies[i] is the rollout policy of round i; reward_weights[i] the adversary's
/// (possibly mixed) choice over the reward class. An empty policy class means
/// best-in-hindsight over all Markov policies.
RunErrors stationary_errors(const Problem& problem, const std::vector<PolicySequence>& policies,
                            const std::vector<std::vector<double>>& reward_weights);

RunErrors mmdp_errors(const Problem& problem, const PolicySequence& policy);

RunErrors compute_run_errors(const RunTranscript& transcript, const Problem& problem);

/// Policy of an iterate, resolving class indices.
const PolicySequence& iterate_policy(const IterateRecord& record, const Problem& problem);

/// J(pi_E, r) - J(pi, r), with the expert side taken from the expert profile.
double gap_to_profile(const Problem& problem, const PolicySequence& policy);

struct BoundAudit {
  std::string kind;  // eps_t2, min_iterate, mixture, filter_min, irl
  double gap = 0.0;
  double bound = 0.0;
  bool holds = true;
  bool skipped = false;
  std::string note;
};

/// Checks the upper bounds that apply to the transcript's algorithm.
std::vector<BoundAudit> audit_transcript(const RunTranscript& transcript, const Problem& problem);

bool true_reward_in_class(const Problem& problem);
/// Some class member agrees with the expert's conditional policy wherever the expert has mass.
bool expert_in_class(const Problem& problem);

}  // namespace filterlab::irl
