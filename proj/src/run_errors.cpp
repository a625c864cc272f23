#include "filterlab/run_errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "filterlab/dynamic_programming.hpp"
#include "filterlab/errors.hpp"

namespace filterlab::irl {

namespace {

/// Per-round payoff tables shared by the error and audit computations.
struct RoundTables {
  // pol[i][k][j] = L_i(pi_k, f_j); empty when the policy class is empty
  std::vector<std::vector<std::vector<double>>> pol;
  std::vector<std::vector<double>> expert;  // L_i(pi_E, f_j)
  std::vector<std::vector<double>> self;    // L_i(pi_i, f_j)
  std::vector<std::vector<double>> moment;  // J(pi_E, f_j) - J(pi_i, f_j)
  // sum over f of w_ij Q_ij, per round, for the unrestricted best response
  std::vector<std::vector<double>> weighted_q;
};

double expert_payoff(const VisitationProfile& profile, const ValueTables& q) {
  double total = 0.0;
  for (int t = 1; t <= profile.horizon(); ++t)
    for (int s = 0; s < profile.num_states(); ++s)
      for (int a = 0; a < profile.num_actions(); ++a) {
        const double m = profile(t, s, a);
        if (m != 0.0) total += m * q.q(t, s, a);
      }
  return total / profile.horizon();
}

RoundTables build_tables(const Problem& problem, const std::vector<PolicySequence>& policies,
                         const std::vector<std::vector<double>>& reward_weights) {
  const TabularMdp& mdp = *problem.mdp;
  const int T = mdp.horizon();
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const std::size_t K = problem.reward_class.size();
  const StateDistributions rollin = state_marginals(problem.expert_profile);
  RoundTables tab;
  std::vector<double> expert_j;
  for (std::size_t j = 0; j < K; ++j) expert_j.push_back(problem.expert_profile.expected(problem.reward_class[j]));
  for (std::size_t i = 0; i < policies.size(); ++i) {
    const auto& w = reward_weights.at(i);
    if (w.size() != K) throw StructuralError("reward weights do not match the reward class");
    std::vector<std::vector<double>> pol(problem.policy_class.size(), std::vector<double>(K));
    std::vector<double> ex(K), self(K), mom(K);
    std::vector<double> wq(static_cast<std::size_t>(T) * S * A, 0.0);
    for (std::size_t j = 0; j < K; ++j) {
      const ValueTables q = evaluate_policy(mdp, policies[i], problem.reward_class[j]);
      ex[j] = expert_payoff(problem.expert_profile, q);
      self[j] = reset_payoff(rollin, policies[i], q);
      for (std::size_t k = 0; k < problem.policy_class.size(); ++k)
        pol[k][j] = reset_payoff(rollin, problem.policy_class[k], q);
      double start = 0.0;
      for (int s = 0; s < S; ++s) start += mdp.start_dist()[s] * q.v(1, s);
      mom[j] = expert_j[j] - start;
      if (problem.policy_class.empty() && w[j] != 0.0)
        for (int t = 1; t <= T; ++t)
          for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) wq[(static_cast<std::size_t>(t - 1) * S + s) * A + a] += w[j] * q.q(t, s, a);
    }
    tab.pol.push_back(std::move(pol));
    tab.expert.push_back(std::move(ex));
    tab.self.push_back(std::move(self));
    tab.moment.push_back(std::move(mom));
    if (problem.policy_class.empty()) tab.weighted_q.push_back(std::move(wq));
  }
  return tab;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct PrefixErrors {
  std::vector<double> eps_bar;     // indexed by prefix length - 1
  std::vector<double> delta_bar;
  std::vector<double> eps_rl_bar;
  std::vector<double> eps;         // full-run per-round values
  std::vector<double> delta;
};

PrefixErrors prefix_errors(const Problem& problem, const RoundTables& tab,
                           const std::vector<std::vector<double>>& reward_weights) {
  const TabularMdp& mdp = *problem.mdp;
  const int T = mdp.horizon();
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const std::size_t N = tab.self.size();
  const std::size_t P = problem.policy_class.size();
  const std::size_t K = problem.reward_class.size();
  const StateDistributions rollin = state_marginals(problem.expert_profile);
  PrefixErrors out;
  std::vector<double> cum_pol(P, 0.0), cum_g(K, 0.0), wq(static_cast<std::size_t>(T) * S * A, 0.0);
  double cum_self = 0.0, cum_gchosen = 0.0, cum_rl = 0.0;
  std::vector<double> self_i(N), gchosen_i(N);
  for (std::size_t i = 0; i < N; ++i) {
    const auto& w = reward_weights[i];
    self_i[i] = dot(tab.self[i], w);
    cum_self += self_i[i];
    for (std::size_t k = 0; k < P; ++k) cum_pol[k] += dot(tab.pol[i][k], w);
    for (std::size_t j = 0; j < K; ++j) cum_g[j] += tab.expert[i][j] - tab.self[i][j];
    gchosen_i[i] = dot(tab.expert[i], w) - self_i[i];
    cum_gchosen += gchosen_i[i];
    cum_rl += *std::max_element(tab.moment[i].begin(), tab.moment[i].end());
    double best;
    if (P > 0) {
      best = *std::max_element(cum_pol.begin(), cum_pol.end());
    } else {
      for (std::size_t x = 0; x < wq.size(); ++x) wq[x] += tab.weighted_q[i][x];
      best = 0.0;
      for (int t = 1; t <= T; ++t)
        for (int s = 0; s < S; ++s) {
          if (rollin[t - 1][s] == 0.0) continue;
          double m = -INFINITY;
          for (int a = 0; a < A; ++a) m = std::max(m, wq[(static_cast<std::size_t>(t - 1) * S + s) * A + a]);
          best += rollin[t - 1][s] * m;
        }
      best /= T;
    }
    const double n = static_cast<double>(i + 1);
    out.eps_bar.push_back((best - cum_self) / (T * n));
    out.delta_bar.push_back((*std::max_element(cum_g.begin(), cum_g.end()) - cum_gchosen) / (T * n));
    out.eps_rl_bar.push_back(cum_rl / (T * n));
  }
  // per-round values against the full-run comparators
  std::size_t fstar = 0;
  for (std::size_t j = 1; j < K; ++j)
    if (cum_g[j] > cum_g[fstar] + 1e-12) fstar = j;
  for (std::size_t i = 0; i < N; ++i) {
    double best_i;
    if (P > 0) {
      std::size_t kstar = 0;
      for (std::size_t k = 1; k < P; ++k)
        if (cum_pol[k] > cum_pol[kstar] + 1e-12) kstar = k;
      best_i = dot(tab.pol[i][kstar], reward_weights[i]);
    } else {
      best_i = 0.0;
      for (int t = 1; t <= T; ++t)
        for (int s = 0; s < S; ++s) {
          if (rollin[t - 1][s] == 0.0) continue;
          int astar = 0;
          for (int a = 1; a < A; ++a)
            if (wq[(static_cast<std::size_t>(t - 1) * S + s) * A + a] > wq[(static_cast<std::size_t>(t - 1) * S + s) * A + astar])
              astar = a;
          best_i += rollin[t - 1][s] * tab.weighted_q[i][(static_cast<std::size_t>(t - 1) * S + s) * A + astar];
        }
      best_i /= T;
    }
    out.eps.push_back((best_i - self_i[i]) / T);
    out.delta.push_back((tab.expert[i][fstar] - tab.self[i][fstar] - gchosen_i[i]) / T);
  }
  return out;
}

std::vector<double> iterate_weights(const IterateRecord& rec, std::size_t K) {
  if (rec.reward_weights.size() == K) return rec.reward_weights;
  std::vector<double> w(K, 0.0);
  w.at(static_cast<std::size_t>(rec.reward_index)) = 1.0;
  return w;
}

bool is_mmdp_like(const std::string& algorithm) { return algorithm == "mmdp" || algorithm == "bc"; }

}  // namespace

RunErrors stationary_errors(const Problem& problem, const std::vector<PolicySequence>& policies,
                            const std::vector<std::vector<double>>& reward_weights) {
  if (policies.empty()) throw ConfigurationError("no iterates to score");
  if (policies.size() != reward_weights.size()) throw StructuralError("one reward weighting per policy is required");
  const RoundTables tab = build_tables(problem, policies, reward_weights);
  const PrefixErrors pre = prefix_errors(problem, tab, reward_weights);
  RunErrors out;
  out.eps_bar = pre.eps_bar.back();
  out.delta_bar = pre.delta_bar.back();
  out.eps_rl_bar = pre.eps_rl_bar.back();
  out.eps = pre.eps;
  out.delta = pre.delta;
  return out;
}

RunErrors mmdp_errors(const Problem& problem, const PolicySequence& policy) {
  const TabularMdp& mdp = *problem.mdp;
  check_policy_shape(mdp, policy);
  const int T = mdp.horizon();
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const std::size_t K = problem.reward_class.size();
  std::vector<ValueTables> qs;
  for (std::size_t j = 0; j < K; ++j) qs.push_back(evaluate_policy(mdp, policy, problem.reward_class[j]));
  RunErrors out;
  for (int t = 1; t <= T; ++t) {
    const std::vector<double> d = problem.expert_profile.state_marginal(t);
    double worst = -INFINITY;
    for (std::size_t j = 0; j < K; ++j) {
      double diff = 0.0;
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
          diff += (problem.expert_profile(t, s, a) - d[s] * policy.at(t)(s, a)) * qs[j].q(t, s, a);
      worst = std::max(worst, diff / T);
    }
    out.eps.push_back(worst);
    out.delta.push_back(0.0);
    out.eps_bar += worst / T;
  }
  double rl = -INFINITY;
  for (std::size_t j = 0; j < K; ++j) {
    double start = 0.0;
    for (int s = 0; s < S; ++s) start += mdp.start_dist()[s] * qs[j].v(1, s);
    rl = std::max(rl, problem.expert_profile.expected(problem.reward_class[j]) - start);
  }
  out.eps_rl_bar = rl / T;
  return out;
}

const PolicySequence& iterate_policy(const IterateRecord& record, const Problem& problem) {
  if (record.policy_index >= 0 && record.policy.horizon() == 0) {
    if (record.policy_index >= static_cast<int>(problem.policy_class.size()))
      throw StructuralError("iterate policy index outside the class");
    return problem.policy_class[record.policy_index];
  }
  return record.policy;
}

RunErrors compute_run_errors(const RunTranscript& transcript, const Problem& problem) {
  if (transcript.iterates.empty()) throw ConfigurationError("transcript has no iterates");
  if (is_mmdp_like(transcript.algorithm)) {
    RunErrors e = mmdp_errors(problem, transcript.output_policy);
    // one record per solved timestep; report its step loss
    const RunErrors per_t = e;
    e.eps.clear();
    e.delta.clear();
    for (const auto& it : transcript.iterates) {
      e.eps.push_back(it.timestep > 0 ? per_t.eps[it.timestep - 1] : e.eps_bar);
      e.delta.push_back(0.0);
    }
    return e;
  }
  std::vector<PolicySequence> policies;
  std::vector<std::vector<double>> weights;
  for (const auto& it : transcript.iterates) {
    policies.push_back(iterate_policy(it, problem));
    weights.push_back(iterate_weights(it, problem.reward_class.size()));
  }
  return stationary_errors(problem, policies, weights);
}

double gap_to_profile(const Problem& problem, const PolicySequence& policy) {
  const RewardFn& r = problem.mdp->require_true_reward();
  return problem.expert_profile.expected(r) - exact_policy_value(*problem.mdp, policy, r);
}

bool true_reward_in_class(const Problem& problem) {
  const auto& r = problem.mdp->true_reward();
  return r && problem.reward_class.find(*r, 1e-9).has_value();
}

bool expert_in_class(const Problem& problem) {
  const int T = problem.mdp->horizon();
  for (const auto& pi : problem.policy_class) {
    bool match = true;
    for (int t = 1; t <= T && match; ++t) {
      const auto d = problem.expert_profile.state_marginal(t);
      const StationaryPolicy cond = problem.expert_profile.conditional_policy(t);
      for (int s = 0; s < problem.mdp->num_states() && match; ++s) {
        if (d[s] <= 0.0) continue;
        for (int a = 0; a < problem.mdp->num_actions(); ++a)
          if (std::abs(cond(s, a) - pi.at(t)(s, a)) > 1e-9) {
            match = false;
            break;
          }
      }
    }
    if (match) return true;
  }
  return false;
}

std::vector<BoundAudit> audit_transcript(const RunTranscript& transcript, const Problem& problem) {
  std::vector<BoundAudit> audits;
  if (transcript.iterates.empty()) return audits;
  const double T = problem.mdp->horizon();
  const double T2 = T * T;
  const std::string& algo = transcript.algorithm;
  const bool r_in = true_reward_in_class(problem);
  const bool empirical = transcript.config.expert_demos > 0;

  auto skipped = [&](const std::string& kind, const std::string& why) {
    BoundAudit a;
    a.kind = kind;
    a.skipped = true;
    a.note = why;
    audits.push_back(a);
  };
  auto record = [&](const std::string& kind, double gap, double bound) {
    BoundAudit a;
    a.kind = kind;
    a.gap = gap;
    a.bound = bound;
    a.holds = gap <= bound + 1e-6;
    audits.push_back(a);
  };

  if (!r_in) {
    skipped(is_mmdp_like(algo) ? "eps_t2" : "bounds", "true reward not in the reward class");
    return audits;
  }
  if (empirical) {
    skipped(is_mmdp_like(algo) ? "eps_t2" : "bounds", "expert occupancy is empirical");
    return audits;
  }

  if (is_mmdp_like(algo)) {
    const RunErrors e = mmdp_errors(problem, transcript.output_policy);
    record("eps_t2", gap_to_profile(problem, transcript.output_policy), e.eps_bar * T2);
    return audits;
  }

  std::vector<PolicySequence> policies;
  std::vector<std::vector<double>> weights;
  std::vector<double> gaps;
  for (const auto& it : transcript.iterates) {
    policies.push_back(iterate_policy(it, problem));
    weights.push_back(iterate_weights(it, problem.reward_class.size()));
    gaps.push_back(gap_to_profile(problem, policies.back()));
  }
  const RoundTables tab = build_tables(problem, policies, weights);
  const PrefixErrors pre = prefix_errors(problem, tab, weights);
  const std::size_t N = gaps.size();
  const double min_gap = *std::min_element(gaps.begin(), gaps.end());
  double mean_gap = 0.0;
  for (double g : gaps) mean_gap += g / N;
  const bool eps_ok = !problem.policy_class.empty() ? expert_in_class(problem) : true;
  const double eps_bar = pre.eps_bar.back();
  const double delta_bar = pre.delta_bar.back();
  const double eps_rl = pre.eps_rl_bar.back();

  if (algo == "dual_irl" || algo == "primal_irl") {
    record("irl", min_gap, eps_rl * T);
  } else if (algo == "nrmm_br") {
    if (eps_ok)
      record("min_iterate", min_gap, (eps_bar + std::max(delta_bar, 0.0)) * T2);
    else
      skipped("min_iterate", "expert not in the policy class");
  } else if (algo == "nrmm_nr" || algo == "nrmm_dual") {
    if (eps_ok)
      record("mixture", mean_gap, (eps_bar + delta_bar) * T2);
    else
      skipped("mixture", "expert not in the policy class");
  } else if (algo == "filter") {
    double running_min = INFINITY;
    BoundAudit worst;
    worst.kind = "filter_min";
    double worst_slack = INFINITY;
    for (std::size_t n = 0; n < N; ++n) {
      running_min = std::min(running_min, gaps[n]);
      double bound = pre.eps_rl_bar[n] * T;
      if (eps_ok) bound = std::min(bound, (pre.eps_bar[n] + std::max(pre.delta_bar[n], 0.0)) * T2);
      const double slack = bound - running_min;
      if (slack < worst_slack) {
        worst_slack = slack;
        worst.gap = running_min;
        worst.bound = bound;
        std::ostringstream note;
        note << "tightest at round " << n + 1;
        worst.note = note.str();
      }
    }
    worst.holds = worst.gap <= worst.bound + 1e-6;
    audits.push_back(worst);
  }
  return audits;
}

}  // namespace filterlab::irl
