#include "filterlab/variance.hpp"

#include "filterlab/dynamic_programming.hpp"
#include "filterlab/errors.hpp"

namespace filterlab::irl {

namespace {

/// Sum of f over `steps` learner steps starting at (t, s); stops at the horizon.
double learner_sum(const TabularMdp& mdp, const PolicySequence& policy, const RewardFn& f, int t, int s, int steps,
                   Rng& rng) {
  double total = 0.0;
  for (int k = 0; k < steps && t <= mdp.horizon(); ++k, ++t) {
    const int a = static_cast<int>(rng.categorical(policy.at(t).row(s)));
    total += f(s, a);
    if (t < mdp.horizon()) s = static_cast<int>(rng.categorical(mdp.next(t, s, a)));
  }
  return total;
}

}  // namespace

VarianceEstimate discriminator_estimator_variance(const TabularMdp& mdp, const VisitationProfile& expert_profile,
                                                  const PolicySequence& policy, const RewardFn& f,
                                                  DiscriminatorLoss mode, long samples, std::uint64_t seed) {
  if (samples < 1000) throw ConfigurationError("samples: need at least 1000");
  check_policy_shape(mdp, policy);
  check_reward_shape(mdp, f);
  const int T = mdp.horizon();
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  if (expert_profile.horizon() != T || expert_profile.num_states() != S || expert_profile.num_actions() != A)
    throw StructuralError("expert profile does not match the mdp");
  std::vector<std::vector<double>> joint(T), states(T);
  for (int t = 1; t <= T; ++t) {
    if (!expert_profile.covered(t)) throw ConfigurationError("expert occupancy has no mass at timestep " + std::to_string(t));
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) joint[t - 1].push_back(expert_profile(t, s, a));
    states[t - 1] = expert_profile.state_marginal(t);
  }
  const Rng root(seed);
  double mean = 0.0, m2 = 0.0;
  for (long n = 0; n < samples; ++n) {
    Rng rng = root.split(static_cast<std::uint64_t>(n));
    double x = 0.0;
    for (int t = 1; t <= T; ++t) {
      const std::size_t sa = rng.categorical(joint[t - 1]);
      const int s = static_cast<int>(sa) / A;
      const int a = static_cast<int>(sa) % A;
      if (mode == DiscriminatorLoss::TrajectoryLevel) {
        const int s1 = static_cast<int>(rng.categorical(mdp.start_dist()));
        // learner state at t, then its reward there
        int cur = s1;
        for (int tau = 1; tau < t; ++tau) {
          const int b = static_cast<int>(rng.categorical(policy.at(tau).row(cur)));
          cur = static_cast<int>(rng.categorical(mdp.next(tau, cur, b)));
        }
        x += learner_sum(mdp, policy, f, t, cur, 1, rng) - f(s, a);
      } else {
        double first = 0.0;
        if (t < T) {
          const int next = static_cast<int>(rng.categorical(mdp.next(t, s, a)));
          first = learner_sum(mdp, policy, f, t + 1, next, T - t, rng);
        }
        const int s2 = static_cast<int>(rng.categorical(states[t - 1]));
        x += first - learner_sum(mdp, policy, f, t, s2, T - t + 1, rng);
      }
    }
    // Welford
    const double delta = x - mean;
    mean += delta / (n + 1);
    m2 += delta * (x - mean);
  }
  return {mean, m2 / (samples - 1), samples};
}

}  // namespace filterlab::irl
