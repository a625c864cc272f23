#pragma once

#include <cstdint>

#include "filterlab/irl.hpp"

namespace filterlab::irl {

struct VarianceEstimate {
  double mean = 0.0;
  double variance = 0.0;
  long samples = 0;
};

/// Empirical variance of the per-timestep discriminator difference, summed over t.
/// TrajectoryLevel: f at step t of a fresh learner rollout minus f at (s,a) ~ rho_E^t.
/// SuffixLevel: from (s,a) ~ rho_E^t execute a and add f along the next T-t learner
/// steps, minus the learner's T-t+1 step sum from an independent s' ~ rho_E^t.
/// Draws are independent across t. Needs samples >= 1000.
VarianceEstimate discriminator_estimator_variance(const TabularMdp& mdp, const VisitationProfile& expert_profile,
                                                  const PolicySequence& policy, const RewardFn& f,
                                                  DiscriminatorLoss mode, long samples, std::uint64_t seed);

}  // namespace filterlab::irl
