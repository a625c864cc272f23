#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "filterlab/mdp.hpp"
#include "filterlab/rng.hpp"

namespace filterlab {

/// Sampled access to an MDP. Every executed (state, action) counts as one
/// interaction, including the final step of an episode.
class Simulator {
 public:
  explicit Simulator(const TabularMdp& mdp) : mdp_(&mdp) {}

  const TabularMdp& mdp() const { return *mdp_; }
  std::uint64_t interactions() const { return interactions_; }

  int sample_start(Rng& rng) const;
  /// Executes a at (t, s); returns the next state, or -1 after the last step.
  int step(int t, int s, int a, Rng& rng);

  /// Full-horizon episode from the start distribution.
  Trajectory rollout(const PolicySequence& policy, Rng& rng, double tremble = 0.0,
                     const RewardClass* record = nullptr);

  /// Episode from (t, s) to the horizon. The first action is forced when given,
  /// otherwise drawn from the continuation.
  Trajectory rollout_from(int t, int s, std::optional<int> first_action, const PolicySequence& continuation, Rng& rng,
                          const RewardClass* record = nullptr, double tremble = 0.0);

  /// Follows policy from the start distribution for t-1 steps and returns the state at t.
  int roll_in(const PolicySequence& policy, int t, Rng& rng);

 private:
  int choose(const PolicySequence& policy, int t, int s, Rng& rng, double tremble) const;
  const TabularMdp* mdp_;
  std::uint64_t interactions_ = 0;
};

/// Realized return of each class member along the trajectory.
void record_returns(Trajectory& traj, const RewardClass& rewards);

Trajectory sample_trajectory(const TabularMdp& mdp, const PolicySequence& policy, std::uint64_t rng_seed,
                             double tremble = 0.0, const RewardClass* record = nullptr);

Trajectory reset_rollout(const TabularMdp& mdp, int start_t, int start_state, int first_action,
                         const PolicySequence& continuation, std::uint64_t rng_seed,
                         const RewardClass* record = nullptr);

VisitationProfile empirical_expert_visitation(const std::vector<Trajectory>& demos, int num_states, int num_actions,
                                              int horizon);

}  // namespace filterlab
