#include "filterlab/simulator.hpp"

#include <string>

#include "filterlab/errors.hpp"

namespace filterlab {

int Simulator::sample_start(Rng& rng) const { return static_cast<int>(rng.categorical(mdp_->start_dist())); }

int Simulator::step(int t, int s, int a, Rng& rng) {
  if (t < 1 || t > mdp_->horizon()) throw StructuralError("step at timestep " + std::to_string(t));
  if (s < 0 || s >= mdp_->num_states() || a < 0 || a >= mdp_->num_actions())
    throw StructuralError("step with state or action out of range");
  ++interactions_;
  if (t == mdp_->horizon()) return -1;
  return static_cast<int>(rng.categorical(mdp_->next(t, s, a)));
}

int Simulator::choose(const PolicySequence& policy, int t, int s, Rng& rng, double tremble) const {
  if (tremble > 0.0 && rng.uniform() < tremble) return static_cast<int>(rng.uniform_index(mdp_->num_actions()));
  return static_cast<int>(rng.categorical(policy.at(t).row(s)));
}

Trajectory Simulator::rollout(const PolicySequence& policy, Rng& rng, double tremble, const RewardClass* record) {
  check_policy_shape(*mdp_, policy);
  if (tremble < 0.0 || tremble > 1.0) throw ConfigurationError("tremble must lie in [0,1]");
  Trajectory traj;
  int s = sample_start(rng);
  for (int t = 1; t <= mdp_->horizon(); ++t) {
    const int a = choose(policy, t, s, rng, tremble);
    traj.steps.push_back({t, s, a});
    s = step(t, s, a, rng);
  }
  if (record) record_returns(traj, *record);
  return traj;
}

Trajectory Simulator::rollout_from(int t0, int s0, std::optional<int> first_action, const PolicySequence& continuation,
                                   Rng& rng, const RewardClass* record, double tremble) {
  if (t0 < 1 || t0 > mdp_->horizon()) throw StructuralError("reset timestep " + std::to_string(t0) + " out of range");
  if (s0 < 0 || s0 >= mdp_->num_states()) throw StructuralError("reset state out of range");
  check_policy_shape(*mdp_, continuation);
  Trajectory traj;
  traj.reset_point = std::make_pair(t0, s0);
  int s = s0;
  for (int t = t0; t <= mdp_->horizon(); ++t) {
    const int a = (t == t0 && first_action) ? *first_action : choose(continuation, t, s, rng, tremble);
    traj.steps.push_back({t, s, a});
    s = step(t, s, a, rng);
  }
  if (record) record_returns(traj, *record);
  return traj;
}

int Simulator::roll_in(const PolicySequence& policy, int t, Rng& rng) {
  int s = sample_start(rng);
  for (int tau = 1; tau < t; ++tau) {
    const int a = choose(policy, tau, s, rng, 0.0);
    s = step(tau, s, a, rng);
  }
  return s;
}

void record_returns(Trajectory& traj, const RewardClass& rewards) {
  for (std::size_t k = 0; k < rewards.size(); ++k) {
    double total = 0.0;
    for (const auto& st : traj.steps) total += rewards[k](st.state, st.action);
    traj.suffix_return_under[k] = total;
  }
}

Trajectory sample_trajectory(const TabularMdp& mdp, const PolicySequence& policy, std::uint64_t rng_seed,
                             double tremble, const RewardClass* record) {
  Simulator sim(mdp);
  Rng rng(rng_seed);
  return sim.rollout(policy, rng, tremble, record);
}

Trajectory reset_rollout(const TabularMdp& mdp, int start_t, int start_state, int first_action,
                         const PolicySequence& continuation, std::uint64_t rng_seed, const RewardClass* record) {
  if (first_action < 0 || first_action >= mdp.num_actions()) throw StructuralError("first action out of range");
  Simulator sim(mdp);
  Rng rng(rng_seed);
  return sim.rollout_from(start_t, start_state, first_action, continuation, rng, record);
}

VisitationProfile empirical_expert_visitation(const std::vector<Trajectory>& demos, int num_states, int num_actions,
                                              int horizon) {
  if (demos.empty()) throw ConfigurationError("empirical_expert_visitation: no demonstrations");
  const std::size_t per = static_cast<std::size_t>(num_states) * num_actions;
  std::vector<double> mass(per * horizon, 0.0);
  const double w = 1.0 / static_cast<double>(demos.size());
  for (const auto& d : demos) {
    if (static_cast<int>(d.steps.size()) != horizon || d.reset_point)
      throw StructuralError("empirical_expert_visitation: demonstration is not a full-horizon episode");
    for (const auto& st : d.steps) {
      if (st.state < 0 || st.state >= num_states || st.action < 0 || st.action >= num_actions)
        throw StructuralError("empirical_expert_visitation: state or action out of range");
      mass[(st.t - 1) * per + static_cast<std::size_t>(st.state) * num_actions + st.action] += w;
    }
  }
  return VisitationProfile(num_states, num_actions, horizon, std::move(mass));
}

}  // namespace filterlab
