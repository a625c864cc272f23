#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "filterlab/environments.hpp"
#include "filterlab/game.hpp"
#include "filterlab/mdp.hpp"
#include "filterlab/serialization.hpp"
#include "filterlab/simulator.hpp"

namespace filterlab::irl {

enum class Algorithm { DualIrl, PrimalIrl, Mmdp, NrmmBr, NrmmNr, NrmmDual, Filter, BehavioralCloning };
enum class OracleMode { Exact, Sampled };
enum class AlphaSchedule { Fixed, LinearAnneal };
enum class AdversaryMode { BestResponse, NoRegret };
enum class DiscriminatorLoss { TrajectoryLevel, SuffixLevel };
enum class Decode { Greedy, Mixture };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

struct FilterConfig {
  double alpha = 1.0;
  AlphaSchedule alpha_schedule = AlphaSchedule::Fixed;
  int rounds = 20;
  int rollouts_per_round = 64;
  AdversaryMode adversary_mode = AdversaryMode::BestResponse;
  DiscriminatorLoss discriminator_loss_mode = DiscriminatorLoss::TrajectoryLevel;
  bool operator==(const FilterConfig&) const = default;
};

/// Every knob of every algorithm; each algorithm reads the fields it needs.
struct RunConfig {
  Algorithm algorithm = Algorithm::NrmmBr;
  OracleMode mode = OracleMode::Exact;
  FilterConfig filter;
  game::LearnerAlgorithm policy_learner = game::LearnerAlgorithm::FTRL;
  game::LearnerAlgorithm reward_learner = game::LearnerAlgorithm::MultiplicativeWeights;
  double learner_step = 0.0;  // 0 picks the default for the declared round budget
  Decode adversary_decode = Decode::Greedy;
  Decode mmdp_decode = Decode::Greedy;
  double temperature = 1.0;
  bool greedy_soft_policy = false;
  double game_epsilon = 0.01;
  int game_max_rounds = 20000;
  int initial_policy = 0;  // class index; -1 starts from the uniform policy
  double eps_threshold = 0.0;
  double gap_threshold = -1.0;  // stop once the true gap is at or below this; negative disables
  int discriminator_rollouts = 16;
  int validation_rollouts = 16;
  std::uint64_t interaction_budget = 10'000'000;
  int expert_demos = 0;  // 0: exact expert occupancy, else that many sampled demos
  std::uint64_t seed = 0;
  bool operator==(const RunConfig&) const = default;
};

Json to_json(const RunConfig& config);
RunConfig run_config_from_json(const Json& doc);
/// Keys are RunConfig / FilterConfig field names; throws ConfigurationError naming the field.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Everything an algorithm sees: the MDP, expert occupancy, the two strategy classes.
struct Problem {
  envs::EnvSpec spec;
  std::shared_ptr<const TabularMdp> mdp;
  VisitationProfile expert_profile;
  RewardClass reward_class;
  std::vector<PolicySequence> policy_class;
  std::vector<std::string> policy_labels;
  std::map<int, StationaryPolicy> pinned;
  /// Reference expert for true-gap reporting; the algorithms only see expert_profile.
  std::optional<PolicySequence> expert;
};

/// Builds the problem for an environment; expert occupancy is exact or drawn from
/// config.expert_demos demonstrations seeded by config.seed.
Problem make_problem(const envs::EnvBundle& env, const RunConfig& config);

struct IterateRecord {
  int round = 0;
  int timestep = 0;  // MMDP only
  int policy_index = -1;
  PolicySequence policy;
  std::vector<double> policy_weights;  // MMDP step strategy over the class
  int reward_index = 0;
  std::vector<double> reward_weights;
  double learner_loss = 0.0;
  double adversary_loss = 0.0;
  std::uint64_t env_interactions = 0;
  std::optional<double> validation_gap;
  std::optional<double> true_gap;
  double alpha = 1.0;
};

struct RunTranscript {
  std::string algorithm;
  envs::EnvSpec env;
  RunConfig config;
  std::uint64_t seed = 0;
  std::vector<IterateRecord> iterates;
  int returned_policy = 0;
  PolicySequence output_policy;
  std::uint64_t total_interactions = 0;
  std::string stop_reason;
  double eps_bar = 0.0;
  double delta_bar = 0.0;
  double eps_rl_bar = 0.0;
};

Json to_json(const RunTranscript& transcript);
RunTranscript transcript_from_json(const Json& doc);
std::string dump_transcript(const RunTranscript& transcript);

RunTranscript run_dual_irl(const Problem& problem, const RunConfig& config);
RunTranscript run_primal_irl(const Problem& problem, const RunConfig& config);
RunTranscript run_mmdp(const Problem& problem, const RunConfig& config);
/// FILTER with alpha forced to 1.
RunTranscript run_nrmm(const Problem& problem, const RunConfig& config);
RunTranscript run_nrmm_dual(const Problem& problem, const RunConfig& config);
RunTranscript run_filter(const Problem& problem, const RunConfig& config);
/// Transcript wrapper around behavioral cloning on the expert profile: config.expert_demos
/// demos, or the exact occupancy when that is 0.
RunTranscript run_bc(const Problem& problem, const RunConfig& config);
RunTranscript run_algorithm(const Problem& problem, const RunConfig& config);

/// Rebuilds the problem from the transcript's env and config and runs again.
RunTranscript replay(const RunTranscript& transcript);

/// Per timestep, the class member agreeing most with the demonstrated actions.
PolicySequence run_behavioral_cloning(const TabularMdp& mdp, const std::vector<Trajectory>& demos,
                                      const std::vector<PolicySequence>& policy_class,
                                      const std::map<int, StationaryPolicy>& pinned = {});

/// MMDP payoff at timestep t, row = class member, column = reward:
/// (1/T)(E_{s~rho_E^t, a~pi_t} Q_f(s,a) - E_{(s,a)~rho_E^t} Q_f(s,a)), Q under the continuation.
game::PayoffMatrix mmdp_payoff_exact(const Problem& problem, int t, const PolicySequence& continuation);

/// Same payoff estimated from M resets at s ~ rho_E^t with a uniform first action.
game::PayoffMatrix mmdp_payoff_sampled(const Problem& problem, int t, const PolicySequence& continuation, int samples,
                                       Rng& rng, Simulator& sim);

/// Rollouts per timestep from the Hoeffding sample-size bound:
/// ceil(ln(2|Pi||F|/delta) * (T|A|)^2 / (2 eps^2)).
long hoeffding_sample_size(std::size_t policy_count, std::size_t reward_count, int horizon, int num_actions,
                           double epsilon, double delta);

}  // namespace filterlab::irl
