#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "filterlab/mdp.hpp"
#include "filterlab/serialization.hpp"

namespace filterlab::envs {

enum class EnvKind { Tree, Cliff, Dante, ForkedTree, RandomGrid, RandomMdp, Chain };

std::string to_string(EnvKind kind);
EnvKind env_kind_from_string(const std::string& name);

/// Union of the per-kind parameters; each kind reads only its own fields.
struct EnvParams {
  int branching = 2;
  int horizon = 3;
  double epsilon = 0.0;  // Dante/Cliff erring suffix; 0 disables
  int width = 4;
  int height = 4;
  double slip = 0.0;
  std::uint64_t seed = 0;
  int num_states = 4;
  int num_actions = 2;
  int class_size = 4;
  int suffix = -1;          // Forked Tree pinned t=2 policy index, -1 for none
  bool dependent = false;   // Chain
  long size_cap = 81;       // Tree leaves, or grid cells for RandomGrid
  bool operator==(const EnvParams&) const = default;
};

struct EnvSpec {
  EnvKind kind = EnvKind::Tree;
  EnvParams params;
  bool operator==(const EnvSpec&) const = default;
};

/// Throws ConfigurationError naming the offending field.
void validate(const EnvSpec& spec);
std::string label(const EnvSpec& spec);
Json to_json(const EnvSpec& spec);
EnvSpec env_spec_from_json(const Json& doc);
/// Keys are EnvParams field names; values are parsed by field type.
EnvSpec env_spec_from_map(const std::string& kind, const std::map<std::string, std::string>& values);
/// "tree:branching=2,horizon=4"
EnvSpec parse_env_spec(const std::string& text);

struct EnvBundle {
  EnvSpec spec;
  std::shared_ptr<const TabularMdp> mdp;
  PolicySequence expert;
  RewardClass reward_class;
  std::vector<PolicySequence> policy_class;
  std::vector<std::string> policy_labels;
  /// Timesteps whose policy is fixed from outside (erring suffixes).
  std::map<int, StationaryPolicy> pinned;
};

EnvBundle make_tree(int branching, int horizon, long size_cap = 81);
EnvBundle make_cliff(int horizon);
EnvBundle make_dante(int horizon);
EnvBundle make_forked_tree();
EnvBundle make_random_grid(int width, int height, int horizon, double slip, std::uint64_t seed, int class_size = 4,
                           long size_cap = 400);
/// Random dense MDP; expert is optimal for the true reward and sits last in the policy class.
EnvBundle make_random_mdp(int num_states, int num_actions, int horizon, int class_size, std::uint64_t seed);
/// Two-state chain with rewards +1/-1. Independent layers, or the sign fixed at t=1.
EnvBundle make_variance_chain(int horizon, bool dependent);

EnvBundle make_env(const EnvSpec& spec);

/// Cliff: a_2 at s_0 with probability p, a_1 elsewhere.
PolicySequence cliff_adversarial_policy(int horizon, double p);

enum DanteAction { kUp = 0, kStraight = 1, kDown = 2 };
int dante_state(int row, int col);
/// Policy taking one action everywhere.
StationaryPolicy dante_constant(int horizon, int action);
/// Steps 2..T: down with probability epsilon*T at t=2, straight afterwards.
std::map<int, StationaryPolicy> dante_erring_suffix(int horizon, double epsilon);
/// Sequence with the given first step followed by the erring suffix.
PolicySequence dante_with_suffix(int horizon, double epsilon, const StationaryPolicy& first);

/// Payoff tables of the Forked Tree example. Rows are {pi_E, pi_1, pi_2}, columns {r, r~}.
struct ForkedTreeTables {
  std::vector<std::vector<double>> gap;          // J(pi,f) - J(pi_E,f)
  std::vector<std::vector<double>> reset_pi1;    // J_E^1
  std::vector<std::vector<double>> reset_pi2;    // J_E^2
  std::vector<std::vector<double>> reset_expert; // J_E^E
};

ForkedTreeTables forked_tree_tables(const EnvBundle& forked);
ForkedTreeTables forked_tree_expected_tables();

}  // namespace filterlab::envs
