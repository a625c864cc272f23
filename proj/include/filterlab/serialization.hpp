#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "filterlab/mdp.hpp"

namespace filterlab {

using Json = nlohmann::ordered_json;

Json mdp_to_json(const TabularMdp& mdp);
TabularMdp mdp_from_json(const Json& doc);

Json reward_to_json(const RewardFn& f);
RewardFn reward_from_json(const Json& doc, double bound = 1.0);

Json policy_to_json(const PolicySequence& policy);
PolicySequence policy_from_json(const Json& doc);

Json trajectory_to_json(const Trajectory& traj);
Trajectory trajectory_from_json(const Json& doc);

/// One trajectory per line.
void write_trajectories(std::ostream& out, const std::vector<Trajectory>& trajs);
std::vector<Trajectory> read_trajectories(std::istream& in);

/// Write to a temporary sibling, then rename over the target.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace filterlab
