#include "filterlab/serialization.hpp"

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "filterlab/errors.hpp"

namespace filterlab {

namespace {

Json matrix_rows(std::span<const double> flat, int rows, int cols) {
  Json out = Json::array();
  for (int i = 0; i < rows; ++i) {
    Json row = Json::array();
    for (int j = 0; j < cols; ++j) row.push_back(flat[static_cast<std::size_t>(i) * cols + j]);
    out.push_back(std::move(row));
  }
  return out;
}

void flatten(const Json& node, std::vector<double>& out, int& depth, int level = 0) {
  if (node.is_array()) {
    if (level + 1 > depth) depth = level + 1;
    for (const auto& child : node) flatten(child, out, depth, level + 1);
  } else if (node.is_number()) {
    out.push_back(node.get<double>());
  } else {
    throw StructuralError("expected a number or nested array");
  }
}

template <typename T>
T field(const Json& doc, const char* name) {
  if (!doc.contains(name)) throw StructuralError(std::string("missing field '") + name + "'");
  try {
    return doc.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw StructuralError(std::string("field '") + name + "' has the wrong type");
  }
}

}  // namespace

Json reward_to_json(const RewardFn& f) { return matrix_rows(f.values(), f.num_states(), f.num_actions()); }

RewardFn reward_from_json(const Json& doc, double bound) {
  if (!doc.is_array() || doc.empty()) throw StructuralError("reward must be a nonempty [state][action] array");
  std::vector<double> values;
  int depth = 0;
  flatten(doc, values, depth);
  const int S = static_cast<int>(doc.size());
  if (depth != 2 || values.size() % S != 0) throw StructuralError("reward must be a [state][action] array");
  const int A = static_cast<int>(values.size() / S);
  return RewardFn(S, A, std::move(values), bound);
}

Json mdp_to_json(const TabularMdp& mdp) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const int layers = mdp.time_homogeneous() ? 1 : mdp.horizon();
  Json transitions = Json::array();
  for (int l = 0; l < layers; ++l) {
    Json layer = Json::array();
    for (int s = 0; s < S; ++s) {
      Json per_action = Json::array();
      for (int a = 0; a < A; ++a) {
        const auto p = mdp.next(l + 1, s, a);
        per_action.push_back(Json(std::vector<double>(p.begin(), p.end())));
      }
      layer.push_back(std::move(per_action));
    }
    if (layers == 1)
      transitions = std::move(layer);
    else
      transitions.push_back(std::move(layer));
  }
  Json doc;
  doc["num_states"] = S;
  doc["num_actions"] = A;
  doc["horizon"] = mdp.horizon();
  doc["transitions"] = std::move(transitions);
  doc["start_dist"] = std::vector<double>(mdp.start_dist().begin(), mdp.start_dist().end());
  if (mdp.true_reward()) {
    doc["true_reward"] = reward_to_json(*mdp.true_reward());
    if (mdp.true_reward()->bound() != 1.0) doc["reward_bound"] = mdp.true_reward()->bound();
  }
  return doc;
}

TabularMdp mdp_from_json(const Json& doc) {
  const int S = field<int>(doc, "num_states");
  const int A = field<int>(doc, "num_actions");
  const int T = field<int>(doc, "horizon");
  std::vector<double> transitions;
  int depth = 0;
  flatten(doc.at("transitions"), transitions, depth);
  if (depth != 3 && depth != 4) throw StructuralError("transitions must be nested [s][a][s'] or [t][s][a][s']");
  const auto start = field<std::vector<double>>(doc, "start_dist");
  std::optional<RewardFn> reward;
  if (doc.contains("true_reward") && !doc.at("true_reward").is_null())
    reward = reward_from_json(doc.at("true_reward"), doc.value("reward_bound", 1.0));
  return TabularMdp(S, A, T, std::move(transitions), start, std::move(reward));
}

Json policy_to_json(const PolicySequence& policy) {
  Json out = Json::array();
  for (int t = 1; t <= policy.horizon(); ++t)
    out.push_back(matrix_rows(policy.at(t).probs(), policy.num_states(), policy.num_actions()));
  return out;
}

PolicySequence policy_from_json(const Json& doc) {
  if (!doc.is_array() || doc.empty()) throw StructuralError("policy must be a nonempty [t][state][action] array");
  std::vector<StationaryPolicy> steps;
  for (const auto& step : doc) {
    std::vector<double> values;
    int depth = 0;
    flatten(step, values, depth);
    const int S = static_cast<int>(step.size());
    if (depth != 2 || S == 0 || values.size() % S != 0) throw StructuralError("policy step must be [state][action]");
    const int A = static_cast<int>(values.size() / S);
    steps.emplace_back(S, A, std::move(values));
  }
  return PolicySequence(std::move(steps));
}

Json trajectory_to_json(const Trajectory& traj) {
  Json doc;
  Json steps = Json::array();
  for (const auto& st : traj.steps) steps.push_back({st.t, st.state, st.action});
  doc["steps"] = std::move(steps);
  doc["reset_point"] = traj.reset_point ? Json{traj.reset_point->first, traj.reset_point->second} : Json();
  Json returns = Json::object();
  for (const auto& [k, v] : traj.suffix_return_under) returns[std::to_string(k)] = v;
  doc["suffix_return_under"] = std::move(returns);
  return doc;
}

Trajectory trajectory_from_json(const Json& doc) {
  Trajectory traj;
  for (const auto& st : doc.at("steps")) {
    if (!st.is_array() || st.size() != 3) throw StructuralError("trajectory step must be [t, state, action]");
    traj.steps.push_back({st[0].get<int>(), st[1].get<int>(), st[2].get<int>()});
  }
  for (std::size_t i = 1; i < traj.steps.size(); ++i)
    if (traj.steps[i].t <= traj.steps[i - 1].t) throw StructuralError("trajectory timesteps must increase");
  if (doc.contains("reset_point") && !doc.at("reset_point").is_null()) {
    const auto& rp = doc.at("reset_point");
    traj.reset_point = std::make_pair(rp.at(0).get<int>(), rp.at(1).get<int>());
    if (!traj.steps.empty() && traj.steps.front().t != traj.reset_point->first)
      throw StructuralError("trajectory does not begin at its reset point");
  }
  if (doc.contains("suffix_return_under"))
    for (const auto& [k, v] : doc.at("suffix_return_under").items())
      traj.suffix_return_under[std::stoul(k)] = v.get<double>();
  return traj;
}

void write_trajectories(std::ostream& out, const std::vector<Trajectory>& trajs) {
  for (const auto& t : trajs) out << trajectory_to_json(t).dump() << '\n';
}

std::vector<Trajectory> read_trajectories(std::istream& in) {
  std::vector<Trajectory> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(trajectory_from_json(Json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw StructuralError(std::string("bad trajectory line: ") + e.what());
    }
  }
  return out;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + target.parent_path().string() + ": " + ec.message());
  }
  std::ostringstream suffix;
  suffix << ".tmp." << std::this_thread::get_id();
  const fs::path tmp = target.string() + suffix.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot rename onto " + path + ": " + ec.message());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace filterlab
