#include <charconv>
#include <functional>
#include <map>

#include "filterlab/errors.hpp"
#include "filterlab/irl.hpp"

namespace filterlab::irl {

namespace {

template <typename E>
struct EnumNames {
  std::vector<std::pair<E, const char*>> names;
  std::string name(E e) const {
    for (const auto& [v, n] : names)
      if (v == e) return n;
    return "unknown";
  }
  E parse(const std::string& field, const std::string& text) const {
    for (const auto& [v, n] : names)
      if (text == n) return v;
    std::string options;
    for (const auto& [v, n] : names) options += std::string(options.empty() ? "" : ", ") + n;
    throw ConfigurationError(field + ": '" + text + "' is not one of " + options);
  }
};

const EnumNames<OracleMode> kModes{{{OracleMode::Exact, "exact"}, {OracleMode::Sampled, "sampled"}}};
const EnumNames<AlphaSchedule> kSchedules{
    {{AlphaSchedule::Fixed, "fixed"}, {AlphaSchedule::LinearAnneal, "linear_anneal"}}};
const EnumNames<AdversaryMode> kAdversary{
    {{AdversaryMode::BestResponse, "best_response"}, {AdversaryMode::NoRegret, "no_regret"}}};
const EnumNames<DiscriminatorLoss> kLoss{
    {{DiscriminatorLoss::TrajectoryLevel, "trajectory"}, {DiscriminatorLoss::SuffixLevel, "suffix"}}};
const EnumNames<Decode> kDecode{{{Decode::Greedy, "greedy"}, {Decode::Mixture, "mixture"}}};

double parse_double(const std::string& field, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigurationError(field + ": expected a number, got '" + text + "'");
  }
}

long long parse_int(const std::string& field, const std::string& text) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigurationError(field + ": expected an integer, got '" + text + "'");
  return v;
}

bool parse_bool(const std::string& field, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigurationError(field + ": expected true or false, got '" + text + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"algorithm", [](RunConfig& c, const std::string&, const std::string& v) { c.algorithm = algorithm_from_string(v); }},
      {"name", [](RunConfig& c, const std::string&, const std::string& v) { c.algorithm = algorithm_from_string(v); }},
      {"mode", [](RunConfig& c, const std::string& k, const std::string& v) { c.mode = kModes.parse(k, v); }},
      {"alpha", [](RunConfig& c, const std::string& k, const std::string& v) { c.filter.alpha = parse_double(k, v); }},
      {"alpha_schedule",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.filter.alpha_schedule = kSchedules.parse(k, v); }},
      {"rounds",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.filter.rounds = static_cast<int>(parse_int(k, v)); }},
      {"rollouts_per_round",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.filter.rollouts_per_round = static_cast<int>(parse_int(k, v));
       }},
      {"adversary_mode",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.filter.adversary_mode = kAdversary.parse(k, v); }},
      {"discriminator_loss_mode",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.filter.discriminator_loss_mode = kLoss.parse(k, v);
       }},
      {"policy_learner",
       [](RunConfig& c, const std::string&, const std::string& v) { c.policy_learner = game::learner_from_string(v); }},
      {"reward_learner",
       [](RunConfig& c, const std::string&, const std::string& v) { c.reward_learner = game::learner_from_string(v); }},
      {"learner_step", [](RunConfig& c, const std::string& k, const std::string& v) { c.learner_step = parse_double(k, v); }},
      {"adversary_decode",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.adversary_decode = kDecode.parse(k, v); }},
      {"mmdp_decode", [](RunConfig& c, const std::string& k, const std::string& v) { c.mmdp_decode = kDecode.parse(k, v); }},
      {"temperature", [](RunConfig& c, const std::string& k, const std::string& v) { c.temperature = parse_double(k, v); }},
      {"greedy_soft_policy",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.greedy_soft_policy = parse_bool(k, v); }},
      {"game_epsilon", [](RunConfig& c, const std::string& k, const std::string& v) { c.game_epsilon = parse_double(k, v); }},
      {"game_max_rounds",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.game_max_rounds = static_cast<int>(parse_int(k, v)); }},
      {"initial_policy",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.initial_policy = static_cast<int>(parse_int(k, v)); }},
      {"eps_threshold", [](RunConfig& c, const std::string& k, const std::string& v) { c.eps_threshold = parse_double(k, v); }},
      {"gap_threshold", [](RunConfig& c, const std::string& k, const std::string& v) { c.gap_threshold = parse_double(k, v); }},
      {"discriminator_rollouts",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.discriminator_rollouts = static_cast<int>(parse_int(k, v));
       }},
      {"validation_rollouts",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.validation_rollouts = static_cast<int>(parse_int(k, v));
       }},
      {"interaction_budget",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const long long b = parse_int(k, v);
         if (b <= 0) throw ConfigurationError(k + ": must be positive");
         c.interaction_budget = static_cast<std::uint64_t>(b);
       }},
      {"expert_demos",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.expert_demos = static_cast<int>(parse_int(k, v)); }},
      {"seed",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const long long s = parse_int(k, v);
         if (s < 0) throw ConfigurationError(k + ": must be nonnegative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
  };
  return table;
}

template <typename T>
T get(const Json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigurationError(std::string(key) + ": wrong type");
  }
}

Json vec(const std::vector<double>& v) { return Json(v); }

}  // namespace

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigurationError(key + ": unknown setting");
  it->second(config, key, value);
}

Json to_json(const RunConfig& c) {
  Json doc;
  doc["algorithm"] = to_string(c.algorithm);
  doc["mode"] = kModes.name(c.mode);
  doc["alpha"] = c.filter.alpha;
  doc["alpha_schedule"] = kSchedules.name(c.filter.alpha_schedule);
  doc["rounds"] = c.filter.rounds;
  doc["rollouts_per_round"] = c.filter.rollouts_per_round;
  doc["adversary_mode"] = kAdversary.name(c.filter.adversary_mode);
  doc["discriminator_loss_mode"] = kLoss.name(c.filter.discriminator_loss_mode);
  doc["policy_learner"] = game::to_string(c.policy_learner);
  doc["reward_learner"] = game::to_string(c.reward_learner);
  doc["learner_step"] = c.learner_step;
  doc["adversary_decode"] = kDecode.name(c.adversary_decode);
  doc["mmdp_decode"] = kDecode.name(c.mmdp_decode);
  doc["temperature"] = c.temperature;
  doc["greedy_soft_policy"] = c.greedy_soft_policy;
  doc["game_epsilon"] = c.game_epsilon;
  doc["game_max_rounds"] = c.game_max_rounds;
  doc["initial_policy"] = c.initial_policy;
  doc["eps_threshold"] = c.eps_threshold;
  doc["gap_threshold"] = c.gap_threshold;
  doc["discriminator_rollouts"] = c.discriminator_rollouts;
  doc["validation_rollouts"] = c.validation_rollouts;
  doc["interaction_budget"] = c.interaction_budget;
  doc["expert_demos"] = c.expert_demos;
  doc["seed"] = c.seed;
  return doc;
}

RunConfig run_config_from_json(const Json& doc) {
  if (!doc.is_object()) throw ConfigurationError("config: expected an object");
  RunConfig c;
  for (const auto& [key, value] : doc.items()) {
    if (value.is_string())
      apply_setting(c, key, value.get<std::string>());
    else if (value.is_boolean())
      apply_setting(c, key, value.get<bool>() ? "true" : "false");
    else if (value.is_number_integer() || value.is_number_unsigned())
      apply_setting(c, key, value.dump());
    else if (value.is_number_float()) {
      const auto& table = setters();
      if (!table.count(key)) throw ConfigurationError(key + ": unknown setting");
      // exact double, not its text form
      const double v = value.get<double>();
      if (key == "alpha") c.filter.alpha = v;
      else if (key == "learner_step") c.learner_step = v;
      else if (key == "temperature") c.temperature = v;
      else if (key == "game_epsilon") c.game_epsilon = v;
      else if (key == "eps_threshold") c.eps_threshold = v;
      else if (key == "gap_threshold") c.gap_threshold = v;
      else throw ConfigurationError(key + ": expected an integer");
    } else {
      throw ConfigurationError(key + ": unsupported value type");
    }
  }
  return c;
}

Json to_json(const RunTranscript& tr) {
  Json doc;
  doc["algorithm"] = tr.algorithm;
  doc["env"] = envs::to_json(tr.env);
  doc["config"] = to_json(tr.config);
  doc["seed"] = tr.seed;
  Json its = Json::array();
  for (const auto& it : tr.iterates) {
    Json r;
    r["round"] = it.round;
    if (it.timestep > 0) r["timestep"] = it.timestep;
    r["policy_index"] = it.policy_index;
    if (it.policy.horizon() > 0) r["policy"] = policy_to_json(it.policy);
    if (!it.policy_weights.empty()) r["policy_weights"] = vec(it.policy_weights);
    r["reward_index"] = it.reward_index;
    r["reward_weights"] = vec(it.reward_weights);
    r["learner_loss"] = it.learner_loss;
    r["adversary_loss"] = it.adversary_loss;
    r["env_interactions"] = it.env_interactions;
    r["validation_gap"] = it.validation_gap ? Json(*it.validation_gap) : Json(nullptr);
    r["true_gap"] = it.true_gap ? Json(*it.true_gap) : Json(nullptr);
    r["alpha"] = it.alpha;
    its.push_back(std::move(r));
  }
  doc["iterates"] = std::move(its);
  doc["returned_policy"] = tr.returned_policy;
  doc["output_policy"] = policy_to_json(tr.output_policy);
  doc["total_interactions"] = tr.total_interactions;
  doc["stop_reason"] = tr.stop_reason;
  doc["eps_bar"] = tr.eps_bar;
  doc["delta_bar"] = tr.delta_bar;
  doc["eps_rl_bar"] = tr.eps_rl_bar;
  return doc;
}

RunTranscript transcript_from_json(const Json& doc) {
  try {
    RunTranscript tr;
    tr.algorithm = doc.at("algorithm").get<std::string>();
    tr.env = envs::env_spec_from_json(doc.at("env"));
    tr.config = run_config_from_json(doc.at("config"));
    tr.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& r : doc.at("iterates")) {
      IterateRecord it;
      it.round = r.at("round").get<int>();
      it.timestep = get(r, "timestep", 0);
      it.policy_index = r.at("policy_index").get<int>();
      if (r.contains("policy")) it.policy = policy_from_json(r.at("policy"));
      it.policy_weights = get(r, "policy_weights", std::vector<double>{});
      it.reward_index = r.at("reward_index").get<int>();
      it.reward_weights = r.at("reward_weights").get<std::vector<double>>();
      it.learner_loss = r.at("learner_loss").get<double>();
      it.adversary_loss = r.at("adversary_loss").get<double>();
      it.env_interactions = r.at("env_interactions").get<std::uint64_t>();
      if (!r.at("validation_gap").is_null()) it.validation_gap = r.at("validation_gap").get<double>();
      if (!r.at("true_gap").is_null()) it.true_gap = r.at("true_gap").get<double>();
      it.alpha = r.at("alpha").get<double>();
      tr.iterates.push_back(std::move(it));
    }
    tr.returned_policy = doc.at("returned_policy").get<int>();
    tr.output_policy = policy_from_json(doc.at("output_policy"));
    tr.total_interactions = doc.at("total_interactions").get<std::uint64_t>();
    tr.stop_reason = doc.at("stop_reason").get<std::string>();
    tr.eps_bar = doc.at("eps_bar").get<double>();
    tr.delta_bar = doc.at("delta_bar").get<double>();
    tr.eps_rl_bar = doc.at("eps_rl_bar").get<double>();
    if (tr.iterates.empty() || tr.returned_policy < 0 || tr.returned_policy >= static_cast<int>(tr.iterates.size()))
      throw StructuralError("transcript: returned_policy does not index an iterate");
    return tr;
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("transcript: ") + e.what());
  }
}

std::string dump_transcript(const RunTranscript& transcript) { return to_json(transcript).dump(2) + "\n"; }

}  // namespace filterlab::irl
