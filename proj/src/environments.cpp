#include "filterlab/environments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "filterlab/dynamic_programming.hpp"
#include "filterlab/errors.hpp"
#include "filterlab/rng.hpp"

namespace filterlab::envs {

namespace {

struct KindName {
  EnvKind kind;
  const char* name;
};

constexpr KindName kKinds[] = {{EnvKind::Tree, "tree"},         {EnvKind::Cliff, "cliff"},
                               {EnvKind::Dante, "dante"},       {EnvKind::ForkedTree, "forked_tree"},
                               {EnvKind::RandomGrid, "random_grid"}, {EnvKind::RandomMdp, "random_mdp"},
                               {EnvKind::Chain, "chain"}};

class TransitionBuilder {
 public:
  TransitionBuilder(int S, int A) : S_(S), A_(A), p_(static_cast<std::size_t>(S) * A * S, 0.0) {}
  void add(int s, int a, int sp, double prob) { p_[(static_cast<std::size_t>(s) * A_ + a) * S_ + sp] += prob; }
  std::vector<double> take() { return std::move(p_); }

 private:
  int S_;
  int A_;
  std::vector<double> p_;
};

std::vector<double> point_mass(int S, int s) {
  std::vector<double> d(S, 0.0);
  d[s] = 1.0;
  return d;
}

long ipow(long base, int exp) {
  long out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

std::vector<double> random_distribution(Rng& rng, int n) {
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& x : w) {
    x = -std::log(1.0 - rng.uniform());
    total += x;
  }
  for (auto& x : w) x /= total;
  return w;
}

RewardFn random_reward(Rng& rng, int S, int A) {
  std::vector<double> v(static_cast<std::size_t>(S) * A);
  for (auto& x : v) x = 2.0 * rng.uniform() - 1.0;
  return RewardFn(S, A, std::move(v));
}

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) throw ConfigurationError("env." + field + ": " + why);
}

}  // namespace

std::string to_string(EnvKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k.name;
  return "unknown";
}

EnvKind env_kind_from_string(const std::string& name) {
  for (const auto& k : kKinds)
    if (name == k.name) return k.kind;
  throw ConfigurationError("env.kind: unknown environment '" + name + "'");
}

void validate(const EnvSpec& spec) {
  const auto& p = spec.params;
  switch (spec.kind) {
    case EnvKind::Tree:
      require(p.branching >= 2, "branching", "tree needs at least 2 actions");
      require(p.horizon >= 1, "horizon", "must be >= 1");
      require(std::pow(static_cast<double>(p.branching), p.horizon) <= static_cast<double>(p.size_cap), "size_cap",
              "tree has " + std::to_string(p.branching) + "^" + std::to_string(p.horizon) + " leaves, above cap " +
                  std::to_string(p.size_cap));
      break;
    case EnvKind::Cliff:
      require(p.horizon >= 2, "horizon", "cliff needs T >= 2");
      require(p.epsilon >= 0.0 && p.epsilon * p.horizon <= 1.0, "epsilon", "need 0 <= epsilon*T <= 1");
      break;
    case EnvKind::Dante:
      require(p.horizon >= 3, "horizon", "dante needs T >= 3");
      require(p.epsilon >= 0.0 && p.epsilon * p.horizon <= 1.0, "epsilon", "need 0 <= epsilon*T <= 1");
      break;
    case EnvKind::ForkedTree:
      require(p.suffix >= -1 && p.suffix <= 2, "suffix", "must be -1, 0, 1 or 2");
      break;
    case EnvKind::RandomGrid:
      require(p.width >= 1 && p.height >= 1, "width", "grid dimensions must be positive");
      require(static_cast<long>(p.width) * p.height <= std::max(p.size_cap, 400L), "size_cap",
              "grid has " + std::to_string(p.width * p.height) + " cells");
      require(p.horizon >= 1, "horizon", "must be >= 1");
      require(p.slip >= 0.0 && p.slip < 1.0, "slip", "must lie in [0,1)");
      require(p.class_size >= 1, "class_size", "must be >= 1");
      break;
    case EnvKind::RandomMdp:
      require(p.num_states >= 1 && p.num_actions >= 1, "num_states", "dimensions must be positive");
      require(p.horizon >= 1, "horizon", "must be >= 1");
      require(p.class_size >= 1, "class_size", "must be >= 1");
      break;
    case EnvKind::Chain:
      require(p.horizon >= 1, "horizon", "must be >= 1");
      break;
  }
}

std::string label(const EnvSpec& spec) {
  const auto& p = spec.params;
  std::ostringstream out;
  out << to_string(spec.kind) << '(';
  switch (spec.kind) {
    case EnvKind::Tree:
      out << "A=" << p.branching << ";T=" << p.horizon;
      break;
    case EnvKind::Cliff:
    case EnvKind::Dante:
      out << "T=" << p.horizon << ";eps=" << p.epsilon;
      break;
    case EnvKind::ForkedTree:
      out << "suffix=" << p.suffix;
      break;
    case EnvKind::RandomGrid:
      out << p.width << 'x' << p.height << ";T=" << p.horizon << ";slip=" << p.slip << ";seed=" << p.seed;
      break;
    case EnvKind::RandomMdp:
      out << "S=" << p.num_states << ";A=" << p.num_actions << ";T=" << p.horizon << ";seed=" << p.seed;
      break;
    case EnvKind::Chain:
      out << "T=" << p.horizon << (p.dependent ? ";dependent" : ";iid");
      break;
  }
  out << ')';
  return out.str();
}

Json to_json(const EnvSpec& spec) {
  const auto& p = spec.params;
  Json doc;
  doc["kind"] = to_string(spec.kind);
  Json params;
  params["branching"] = p.branching;
  params["horizon"] = p.horizon;
  params["epsilon"] = p.epsilon;
  params["width"] = p.width;
  params["height"] = p.height;
  params["slip"] = p.slip;
  params["seed"] = p.seed;
  params["num_states"] = p.num_states;
  params["num_actions"] = p.num_actions;
  params["class_size"] = p.class_size;
  params["suffix"] = p.suffix;
  params["dependent"] = p.dependent;
  params["size_cap"] = p.size_cap;
  doc["params"] = std::move(params);
  return doc;
}

EnvSpec env_spec_from_json(const Json& doc) {
  EnvSpec spec;
  spec.kind = env_kind_from_string(doc.at("kind").get<std::string>());
  const Json params = doc.value("params", Json::object());
  auto& p = spec.params;
  p.branching = params.value("branching", p.branching);
  p.horizon = params.value("horizon", p.horizon);
  p.epsilon = params.value("epsilon", p.epsilon);
  p.width = params.value("width", p.width);
  p.height = params.value("height", p.height);
  p.slip = params.value("slip", p.slip);
  p.seed = params.value("seed", p.seed);
  p.num_states = params.value("num_states", p.num_states);
  p.num_actions = params.value("num_actions", p.num_actions);
  p.class_size = params.value("class_size", p.class_size);
  p.suffix = params.value("suffix", p.suffix);
  p.dependent = params.value("dependent", p.dependent);
  p.size_cap = params.value("size_cap", p.size_cap);
  validate(spec);
  return spec;
}

EnvSpec env_spec_from_map(const std::string& kind, const std::map<std::string, std::string>& values) {
  EnvSpec spec;
  spec.kind = env_kind_from_string(kind);
  auto& p = spec.params;
  for (const auto& [key, text] : values) {
    try {
      std::size_t used = 0;
      auto whole = [&](std::size_t n) {
        if (n != text.size()) throw std::invalid_argument("trailing characters");
      };
      if (key == "kind") continue;
      if (key == "branching") p.branching = std::stoi(text, &used), whole(used);
      else if (key == "horizon") p.horizon = std::stoi(text, &used), whole(used);
      else if (key == "epsilon") p.epsilon = std::stod(text, &used), whole(used);
      else if (key == "width") p.width = std::stoi(text, &used), whole(used);
      else if (key == "height") p.height = std::stoi(text, &used), whole(used);
      else if (key == "slip") p.slip = std::stod(text, &used), whole(used);
      else if (key == "seed") p.seed = std::stoull(text, &used), whole(used);
      else if (key == "num_states") p.num_states = std::stoi(text, &used), whole(used);
      else if (key == "num_actions") p.num_actions = std::stoi(text, &used), whole(used);
      else if (key == "class_size") p.class_size = std::stoi(text, &used), whole(used);
      else if (key == "suffix") p.suffix = std::stoi(text, &used), whole(used);
      else if (key == "size_cap") p.size_cap = std::stol(text, &used), whole(used);
      else if (key == "dependent") {
        if (text != "true" && text != "false" && text != "1" && text != "0") throw std::invalid_argument("bool");
        p.dependent = text == "true" || text == "1";
      } else {
        throw ConfigurationError("env." + key + ": unknown parameter");
      }
    } catch (const ConfigurationError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigurationError("env." + key + ": cannot parse '" + text + "'");
    }
  }
  validate(spec);
  return spec;
}

EnvSpec parse_env_spec(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  std::map<std::string, std::string> values;
  if (colon != std::string::npos) {
    std::stringstream rest(text.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ConfigurationError("env: expected key=value, got '" + item + "'");
      values[item.substr(0, eq)] = item.substr(eq + 1);
    }
  }
  return env_spec_from_map(kind, values);
}

EnvBundle make_tree(int branching, int horizon, long size_cap) {
  EnvSpec spec{EnvKind::Tree, {}};
  spec.params.branching = branching;
  spec.params.horizon = horizon;
  spec.params.size_cap = size_cap;
  validate(spec);
  const int A = branching;
  const int T = horizon;
  const long leaves = ipow(A, T);
  const int first_leaf = static_cast<int>((leaves - 1) / (A - 1));
  const int S = first_leaf + static_cast<int>(leaves);
  std::vector<int> depth(S, 0);
  TransitionBuilder tb(S, A);
  for (int n = 0; n < S; ++n) {
    if (n > 0) depth[n] = depth[(n - 1) / A] + 1;
    for (int a = 0; a < A; ++a) tb.add(n, a, n < first_leaf ? n * A + 1 + a : n, 1.0);
  }
  std::vector<RewardFn> rewards;
  std::vector<std::string> reward_labels;
  std::vector<std::vector<int>> paths;
  for (long leaf = 0; leaf < leaves; ++leaf) {
    const int node = first_leaf + static_cast<int>(leaf);
    std::vector<double> v(static_cast<std::size_t>(S) * A, 0.0);
    v[static_cast<std::size_t>((node - 1) / A) * A + (node - 1) % A] = 1.0;
    rewards.emplace_back(S, A, std::move(v));
    std::vector<int> digits(T);
    long rest = leaf;
    for (int d = T - 1; d >= 0; --d) {
      digits[d] = static_cast<int>(rest % A);
      rest /= A;
    }
    std::string name = "leaf";
    for (int d : digits) name += std::to_string(d);
    reward_labels.push_back(name);
    paths.push_back(std::move(digits));
  }
  EnvBundle out;
  out.spec = spec;
  out.mdp = std::make_shared<const TabularMdp>(S, A, T, tb.take(), point_mass(S, 0), rewards.front());
  // the expert path (leaf 0) goes last so that lowest-index tie-breaking never favours it
  for (long k = leaves - 1; k >= 0; --k) {
    std::vector<int> actions(S, 0);
    for (int n = 0; n < first_leaf; ++n) actions[n] = paths[k][depth[n]];
    out.policy_class.push_back(PolicySequence::stationary(StationaryPolicy::deterministic(A, actions), T));
    out.policy_labels.push_back("path" + reward_labels[k].substr(4));
  }
  out.expert = out.policy_class.back();
  out.reward_class = RewardClass(std::move(rewards), std::move(reward_labels));
  return out;
}

EnvBundle make_cliff(int horizon) {
  EnvSpec spec{EnvKind::Cliff, {}};
  spec.params.horizon = horizon;
  validate(spec);
  const int T = horizon;
  const int S = T + 2;  // s_0..s_T, then s_x
  const int cliff = T + 1;
  TransitionBuilder tb(S, 2);
  std::vector<double> r(static_cast<std::size_t>(S) * 2, 0.0);
  for (int s = 0; s < S; ++s) {
    if (s == cliff) {
      tb.add(s, 0, cliff, 1.0);
      tb.add(s, 1, cliff, 1.0);
    } else {
      tb.add(s, 0, std::min(s + 1, T), 1.0);
      tb.add(s, 1, cliff, 1.0);
    }
    // -1{s = s_x} - 1{a = a_2}, clipped to [-1, 1]
    r[static_cast<std::size_t>(s) * 2 + 0] = s == cliff ? -1.0 : 0.0;
    r[static_cast<std::size_t>(s) * 2 + 1] = -1.0;
  }
  RewardFn reward(S, 2, std::move(r));
  EnvBundle out;
  out.spec = spec;
  out.mdp = std::make_shared<const TabularMdp>(S, 2, T, tb.take(), point_mass(S, 0), reward);
  out.reward_class = RewardClass({reward}, {"r"});
  out.policy_class = {PolicySequence::stationary(StationaryPolicy::deterministic(2, std::vector<int>(S, 1)), T),
                      cliff_adversarial_policy(T, 0.5),
                      PolicySequence::stationary(StationaryPolicy::deterministic(2, std::vector<int>(S, 0)), T)};
  out.policy_labels = {"always_a2", "half_a2_at_s0", "always_a1"};
  out.expert = out.policy_class.back();
  return out;
}

PolicySequence cliff_adversarial_policy(int horizon, double p) {
  if (p < 0.0 || p > 1.0) throw ConfigurationError("cliff adversarial probability must lie in [0,1]");
  const int S = horizon + 2;
  std::vector<double> probs(static_cast<std::size_t>(S) * 2, 0.0);
  for (int s = 0; s < S; ++s) probs[static_cast<std::size_t>(s) * 2] = 1.0;
  probs[0] = 1.0 - p;
  probs[1] = p;
  return PolicySequence::stationary(StationaryPolicy(S, 2, std::move(probs)), horizon);
}

int dante_state(int row, int col) { return col * 3 + row; }

EnvBundle make_dante(int horizon) {
  EnvSpec spec{EnvKind::Dante, {}};
  spec.params.horizon = horizon;
  validate(spec);
  const int T = horizon;
  const int S = 3 * T;
  TransitionBuilder tb(S, 3);
  std::vector<double> r(static_cast<std::size_t>(S) * 3, 0.0);
  for (int col = 0; col < T; ++col)
    for (int row = 0; row < 3; ++row)
      for (int a = 0; a < 3; ++a) {
        const int next_row = std::clamp(row + (a - 1), 0, 2);
        tb.add(dante_state(row, col), a, dante_state(next_row, std::min(col + 1, T - 1)), 1.0);
        r[static_cast<std::size_t>(dante_state(row, col)) * 3 + a] = next_row <= 1 ? 1.0 : 0.0;
      }
  RewardFn reward(S, 3, std::move(r));
  EnvBundle out;
  out.spec = spec;
  out.mdp = std::make_shared<const TabularMdp>(S, 3, T, tb.take(), point_mass(S, dante_state(1, 0)), reward);
  out.reward_class = RewardClass({reward}, {"r"});
  for (int a : {kUp, kStraight, kDown}) out.policy_class.push_back(PolicySequence::stationary(dante_constant(T, a), T));
  out.policy_labels = {"up", "straight", "down"};
  out.expert = out.policy_class[kStraight];
  return out;
}

StationaryPolicy dante_constant(int horizon, int action) {
  return StationaryPolicy::deterministic(3, std::vector<int>(static_cast<std::size_t>(3 * horizon), action));
}

std::map<int, StationaryPolicy> dante_erring_suffix(int horizon, double epsilon) {
  const int S = 3 * horizon;
  const double p = epsilon * horizon;
  if (p < 0.0 || p > 1.0) throw ConfigurationError("dante: need 0 <= epsilon*T <= 1");
  std::vector<double> probs(static_cast<std::size_t>(S) * 3, 0.0);
  for (int s = 0; s < S; ++s) {
    probs[static_cast<std::size_t>(s) * 3 + kStraight] = 1.0 - p;
    probs[static_cast<std::size_t>(s) * 3 + kDown] += p;
  }
  std::map<int, StationaryPolicy> out;
  out.emplace(2, StationaryPolicy(S, 3, std::move(probs)));
  for (int t = 3; t <= horizon; ++t) out.emplace(t, dante_constant(horizon, kStraight));
  return out;
}

PolicySequence dante_with_suffix(int horizon, double epsilon, const StationaryPolicy& first) {
  std::vector<StationaryPolicy> steps{first};
  for (auto& [t, pi] : dante_erring_suffix(horizon, epsilon)) steps.push_back(pi);
  return PolicySequence(std::move(steps));
}

EnvBundle make_forked_tree() {
  constexpr int S = 13;
  constexpr int A = 3;
  constexpr int T = 2;
  constexpr int kLeft = 0, kCenter = 1, kRight = 2;
  TransitionBuilder tb(S, A);
  for (int a = 0; a < A; ++a) tb.add(0, a, 1 + a, 1.0);
  for (int n = 1; n <= 3; ++n)
    for (int a = 0; a < A; ++a) tb.add(n, a, 4 + 3 * (n - 1) + a, 1.0);
  for (int n = 4; n < S; ++n)
    for (int a = 0; a < A; ++a) tb.add(n, a, n, 1.0);
  auto idx = [](int s, int a) { return static_cast<std::size_t>(s) * A + a; };
  std::vector<double> r(S * A, 0.0);
  r[idx(0, kLeft)] = 2.0;
  std::vector<double> r_alt = r;
  r_alt[idx(1, kLeft)] = 1.0;    // left-left leaf
  r_alt[idx(2, kRight)] = 4.0;   // center then right
  r_alt[idx(3, kCenter)] = 4.0;  // right then center
  RewardFn true_r(S, A, std::move(r), 4.0);
  RewardFn alt(S, A, std::move(r_alt), 4.0);
  EnvBundle out;
  out.spec = EnvSpec{EnvKind::ForkedTree, {}};
  out.spec.params.horizon = T;
  out.mdp = std::make_shared<const TabularMdp>(S, A, T, tb.take(), point_mass(S, 0), true_r);
  out.reward_class = RewardClass({true_r, alt}, {"r", "r~"});
  for (int a : {kLeft, kCenter, kRight})
    out.policy_class.push_back(PolicySequence::stationary(StationaryPolicy::deterministic(A, std::vector<int>(S, a)), T));
  out.policy_labels = {"pi_E", "pi_1", "pi_2"};
  out.expert = out.policy_class[0];
  return out;
}

EnvBundle make_random_grid(int width, int height, int horizon, double slip, std::uint64_t seed, int class_size,
                           long size_cap) {
  EnvSpec spec{EnvKind::RandomGrid, {}};
  auto& p = spec.params;
  p.width = width;
  p.height = height;
  p.horizon = horizon;
  p.slip = slip;
  p.seed = seed;
  p.class_size = class_size;
  p.size_cap = size_cap;
  validate(spec);
  const int S = width * height;
  constexpr int A = 4;  // up, down, left, right
  constexpr int dx[A] = {0, 0, -1, 1};
  constexpr int dy[A] = {-1, 1, 0, 0};
  auto move = [&](int s, int a) {
    const int x = std::clamp(s % width + dx[a], 0, width - 1);
    const int y = std::clamp(s / width + dy[a], 0, height - 1);
    return y * width + x;
  };
  Rng rng(seed);
  std::vector<int> goals;
  for (int k = 0; k < class_size; ++k) goals.push_back(static_cast<int>(rng.uniform_index(S)));
  const int start = static_cast<int>(rng.uniform_index(S));
  const int goal = goals.front();
  TransitionBuilder tb(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      if (s == goal) {
        tb.add(s, a, s, 1.0);
        continue;
      }
      tb.add(s, a, move(s, a), 1.0 - slip);
      for (int b = 0; b < A; ++b) tb.add(s, a, move(s, b), slip / A);
    }
  std::vector<double> transitions = tb.take();
  auto goal_reward = [&](int g) {
    std::vector<double> v(static_cast<std::size_t>(S) * A);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) v[static_cast<std::size_t>(s) * A + a] = transitions[(static_cast<std::size_t>(s) * A + a) * S + g];
    return RewardFn(S, A, std::move(v));
  };
  std::vector<RewardFn> rewards;
  std::vector<std::string> labels;
  for (int g : goals) {
    rewards.push_back(goal_reward(g));
    labels.push_back("goal" + std::to_string(g));
  }
  EnvBundle out;
  out.spec = spec;
  out.mdp = std::make_shared<const TabularMdp>(S, A, horizon, std::move(transitions), point_mass(S, start), rewards.front());
  for (int k = class_size - 1; k >= 0; --k) {
    out.policy_class.push_back(optimal_policy(*out.mdp, rewards[k]).policy);
    out.policy_labels.push_back("opt_" + labels[k]);
  }
  out.expert = out.policy_class.back();
  out.reward_class = RewardClass(std::move(rewards), std::move(labels));
  return out;
}

EnvBundle make_random_mdp(int num_states, int num_actions, int horizon, int class_size, std::uint64_t seed) {
  EnvSpec spec{EnvKind::RandomMdp, {}};
  auto& p = spec.params;
  p.num_states = num_states;
  p.num_actions = num_actions;
  p.horizon = horizon;
  p.class_size = class_size;
  p.seed = seed;
  validate(spec);
  const int S = num_states;
  const int A = num_actions;
  Rng rng(seed);
  std::vector<double> transitions;
  for (int row = 0; row < S * A; ++row) {
    auto d = random_distribution(rng, S);
    transitions.insert(transitions.end(), d.begin(), d.end());
  }
  const auto start = random_distribution(rng, S);
  std::vector<RewardFn> rewards;
  std::vector<std::string> labels;
  for (int k = 0; k < class_size; ++k) {
    rewards.push_back(random_reward(rng, S, A));
    labels.push_back(k == 0 ? "r" : "f" + std::to_string(k));
  }
  EnvBundle out;
  out.spec = spec;
  out.mdp = std::make_shared<const TabularMdp>(S, A, horizon, std::move(transitions), start, rewards.front());
  for (int k = 1; k < class_size; ++k) {
    std::vector<StationaryPolicy> steps;
    for (int t = 1; t <= horizon; ++t) {
      std::vector<int> actions(S);
      for (auto& a : actions) a = static_cast<int>(rng.uniform_index(A));
      steps.push_back(StationaryPolicy::deterministic(A, actions));
    }
    out.policy_class.emplace_back(std::move(steps));
    out.policy_labels.push_back("rand" + std::to_string(k));
  }
  out.policy_class.push_back(optimal_policy(*out.mdp, rewards.front()).policy);
  out.policy_labels.push_back("expert");
  out.expert = out.policy_class.back();
  out.reward_class = RewardClass(std::move(rewards), std::move(labels));
  return out;
}

EnvBundle make_variance_chain(int horizon, bool dependent) {
  EnvSpec spec{EnvKind::Chain, {}};
  spec.params.horizon = horizon;
  spec.params.dependent = dependent;
  validate(spec);
  const std::vector<double> transitions =
      dependent ? std::vector<double>{1.0, 0.0, 0.0, 1.0} : std::vector<double>{0.5, 0.5, 0.5, 0.5};
  RewardFn f(2, 1, {1.0, -1.0});
  EnvBundle out;
  out.spec = spec;
  out.mdp = std::make_shared<const TabularMdp>(2, 1, horizon, transitions, std::vector<double>{0.5, 0.5}, f);
  out.reward_class = RewardClass({f}, {"sign"});
  out.expert = PolicySequence::stationary(StationaryPolicy::uniform(2, 1), horizon);
  out.policy_class = {out.expert};
  out.policy_labels = {"only"};
  return out;
}

EnvBundle make_env(const EnvSpec& spec) {
  validate(spec);
  const auto& p = spec.params;
  EnvBundle out;
  switch (spec.kind) {
    case EnvKind::Tree:
      return make_tree(p.branching, p.horizon, p.size_cap);
    case EnvKind::Cliff:
      out = make_cliff(p.horizon);
      break;
    case EnvKind::Dante:
      out = make_dante(p.horizon);
      if (p.epsilon > 0.0) out.pinned = dante_erring_suffix(p.horizon, p.epsilon);
      break;
    case EnvKind::ForkedTree:
      out = make_forked_tree();
      if (p.suffix >= 0) out.pinned.emplace(2, out.policy_class[p.suffix].at(2));
      break;
    case EnvKind::RandomGrid:
      return make_random_grid(p.width, p.height, p.horizon, p.slip, p.seed, p.class_size, std::max(p.size_cap, 400L));
    case EnvKind::RandomMdp:
      return make_random_mdp(p.num_states, p.num_actions, p.horizon, p.class_size, p.seed);
    case EnvKind::Chain:
      return make_variance_chain(p.horizon, p.dependent);
  }
  out.spec = spec;
  return out;
}

ForkedTreeTables forked_tree_tables(const EnvBundle& forked) {
  const TabularMdp& mdp = *forked.mdp;
  const auto& cls = forked.policy_class;
  const auto& rewards = forked.reward_class;
  const StateDistributions expert_states = state_marginals(exact_visitation(mdp, forked.expert));
  ForkedTreeTables out;
  auto table = [&](auto&& entry) {
    std::vector<std::vector<double>> m(cls.size(), std::vector<double>(rewards.size()));
    for (std::size_t i = 0; i < cls.size(); ++i)
      for (std::size_t j = 0; j < rewards.size(); ++j) m[i][j] = entry(cls[i], rewards[j]);
    return m;
  };
  out.gap = table([&](const PolicySequence& pi, const RewardFn& f) {
    return exact_policy_value(mdp, pi, f) - exact_policy_value(mdp, forked.expert, f);
  });
  auto reset_table = [&](const PolicySequence& continuation) {
    return table([&](const PolicySequence& pi, const RewardFn& f) {
      return reset_payoff(mdp, expert_states, pi, continuation, f);
    });
  };
  out.reset_pi1 = reset_table(cls[1]);
  out.reset_pi2 = reset_table(cls[2]);
  out.reset_expert = reset_table(forked.expert);
  return out;
}

ForkedTreeTables forked_tree_expected_tables() {
  ForkedTreeTables t;
  t.gap = {{0, 0}, {-2, -3}, {-2, -3}};
  t.reset_pi1 = {{1, 1.5}, {0, 0}, {0, 2}};
  t.reset_pi2 = {{1, 1.5}, {0, 2}, {0, 0}};
  t.reset_expert = {{1, 2}, {0, 0}, {0, 0}};
  return t;
}

}  // namespace filterlab::envs
