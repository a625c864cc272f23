#include "filterlab/irl.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "filterlab/dynamic_programming.hpp"
#include "filterlab/errors.hpp"
#include "filterlab/run_errors.hpp"
#include "filterlab/simulator.hpp"

namespace filterlab::irl {

namespace {

using game::argmax_lowest;

std::vector<double> moments(const TabularMdp& mdp, const PolicySequence& pi, const RewardClass& cls) {
  const VisitationProfile occ = exact_visitation(mdp, pi);
  std::vector<double> out;
  for (const auto& f : cls.members()) out.push_back(occ.expected(f));
  return out;
}

std::vector<double> point_weights(std::size_t n, std::size_t i) {
  std::vector<double> w(n, 0.0);
  w[i] = 1.0;
  return w;
}

/// State shared by one run.
class Run {
 public:
  Run(const Problem& problem, const RunConfig& config, const std::string& name)
      : p(problem),
        cfg(config),
        mdp(*problem.mdp),
        T(problem.mdp->horizon()),
        S(problem.mdp->num_states()),
        A(problem.mdp->num_actions()),
        sim(*problem.mdp),
        validation_sim(*problem.mdp),
        root(config.seed) {
    transcript.algorithm = name;
    transcript.env = problem.spec;
    transcript.config = config;
    transcript.seed = config.seed;
    for (const auto& f : p.reward_class.members()) expert_moments.push_back(p.expert_profile.expected(f));
    if (p.expert_profile.num_states() != S || p.expert_profile.num_actions() != A || p.expert_profile.horizon() != T)
      throw StructuralError("expert profile does not match the mdp");
    for (const auto& pi : p.policy_class) check_policy_shape(mdp, pi);
    if (cfg.filter.rounds < 1) throw ConfigurationError("rounds: must be >= 1");
    if (cfg.filter.rollouts_per_round < 1) throw ConfigurationError("rollouts_per_round: must be >= 1");
  }

  const Problem& p;
  const RunConfig& cfg;
  const TabularMdp& mdp;
  const int T, S, A;
  Simulator sim;
  Simulator validation_sim;  // held-out rollouts, not charged to the run
  Rng root;
  std::vector<double> expert_moments;
  RunTranscript transcript;

  bool over_budget() const { return sim.interactions() >= cfg.interaction_budget; }

  double step_size(std::size_t strategies) const {
    return cfg.learner_step > 0.0 ? cfg.learner_step : game::default_step_size(strategies, cfg.filter.rounds);
  }

  PolicySequence initial_policy() const {
    if (cfg.initial_policy >= 0 && !p.policy_class.empty()) {
      if (cfg.initial_policy >= static_cast<int>(p.policy_class.size()))
        throw ConfigurationError("initial_policy: index " + std::to_string(cfg.initial_policy) + " outside the class");
      return p.policy_class[cfg.initial_policy];
    }
    return PolicySequence::stationary(StationaryPolicy::uniform(S, A), T);
  }

  int initial_index() const {
    return (cfg.initial_policy >= 0 && !p.policy_class.empty()) ? cfg.initial_policy : -1;
  }

  std::vector<double> estimate_moments(Simulator& s, const PolicySequence& pi, int rollouts, Rng rng) {
    std::vector<double> out(p.reward_class.size(), 0.0);
    for (int k = 0; k < rollouts; ++k) {
      Rng r = rng.split(k);
      const Trajectory tr = s.rollout(pi, r, 0.0, &p.reward_class);
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += tr.suffix_return_under.at(j) / rollouts;
    }
    return out;
  }

  /// J(pi_E, f) - J(pi, f) for every f, exact or from learner rollouts.
  std::vector<double> discriminator_payoffs(const PolicySequence& pi, Rng rng) {
    const auto learner = cfg.mode == OracleMode::Exact ? moments(mdp, pi, p.reward_class)
                                                        : estimate_moments(sim, pi, cfg.discriminator_rollouts, rng);
    std::vector<double> g(learner.size());
    for (std::size_t j = 0; j < g.size(); ++j) g[j] = expert_moments[j] - learner[j];
    return g;
  }

  void annotate(IterateRecord& rec, const PolicySequence& pi, int round) {
    if (p.mdp->true_reward()) rec.true_gap = gap_to_profile(p, pi);
    if (cfg.mode == OracleMode::Exact) {
      const auto m = moments(mdp, pi, p.reward_class);
      double worst = -INFINITY;
      for (std::size_t j = 0; j < m.size(); ++j) worst = std::max(worst, expert_moments[j] - m[j]);
      rec.validation_gap = worst;
    } else {
      const auto m = estimate_moments(validation_sim, pi, cfg.validation_rollouts, root.split(1'000'000 + round));
      double worst = -INFINITY;
      for (std::size_t j = 0; j < m.size(); ++j) worst = std::max(worst, expert_moments[j] - m[j]);
      rec.validation_gap = worst;
    }
  }

  bool gap_reached(const IterateRecord& rec) const {
    return cfg.gap_threshold >= 0.0 && rec.true_gap && *rec.true_gap <= cfg.gap_threshold;
  }

  struct OracleResult {
    int index;
    PolicySequence policy;
  };

  /// Best response to f: within the class when one is given, otherwise the soft
  /// optimum. Sampled mode first explores with uniform episodes until every
  /// reachable (t,s,a) with nonzero reward has been seen, then plans on the
  /// empirical model.
  OracleResult policy_oracle(const RewardFn& f, Rng rng) {
    if (cfg.mode == OracleMode::Exact) return plan(mdp, f);
    const PolicySequence uniform = PolicySequence::stationary(StationaryPolicy::uniform(S, A), T);
    const VisitationProfile reach = exact_visitation(mdp, uniform);
    std::set<std::tuple<int, int, int>> targets;
    for (int t = 1; t <= T; ++t)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
          if (reach(t, s, a) > 0.0 && std::abs(f(s, a)) > 1e-12) targets.emplace(t, s, a);
    const std::size_t layer = static_cast<std::size_t>(S) * A * S;
    std::vector<double> counts(layer * T, 0.0);
    std::vector<char> seen(static_cast<std::size_t>(S) * A, 0);
    std::uint64_t episode = 0;
    while (!targets.empty() && !over_budget()) {
      Rng r = rng.split(episode++);
      const Trajectory tr = sim.rollout(uniform, r);
      for (std::size_t k = 0; k < tr.steps.size(); ++k) {
        const auto& st = tr.steps[k];
        targets.erase({st.t, st.state, st.action});
        seen[static_cast<std::size_t>(st.state) * A + st.action] = 1;
        if (k + 1 < tr.steps.size())
          counts[(st.t - 1) * layer + (static_cast<std::size_t>(st.state) * A + st.action) * S + tr.steps[k + 1].state] += 1.0;
      }
    }
    std::vector<double> transitions(layer * T, 0.0);
    for (int t = 0; t < T; ++t)
      for (int sa = 0; sa < S * A; ++sa) {
        const std::size_t off = t * layer + static_cast<std::size_t>(sa) * S;
        double n = 0.0;
        for (int sp = 0; sp < S; ++sp) n += counts[off + sp];
        for (int sp = 0; sp < S; ++sp)
          transitions[off + sp] = n > 0.0 ? counts[off + sp] / n : (sp == sa / A ? 1.0 : 0.0);
      }
    std::vector<double> r(static_cast<std::size_t>(S) * A, 0.0);
    for (std::size_t j = 0; j < r.size(); ++j)
      if (seen[j]) r[j] = f.values()[j];
    const TabularMdp model(S, A, T, std::move(transitions),
                           std::vector<double>(mdp.start_dist().begin(), mdp.start_dist().end()));
    return plan(model, RewardFn(S, A, std::move(r), f.bound()));
  }

  OracleResult plan(const TabularMdp& model, const RewardFn& f) const {
    if (!p.policy_class.empty()) {
      std::vector<double> values;
      for (const auto& pi : p.policy_class) values.push_back(exact_policy_value(model, pi, f));
      const std::size_t k = argmax_lowest(values);
      return {static_cast<int>(k), p.policy_class[k]};
    }
    PolicySequence pi = game::soft_best_response_policy(model, f, cfg.temperature);
    if (cfg.greedy_soft_policy) pi = greedy_decode(pi);
    return {-1, std::move(pi)};
  }

  RewardFn decode_reward(const std::vector<double>& weights, std::size_t greedy) const {
    if (cfg.adversary_decode == Decode::Mixture) return mix_rewards(p.reward_class.members(), weights);
    return p.reward_class[greedy];
  }

  RunTranscript finish() {
    auto& its = transcript.iterates;
    if (its.empty()) throw ConfigurationError("run produced no iterates");
    std::size_t best = 0;
    for (std::size_t i = 0; i < its.size(); ++i)
      if (its[i].validation_gap && (!its[best].validation_gap || *its[i].validation_gap < *its[best].validation_gap - 1e-12))
        best = i;
    transcript.returned_policy = static_cast<int>(best);
    if (transcript.output_policy.horizon() == 0) transcript.output_policy = iterate_policy(its[best], p);
    transcript.total_interactions = sim.interactions();
    const RunErrors errs = compute_run_errors(transcript, p);
    transcript.eps_bar = errs.eps_bar;
    transcript.delta_bar = errs.delta_bar;
    transcript.eps_rl_bar = errs.eps_rl_bar;
    if (errs.eps.size() == its.size())
      for (std::size_t i = 0; i < its.size(); ++i) {
        its[i].learner_loss = errs.eps[i];
        its[i].adversary_loss = errs.delta[i];
      }
    return std::move(transcript);
  }
};

IterateRecord make_record(int round, int index, const PolicySequence& pi, std::size_t f_index,
                          std::vector<double> f_weights, std::uint64_t interactions, double alpha) {
  IterateRecord rec;
  rec.round = round;
  rec.policy_index = index;
  if (index < 0) rec.policy = pi;
  rec.reward_index = static_cast<int>(f_index);
  rec.reward_weights = std::move(f_weights);
  rec.env_interactions = interactions;
  rec.alpha = alpha;
  return rec;
}

RunTranscript run_irl(const Problem& problem, const RunConfig& config, bool dual) {
  Run run(problem, config, dual ? "dual_irl" : "primal_irl");
  const std::size_t K = problem.reward_class.size();
  auto adversary = game::make_learner(config.reward_learner, K, run.step_size(K));
  int index = run.initial_index();
  PolicySequence pi = run.initial_policy();
  std::vector<double> reward_sum(static_cast<std::size_t>(run.S) * run.A, 0.0);
  run.transcript.stop_reason = "rounds";
  for (int i = 1; i <= config.filter.rounds; ++i) {
    Rng rng = run.root.split(i);
    const std::uint64_t before = run.sim.interactions();
    const auto g = run.discriminator_payoffs(pi, rng.split(2));
    std::size_t f_index;
    std::vector<double> f_weights;
    RewardFn f;
    if (dual) {
      auto [next, w] = game::no_regret_step(adversary, g);
      adversary = std::move(next);
      f_index = game::greedy_choice(adversary);
      f_weights = config.adversary_decode == Decode::Mixture ? std::vector<double>(w.values().begin(), w.values().end())
                                                             : point_weights(K, f_index);
      f = run.decode_reward(f_weights, f_index);
    } else {
      f_index = argmax_lowest(g);
      f_weights = point_weights(K, f_index);
      f = problem.reward_class[f_index];
    }
    IterateRecord rec = make_record(i, index, pi, f_index, f_weights, before, 1.0);
    run.annotate(rec, pi, i);
    const bool reached = run.gap_reached(rec);
    run.transcript.iterates.push_back(std::move(rec));
    if (reached) {
      run.transcript.stop_reason = "gap_threshold";
      break;
    }
    if (run.over_budget()) {
      run.transcript.stop_reason = "budget";
      break;
    }
    if (i == config.filter.rounds) break;
    RewardFn target = f;
    if (!dual) {
      const auto vals = f.values();
      for (std::size_t j = 0; j < reward_sum.size(); ++j) reward_sum[j] += vals[j];
      std::vector<double> avg(reward_sum);
      for (double& v : avg) v /= i;
      target = RewardFn(run.S, run.A, std::move(avg), problem.reward_class.max_bound());
    }
    auto result = run.policy_oracle(target, rng.split(1));
    index = result.index;
    pi = std::move(result.policy);
  }
  return run.finish();
}

struct ResetSample {
  int t;
  int state;
  int action;
  bool expert_reset;
  std::vector<double> returns;  // per reward-class member
};

RunTranscript run_nrmm_family(const Problem& problem, const RunConfig& config, const std::string& name, bool dual) {
  Run run(problem, config, name);
  if (problem.policy_class.empty()) throw ConfigurationError("policy class is empty; NRMM-style runs need one");
  const auto& fc = config.filter;
  if (fc.alpha < 0.0 || fc.alpha > 1.0) throw ConfigurationError("alpha: must lie in [0,1]");
  const std::size_t K = problem.reward_class.size();
  const std::size_t P = problem.policy_class.size();
  const int T = run.T;
  const int A = run.A;
  auto adversary = game::make_learner(config.reward_learner, K, run.step_size(K));
  auto learner = game::make_learner(config.policy_learner, P, run.step_size(P));
  const bool no_regret_adversary = dual || fc.adversary_mode == AdversaryMode::NoRegret;
  int index = run.initial_index() < 0 ? 0 : run.initial_index();
  const StateDistributions expert_states = state_marginals(problem.expert_profile);
  std::vector<StationaryPolicy> expert_conditional;
  for (int t = 1; t <= T; ++t) expert_conditional.push_back(problem.expert_profile.conditional_policy(t));
  std::vector<double> cumulative(P, 0.0);
  double played = 0.0;
  bool warned = false;
  run.transcript.stop_reason = "rounds";
  for (int i = 1; i <= fc.rounds; ++i) {
    const double alpha = fc.alpha_schedule == AlphaSchedule::LinearAnneal
                             ? (fc.rounds > 1 ? 1.0 - static_cast<double>(i - 1) / (fc.rounds - 1) : 1.0)
                             : fc.alpha;
    const PolicySequence& pi = problem.policy_class[index];
    Rng rng = run.root.split(i);
    const std::uint64_t before = run.sim.interactions();

    std::vector<ResetSample> samples;
    if (config.mode == OracleMode::Sampled) {
      Rng reset_rng = rng.split(3);
      for (int j = 0; j < fc.rollouts_per_round; ++j) {
        Rng r = reset_rng.split(j);
        int t = 1 + static_cast<int>(r.uniform_index(T));
        const bool expert_reset = r.uniform() < alpha;
        int s;
        if (expert_reset) {
          while (!problem.expert_profile.covered(t)) {
            if (!warned) log_warning("expert occupancy has no mass at timestep " + std::to_string(t) + "; resampling t");
            warned = true;
            t = 1 + static_cast<int>(r.uniform_index(T));
          }
          s = static_cast<int>(r.categorical(expert_states[t - 1]));
        } else {
          s = run.sim.roll_in(pi, t, r);
        }
        const int a = static_cast<int>(r.uniform_index(A));
        const Trajectory tr = run.sim.rollout_from(t, s, a, pi, r, &problem.reward_class);
        ResetSample sample{t, s, a, expert_reset, {}};
        for (std::size_t k = 0; k < K; ++k) sample.returns.push_back(tr.suffix_return_under.at(k));
        samples.push_back(std::move(sample));
      }
    }

    // discriminator
    std::vector<double> g;
    if (config.mode == OracleMode::Sampled && fc.discriminator_loss_mode == DiscriminatorLoss::SuffixLevel) {
      g.assign(K, 0.0);
      int used = 0;
      for (const auto& smp : samples) {
        if (!smp.expert_reset) continue;
        ++used;
        const double w = A * (expert_conditional[smp.t - 1](smp.state, smp.action) - pi.at(smp.t)(smp.state, smp.action));
        for (std::size_t k = 0; k < K; ++k) g[k] += w * smp.returns[k];
      }
      // sum_t of the per-step difference, matching J(pi_E,f) - J(pi,f)
      for (double& x : g) x = used > 0 ? x * T / used : 0.0;
    } else {
      g = run.discriminator_payoffs(pi, rng.split(2));
    }
    std::size_t f_index;
    std::vector<double> f_weights;
    if (no_regret_adversary) {
      auto [next, w] = game::no_regret_step(adversary, g);
      adversary = std::move(next);
      f_index = game::greedy_choice(adversary);
      f_weights = config.adversary_decode == Decode::Mixture ? std::vector<double>(w.values().begin(), w.values().end())
                                                             : point_weights(K, f_index);
    } else {
      f_index = argmax_lowest(g);
      f_weights = point_weights(K, f_index);
    }

    // policy payoff of every class member on this round's data
    std::vector<double> v(P, 0.0);
    if (config.mode == OracleMode::Exact) {
      const RewardFn f = mix_rewards(problem.reward_class.members(), f_weights);
      const ValueTables q = evaluate_policy(run.mdp, pi, f);
      StateDistributions rollin = expert_states;
      if (alpha < 1.0) {
        const StateDistributions own = state_marginals(exact_visitation(run.mdp, pi));
        for (int t = 0; t < T; ++t)
          for (int s = 0; s < run.S; ++s) rollin[t][s] = alpha * expert_states[t][s] + (1.0 - alpha) * own[t][s];
      }
      for (std::size_t k = 0; k < P; ++k) v[k] = reset_payoff(rollin, problem.policy_class[k], q);
    } else {
      for (const auto& smp : samples) {
        double label = 0.0;
        for (std::size_t k = 0; k < K; ++k) label += f_weights[k] * smp.returns[k];
        for (std::size_t k = 0; k < P; ++k)
          v[k] += A * problem.policy_class[k].at(smp.t)(smp.state, smp.action) * label / fc.rollouts_per_round;
      }
    }

    IterateRecord rec = make_record(i, index, pi, f_index, f_weights, before, alpha);
    run.annotate(rec, pi, i);
    const bool reached = run.gap_reached(rec);
    run.transcript.iterates.push_back(std::move(rec));

    played += v[index];
    for (std::size_t k = 0; k < P; ++k) cumulative[k] += v[k];
    const double eps_online = (*std::max_element(cumulative.begin(), cumulative.end()) - played) / (static_cast<double>(i) * T);
    learner = game::no_regret_step(learner, v).first;
    const int next = dual ? static_cast<int>(argmax_lowest(v)) : static_cast<int>(game::greedy_choice(learner));

    if (reached) {
      run.transcript.stop_reason = "gap_threshold";
      break;
    }
    if (config.eps_threshold > 0.0 && eps_online <= config.eps_threshold) {
      run.transcript.stop_reason = "eps_threshold";
      break;
    }
    if (run.over_budget()) {
      run.transcript.stop_reason = "budget";
      break;
    }
    index = next;
  }
  return run.finish();
}

/// Class members grouped by identical step-t maps; each group keeps its lowest index.
std::vector<std::size_t> distinct_rows(const std::vector<PolicySequence>& cls, int t) {
  std::vector<std::size_t> reps;
  for (std::size_t k = 0; k < cls.size(); ++k) {
    bool dup = false;
    for (std::size_t r : reps)
      if (cls[r].at(t) == cls[k].at(t)) {
        dup = true;
        break;
      }
    if (!dup) reps.push_back(k);
  }
  return reps;
}

PolicySequence bc_from_profile(const VisitationProfile& profile, const std::vector<PolicySequence>& cls,
                               const std::map<int, StationaryPolicy>& pinned) {
  if (cls.empty()) throw ConfigurationError("behavioral cloning needs a policy class");
  std::vector<StationaryPolicy> steps;
  for (int t = 1; t <= profile.horizon(); ++t) {
    if (auto it = pinned.find(t); it != pinned.end()) {
      steps.push_back(it->second);
      continue;
    }
    std::vector<double> agreement;
    for (const auto& pi : cls) {
      double score = 0.0;
      for (int s = 0; s < profile.num_states(); ++s)
        for (int a = 0; a < profile.num_actions(); ++a) score += profile(t, s, a) * pi.at(t)(s, a);
      agreement.push_back(score);
    }
    steps.push_back(cls[argmax_lowest(agreement)].at(t));
  }
  return PolicySequence(std::move(steps));
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::DualIrl: return "dual_irl";
    case Algorithm::PrimalIrl: return "primal_irl";
    case Algorithm::Mmdp: return "mmdp";
    case Algorithm::NrmmBr: return "nrmm_br";
    case Algorithm::NrmmNr: return "nrmm_nr";
    case Algorithm::NrmmDual: return "nrmm_dual";
    case Algorithm::Filter: return "filter";
    case Algorithm::BehavioralCloning: return "bc";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
  for (auto a : {Algorithm::DualIrl, Algorithm::PrimalIrl, Algorithm::Mmdp, Algorithm::NrmmBr, Algorithm::NrmmNr,
                 Algorithm::NrmmDual, Algorithm::Filter, Algorithm::BehavioralCloning})
    if (to_string(a) == name) return a;
  throw ConfigurationError("algorithm.name: unknown algorithm '" + name + "'");
}

Problem make_problem(const envs::EnvBundle& env, const RunConfig& config) {
  Problem p;
  p.spec = env.spec;
  p.mdp = env.mdp;
  p.reward_class = env.reward_class;
  p.policy_class = env.policy_class;
  p.policy_labels = env.policy_labels;
  p.pinned = env.pinned;
  p.expert = env.expert;
  if (config.expert_demos > 0) {
    std::vector<Trajectory> demos;
    Rng rng = Rng(config.seed).split(0xde30);
    Simulator sim(*env.mdp);
    for (int k = 0; k < config.expert_demos; ++k) {
      Rng r = rng.split(k);
      demos.push_back(sim.rollout(env.expert, r));
    }
    p.expert_profile = empirical_expert_visitation(demos, env.mdp->num_states(), env.mdp->num_actions(), env.mdp->horizon());
  } else {
    p.expert_profile = exact_visitation(*env.mdp, env.expert);
  }
  return p;
}

RunTranscript run_dual_irl(const Problem& problem, const RunConfig& config) { return run_irl(problem, config, true); }

RunTranscript run_primal_irl(const Problem& problem, const RunConfig& config) { return run_irl(problem, config, false); }

RunTranscript run_filter(const Problem& problem, const RunConfig& config) {
  return run_nrmm_family(problem, config, "filter", false);
}

RunTranscript run_nrmm(const Problem& problem, const RunConfig& config) {
  RunConfig c = config;
  c.filter.alpha = 1.0;
  c.filter.alpha_schedule = AlphaSchedule::Fixed;
  return run_nrmm_family(problem, c, c.filter.adversary_mode == AdversaryMode::NoRegret ? "nrmm_nr" : "nrmm_br", false);
}

RunTranscript run_nrmm_dual(const Problem& problem, const RunConfig& config) {
  RunConfig c = config;
  c.filter.alpha = 1.0;
  c.filter.alpha_schedule = AlphaSchedule::Fixed;
  c.filter.adversary_mode = AdversaryMode::NoRegret;
  return run_nrmm_family(problem, c, "nrmm_dual", true);
}

game::PayoffMatrix mmdp_payoff_exact(const Problem& problem, int t, const PolicySequence& continuation) {
  const TabularMdp& mdp = *problem.mdp;
  const int T = mdp.horizon();
  const auto& cls = problem.policy_class;
  const auto& rewards = problem.reward_class;
  const std::vector<double> d = problem.expert_profile.state_marginal(t);
  std::vector<double> data(cls.size() * rewards.size());
  for (std::size_t j = 0; j < rewards.size(); ++j) {
    const ValueTables q = evaluate_policy(mdp, continuation, rewards[j]);
    double expert = 0.0;
    for (int s = 0; s < mdp.num_states(); ++s)
      for (int a = 0; a < mdp.num_actions(); ++a) expert += problem.expert_profile(t, s, a) * q.q(t, s, a);
    for (std::size_t k = 0; k < cls.size(); ++k) {
      double learner = 0.0;
      const auto& pi = cls[k].at(t);
      for (int s = 0; s < mdp.num_states(); ++s) {
        if (d[s] == 0.0) continue;
        for (int a = 0; a < mdp.num_actions(); ++a) learner += d[s] * pi(s, a) * q.q(t, s, a);
      }
      data[k * rewards.size() + j] = (learner - expert) / T;
    }
  }
  return game::PayoffMatrix(cls.size(), rewards.size(), std::move(data));
}

game::PayoffMatrix mmdp_payoff_sampled(const Problem& problem, int t, const PolicySequence& continuation, int samples,
                                       Rng& rng, Simulator& sim) {
  if (samples < 1) throw ConfigurationError("rollouts_per_round: must be >= 1");
  const TabularMdp& mdp = *problem.mdp;
  const int T = mdp.horizon();
  const int A = mdp.num_actions();
  const auto& cls = problem.policy_class;
  const std::size_t K = problem.reward_class.size();
  const std::vector<double> d = problem.expert_profile.state_marginal(t);
  const StationaryPolicy expert = problem.expert_profile.conditional_policy(t);
  std::vector<double> data(cls.size() * K, 0.0);
  for (int j = 0; j < samples; ++j) {
    Rng r = rng.split(j);
    const int s = static_cast<int>(r.categorical(d));
    const int a = static_cast<int>(r.uniform_index(A));
    const Trajectory tr = sim.rollout_from(t, s, a, continuation, r, &problem.reward_class);
    for (std::size_t k = 0; k < cls.size(); ++k) {
      const double w = A * (cls[k].at(t)(s, a) - expert(s, a));
      if (w == 0.0) continue;
      for (std::size_t f = 0; f < K; ++f) data[k * K + f] += w * tr.suffix_return_under.at(f);
    }
  }
  for (double& x : data) x /= static_cast<double>(samples) * T;
  return game::PayoffMatrix(cls.size(), K, std::move(data));
}

long hoeffding_sample_size(std::size_t policy_count, std::size_t reward_count, int horizon, int num_actions,
                           double epsilon, double delta) {
  if (!(epsilon > 0.0) || !(delta > 0.0 && delta < 1.0)) throw ConfigurationError("need epsilon > 0 and 0 < delta < 1");
  const double range = static_cast<double>(horizon) * num_actions;
  const double m = std::log(2.0 * policy_count * reward_count / delta) * range * range / (2.0 * epsilon * epsilon);
  return static_cast<long>(std::ceil(m));
}

RunTranscript run_mmdp(const Problem& problem, const RunConfig& config) {
  Run run(problem, config, "mmdp");
  const auto& cls = problem.policy_class;
  if (cls.empty()) throw ConfigurationError("policy class is empty; MMDP needs one");
  const int T = run.T;
  for (int t = 1; t <= T; ++t)
    if (!problem.pinned.count(t) && !problem.expert_profile.covered(t))
      throw ConfigurationError("expert occupancy has no mass at timestep " + std::to_string(t));
  PolicySequence sequence = PolicySequence::stationary(StationaryPolicy::uniform(run.S, run.A), T);
  for (const auto& [t, pi] : problem.pinned) sequence.set(t, pi);
  int round = 0;
  for (int t = T; t >= 1; --t) {
    if (problem.pinned.count(t)) continue;
    ++round;
    Rng rng = run.root.split(t);
    const std::uint64_t before = run.sim.interactions();
    const game::PayoffMatrix full = config.mode == OracleMode::Exact
                                        ? mmdp_payoff_exact(problem, t, sequence)
                                        : mmdp_payoff_sampled(problem, t, sequence, config.filter.rollouts_per_round, rng, run.sim);
    const auto reps = distinct_rows(cls, t);
    std::vector<double> reduced;
    for (std::size_t r : reps)
      for (std::size_t j = 0; j < full.cols(); ++j) reduced.push_back(full(r, j));
    const auto sol = game::solve_matrix_game(game::PayoffMatrix(reps.size(), full.cols(), std::move(reduced)),
                                             config.game_epsilon, config.game_max_rounds);
    std::vector<double> weights(cls.size(), 0.0);
    for (std::size_t r = 0; r < reps.size(); ++r) weights[reps[r]] = sol.row[r];
    const std::size_t chosen = reps[sol.row.argmax()];
    if (config.mmdp_decode == Decode::Mixture) {
      std::vector<StationaryPolicy> steps;
      std::vector<PolicySequence> members;
      std::vector<double> w;
      for (std::size_t r = 0; r < reps.size(); ++r) {
        members.push_back(PolicySequence::stationary(cls[reps[r]].at(t), T));
        w.push_back(sol.row[r]);
      }
      sequence.set(t, mix_policies(members, w).at(t));
    } else {
      sequence.set(t, cls[chosen].at(t));
    }
    IterateRecord rec;
    rec.round = round;
    rec.timestep = t;
    rec.policy_index = static_cast<int>(chosen);
    rec.policy_weights = std::move(weights);
    rec.reward_index = static_cast<int>(sol.col.argmax());
    rec.reward_weights.assign(sol.col.values().begin(), sol.col.values().end());
    rec.env_interactions = before;
    run.transcript.iterates.push_back(std::move(rec));
  }
  if (run.transcript.iterates.empty()) throw ConfigurationError("every timestep is pinned; nothing to solve");
  auto& last = run.transcript.iterates.back();
  run.annotate(last, sequence, round);
  run.transcript.output_policy = sequence;
  run.transcript.stop_reason = "timesteps";
  RunTranscript out = run.finish();
  out.returned_policy = static_cast<int>(out.iterates.size()) - 1;
  return out;
}

PolicySequence run_behavioral_cloning(const TabularMdp& mdp, const std::vector<Trajectory>& demos,
                                      const std::vector<PolicySequence>& policy_class,
                                      const std::map<int, StationaryPolicy>& pinned) {
  const VisitationProfile profile =
      empirical_expert_visitation(demos, mdp.num_states(), mdp.num_actions(), mdp.horizon());
  for (const auto& pi : policy_class) check_policy_shape(mdp, pi);
  return bc_from_profile(profile, policy_class, pinned);
}

RunTranscript run_bc(const Problem& problem, const RunConfig& config) {
  Run run(problem, config, "bc");
  PolicySequence pi = bc_from_profile(problem.expert_profile, problem.policy_class, problem.pinned);
  IterateRecord rec;
  rec.round = 1;
  rec.policy = pi;
  rec.reward_weights = point_weights(problem.reward_class.size(), 0);
  run.annotate(rec, pi, 1);
  run.transcript.iterates.push_back(std::move(rec));
  run.transcript.output_policy = pi;
  run.transcript.stop_reason = "offline";
  return run.finish();
}

RunTranscript run_algorithm(const Problem& problem, const RunConfig& config) {
  switch (config.algorithm) {
    case Algorithm::DualIrl: return run_dual_irl(problem, config);
    case Algorithm::PrimalIrl: return run_primal_irl(problem, config);
    case Algorithm::Mmdp: return run_mmdp(problem, config);
    case Algorithm::NrmmBr: {
      RunConfig c = config;
      c.filter.adversary_mode = AdversaryMode::BestResponse;
      return run_nrmm(problem, c);
    }
    case Algorithm::NrmmNr: {
      RunConfig c = config;
      c.filter.adversary_mode = AdversaryMode::NoRegret;
      return run_nrmm(problem, c);
    }
    case Algorithm::NrmmDual: return run_nrmm_dual(problem, config);
    case Algorithm::Filter: return run_filter(problem, config);
    case Algorithm::BehavioralCloning: return run_bc(problem, config);
  }
  throw ConfigurationError("unknown algorithm");
}

RunTranscript replay(const RunTranscript& transcript) {
  const Problem problem = make_problem(envs::make_env(transcript.env), transcript.config);
  return run_algorithm(problem, transcript.config);
}

}  // namespace filterlab::irl
