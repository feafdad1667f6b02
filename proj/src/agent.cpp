#include "llmmcts/agent.hpp"

#include <cctype>

#include "llmmcts/errors.hpp"
#include "llmmcts/grounding.hpp"

namespace llmmcts {

std::string_view to_string(PlannerKind k) {
  switch (k) {
    case PlannerKind::LlmMcts: return "llm_mcts";
    case PlannerKind::Uct: return "uct";
    case PlannerKind::PolicyOnly: return "policy_only";
  }
  return "?";
}

std::string_view to_string(Ablation a) {
  switch (a) {
    case Ablation::None: return "none";
    case Ablation::NoHeuristic: return "no_heuristic";
    case Ablation::UniformPrior: return "uniform_prior";
    case Ablation::FullyObservable: return "fully_observable";
  }
  return "?";
}

std::string_view to_string(FailureCause c) {
  switch (c) {
    case FailureCause::BudgetExhausted: return "budget_exhausted";
    case FailureCause::GoalParseFailure: return "goal_parse_failure";
    case FailureCause::PlannerAbort: return "planner_abort";
  }
  return "?";
}

PlannerKind parse_planner(std::string_view s) {
  if (s == "llm_mcts") return PlannerKind::LlmMcts;
  if (s == "uct") return PlannerKind::Uct;
  if (s == "policy_only") return PlannerKind::PolicyOnly;
  throw std::invalid_argument("unknown planner: " + std::string(s));
}

Ablation parse_ablation(std::string_view s) {
  if (s.empty() || s == "none") return Ablation::None;
  if (s == "no_heuristic") return Ablation::NoHeuristic;
  if (s == "uniform_prior") return Ablation::UniformPrior;
  if (s == "fully_observable") return Ablation::FullyObservable;
  throw std::invalid_argument("unknown ablation: " + std::string(s));
}

nlohmann::json step_to_json(const TrajectoryStep& s) {
  return {{"step", s.step},
          {"action", s.action},
          {"reward", s.reward},
          {"done", s.done},
          {"visible_count", s.visible.size()},
          {"visible", s.visible}};
}

nlohmann::json episode_to_json(const EpisodeResult& r) {
  nlohmann::json traj = nlohmann::json::array();
  for (const auto& s : r.trajectory) traj.push_back(step_to_json(s));
  nlohmann::json j = {{"success", r.success},
                      {"steps_taken", r.steps_taken},
                      {"failure_cause", r.failure_cause ? nlohmann::json(std::string(to_string(*r.failure_cause)))
                                                        : nlohmann::json(nullptr)},
                      {"trajectory", traj}};
  if (!r.detail.empty()) j["detail"] = r.detail;
  if (r.translated_goal) j["translated_goal"] = goal_label(*r.translated_goal);
  return j;
}

namespace {

std::vector<std::string> visible_ids(const Scene& sc, const Observation& o) {
  std::vector<std::string> out;
  for (const auto& c : o.containers) out.push_back(sc.containers()[c.index].id);
  for (auto f : o.surfaces) out.push_back(sc.surfaces()[f].id);
  for (const auto& m : o.movables) out.push_back(sc.movables()[m.index].id);
  return out;
}

bool is_done_phrase(std::string_view s) {
  std::string t;
  for (char c : s) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return t == "done";
}

// Observed placements must be point masses in the belief.
void check_belief(const Belief& b, const Observation& o) {
  for (const auto& m : o.movables) {
    if (m.location && b.prob(m.index, *m.location) != 1.0) {
      throw std::logic_error("belief disagrees with an observation");
    }
  }
}

// Shared episode prologue: goal translation.
bool translate(const std::string& instruction, const EpisodeDeps& deps, EpisodeResult& res) {
  try {
    res.translated_goal = translate_goal(instruction, *deps.provider, Catalog::household(),
                                         *deps.similarity);
    return true;
  } catch (const GoalParseFailure& e) {
    res.failure_cause = FailureCause::GoalParseFailure;
    res.detail = e.what();
    return false;
  } catch (const ProviderError& e) {
    res.failure_cause = FailureCause::GoalParseFailure;
    res.detail = e.what();
    return false;
  }
}

}  // namespace

EpisodeResult run_episode(const SceneState& initial, const std::string& instruction,
                          const GoalSpec& truth, const EpisodeDeps& deps,
                          const AgentConfig& config, std::uint64_t seed) {
  if (config.planner == PlannerKind::PolicyOnly) {
    return run_baseline_policy_only(initial, instruction, truth, deps, config, seed);
  }
  EpisodeResult res;
  if (!translate(instruction, deps, res)) return res;

  const ScenePtr& scene = initial.scene;
  const GoalTest truth_test(*scene, truth);
  const GoalTest believed(*scene, *res.translated_goal);

  const bool uct = config.planner == PlannerKind::Uct || config.ablation == Ablation::NoHeuristic;
  const bool uniform = config.planner == PlannerKind::Uct || config.ablation == Ablation::UniformPrior;

  Belief belief;
  if (config.ablation == Ablation::FullyObservable) {
    belief = point_mass_belief(initial);
  } else if (uniform) {
    belief = uniform_belief(scene);
  } else {
    BeliefInitReport report;
    belief = init_belief(scene, *deps.provider, *deps.similarity, config.belief_samples,
                         derive_seed(seed, 1), &report);
  }

  SearchParams params = config.search;
  params.mode = uct ? SelectionMode::Uct : SelectionMode::Puct;

  const auto examples =
      deps.dataset.empty() || uct
          ? std::vector<PromptExample>{}
          : retrieve_prompts(instruction, deps.dataset, config.policy.K, *deps.similarity);

  SearchContext ctx;
  ctx.params = &params;
  ctx.goal = &believed;
  ctx.goal_spec = &*res.translated_goal;
  ctx.instruction = instruction;
  ctx.examples = examples;
  if (!uct) {
    auto policy = std::make_shared<ProviderPolicy>(deps.provider, deps.similarity, config.policy);
    ctx.policy = [policy](const PolicyQuery& q, Rng& rng) { return (*policy)(q, rng); };
  }

  SceneState state = initial;
  Observation obs = observe(state);
  belief = update_belief(belief, obs);
  History h(obs);
  SearchTree tree;
  Rng rng(derive_seed(seed, 2));

  for (int t = 0; t < config.max_steps; ++t) {
    if (!params.reuse_tree) tree.clear();
    SearchResult found;
    try {
      found = search(h, belief, state, tree, ctx, rng);
    } catch (const NoSimulationsCompleted& e) {
      res.failure_cause = FailureCause::PlannerAbort;
      res.detail = e.what();
      return res;
    }
    if (!is_admissible(state, found.action)) {
      throw std::logic_error("planner chose an inadmissible action: " +
                             action_label(*scene, found.action));
    }
    StepResult step = step_with_reward(state, found.action, truth_test, params.goal_reward);
    state = std::move(step.state);
    obs = std::move(step.observation);
    belief = update_belief(belief, obs);
    check_belief(belief, obs);
    h.push(found.action, obs);
    if (params.reuse_tree) tree.prune_to(h.key());

    res.steps_taken = t + 1;
    res.trajectory.push_back({t, action_label(*scene, found.action), step.reward, step.done,
                              visible_ids(*scene, obs)});
    if (step.done) {
      res.success = true;
      return res;
    }
  }
  res.success = truth_test.satisfied(state);
  if (!res.success) res.failure_cause = FailureCause::BudgetExhausted;
  return res;
}

EpisodeResult run_baseline_policy_only(const SceneState& initial, const std::string& instruction,
                                       const GoalSpec& truth, const EpisodeDeps& deps,
                                       const AgentConfig& config, std::uint64_t seed) {
  EpisodeResult res;
  if (!translate(instruction, deps, res)) return res;

  const ScenePtr& scene = initial.scene;
  const GoalTest truth_test(*scene, truth);
  PolicyParams pp = config.policy;
  pp.lambda = 0.0;
  const ProviderPolicy policy(deps.provider, deps.similarity, pp);
  const auto examples =
      deps.dataset.empty()
          ? std::vector<PromptExample>{}
          : retrieve_prompts(instruction, deps.dataset, pp.K, *deps.similarity);

  SceneState state = initial;
  History h(observe(state));
  Rng rng(derive_seed(seed, 2));

  for (int t = 0; t < config.max_steps; ++t) {
    const auto admissible = admissible_actions(state);
    PolicyQuery q;
    q.scene = scene.get();
    q.goal = &*res.translated_goal;
    q.instruction = instruction;
    q.history = &h;
    q.admissible = admissible;
    q.examples = examples;

    const auto phrases = policy.sample_phrases(q, rng);
    std::vector<std::string> proposals;
    for (const auto& p : phrases) {
      if (!is_done_phrase(p)) proposals.push_back(p);
    }
    res.steps_taken = t + 1;
    if (!phrases.empty() && proposals.empty()) {
      // The policy believes it is finished; only the environment can agree.
      res.trajectory.push_back({t, "done", 0.0, false, {}});
      if (truth_test.satisfied(state)) {
        res.success = true;
        return res;
      }
      continue;
    }
    const auto dist = empirical_policy(*scene, admissible, proposals, 0.0, *deps.similarity,
                                       pp.threshold);
    const Action a = dist.actions[dist.argmax()];
    StepResult step = step_with_reward(state, a, truth_test, config.search.goal_reward);
    state = std::move(step.state);
    h.push(a, step.observation);
    res.trajectory.push_back(
        {t, action_label(*scene, a), step.reward, step.done, visible_ids(*scene, step.observation)});
    if (step.done) {
      res.success = true;
      return res;
    }
  }
  res.success = truth_test.satisfied(state);
  if (!res.success) res.failure_cause = FailureCause::BudgetExhausted;
  return res;
}

}  // namespace llmmcts
