#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "llmmcts/belief.hpp"
#include "llmmcts/mcts.hpp"
#include "llmmcts/policy.hpp"
#include "llmmcts/provider.hpp"

namespace llmmcts {

inline constexpr int kDefaultStepBudget = 30;

enum class PlannerKind { LlmMcts, Uct, PolicyOnly };
enum class Ablation { None, NoHeuristic, UniformPrior, FullyObservable };
enum class FailureCause { BudgetExhausted, GoalParseFailure, PlannerAbort };

std::string_view to_string(PlannerKind k);
std::string_view to_string(Ablation a);
std::string_view to_string(FailureCause c);
PlannerKind parse_planner(std::string_view s);
Ablation parse_ablation(std::string_view s);

struct AgentConfig {
  PlannerKind planner = PlannerKind::LlmMcts;
  Ablation ablation = Ablation::None;
  SearchParams search;
  PolicyParams policy;
  int belief_samples = 10;  // M for the commonsense prior
  int max_steps = kDefaultStepBudget;
};

struct TrajectoryStep {
  int step = 0;
  std::string action;  // label, e.g. "Grab(apple.0)"; "done" for a no-op
  double reward = 0;
  bool done = false;
  std::vector<std::string> visible;  // instance ids in view afterwards
};

struct EpisodeResult {
  bool success = false;
  int steps_taken = 0;
  std::vector<TrajectoryStep> trajectory;
  std::optional<FailureCause> failure_cause;
  std::string detail;
  std::optional<GoalSpec> translated_goal;
};

nlohmann::json step_to_json(const TrajectoryStep& s);
nlohmann::json episode_to_json(const EpisodeResult& r);

// Everything an episode draws on besides the scene and instruction.
struct EpisodeDeps {
  std::shared_ptr<CommonsenseProvider> provider;
  std::shared_ptr<const SimilarityProvider> similarity = default_similarity();
  std::span<const PromptExample> dataset;  // retrieval pool for K-shot prompts
};

// Closed loop: translate the instruction, build the belief, then
// search -> execute -> observe -> update until the true goal holds or the
// step budget runs out. `truth` scores success and ends the episode; the
// planner itself only ever sees the translated goal.
EpisodeResult run_episode(const SceneState& initial, const std::string& instruction,
                          const GoalSpec& truth, const EpisodeDeps& deps,
                          const AgentConfig& config, std::uint64_t seed);

// Provider-as-policy baseline: M samples, pi-hat with lambda = 0, execute
// the argmax. No search, no belief. A "done" proposal is a no-op step.
EpisodeResult run_baseline_policy_only(const SceneState& initial, const std::string& instruction,
                                       const GoalSpec& truth, const EpisodeDeps& deps,
                                       const AgentConfig& config, std::uint64_t seed);

}  // namespace llmmcts
