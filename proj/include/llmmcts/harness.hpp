#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "llmmcts/agent.hpp"
#include "llmmcts/scene_io.hpp"
#include "llmmcts/scripted_provider.hpp"

namespace llmmcts {

enum class TaskKind { Simple, Comp, NovelSimple, NovelComp2, NovelComp3 };

inline constexpr TaskKind kAllTaskKinds[] = {TaskKind::Simple, TaskKind::Comp,
                                             TaskKind::NovelSimple, TaskKind::NovelComp2,
                                             TaskKind::NovelComp3};

std::string_view to_string(TaskKind k);
TaskKind parse_task_kind(std::string_view s);
// Goal predicates per task of this kind.
int predicate_count(TaskKind k);

struct TaskCategory {
  TaskKind kind = TaskKind::Simple;
  std::string apartment = "seen";
};

// A fixed furniture layout plus the distribution movables are drawn from.
struct Apartment {
  std::string name;
  std::vector<std::string> rooms;
  std::vector<Scene::FixtureSpec> containers;
  std::vector<Scene::FixtureSpec> surfaces;
  std::vector<std::pair<std::string, int>> movables;  // class -> instance count
  PlacementPriors placement_priors;

  static Apartment from_json(const nlohmann::json& j);
  static Apartment load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  ScenePtr build_scene() const;
};

// Samples every movable from the placement prior; containers start closed
// and the agent starts in a uniformly drawn room.
SceneState sample_scene(const Apartment& apartment, const ScenePtr& scene, Rng& rng,
                        const SimilarityProvider& sim = *default_similarity());

// Moves any instance that already satisfies a goal predicate to a slot that
// does not, redrawn from the same prior.
void unsatisfy_goal(SceneState& state, const GoalSpec& goal, const Apartment& apartment,
                    Rng& rng, const SimilarityProvider& sim = *default_similarity());

struct GoalPair {
  std::string object;
  Relation relation = Relation::Inside;
  std::string target;

  friend auto operator<=>(const GoalPair&, const GoalPair&) = default;
};

// Single-item goal pairs. Seen pairs feed the prompt dataset; novel pairs
// never appear in it.
struct TaskPools {
  std::vector<GoalPair> seen_simple;
  std::vector<GoalPair> novel_simple;

  static TaskPools from_json(const nlohmann::json& j);
  static TaskPools load(const std::filesystem::path& path);

  // Every goal of this kind: single pairs for the simple kinds, unordered
  // combinations of pairs with distinct objects for the compositional ones.
  std::vector<std::vector<GoalPair>> combinations(TaskKind kind) const;
};

GoalSpec goal_from_pairs(const std::vector<GoalPair>& pairs);

struct GeneratedTask {
  TaskSpec task;
  SceneState scene;
};

// `count` tasks drawn without replacement from the category's pool.
// Throws PoolExhausted when the pool is smaller than `count`.
std::vector<GeneratedTask> generate_tasks(const TaskCategory& category, int count,
                                          const std::map<std::string, Apartment>& apartments,
                                          const TaskPools& pools, std::uint64_t seed,
                                          const SimilarityProvider& sim = *default_similarity());

// Writes <id>.scene.json and <id>.task.json; returns the written paths.
std::vector<std::filesystem::path> write_tasks(const std::filesystem::path& dir,
                                               const std::vector<GeneratedTask>& tasks);

// Expert demonstrations on seen-pool tasks in the seen apartment, split at a
// random step into completed / remaining actions.
std::vector<PromptExample> generate_prompt_dataset(const Apartment& apartment,
                                                   const TaskPools& pools, int count,
                                                   std::uint64_t seed,
                                                   const SimilarityProvider& sim =
                                                       *default_similarity());

// --- evaluation -------------------------------------------------------------

struct RunConfig {
  std::string label;  // row name in the report; defaults to planner[/ablation]
  PlannerKind planner = PlannerKind::LlmMcts;
  Ablation ablation = Ablation::None;
  nlohmann::json provider = {{"kind", "scripted"}};
  SearchParams search;
  PolicyParams policy;
  int belief_samples = 10;
  int max_steps = kDefaultStepBudget;
  int episodes = 20;
  std::uint64_t seed = 0;
  std::vector<TaskCategory> categories = {{TaskKind::Simple, "seen"}};
  std::map<std::string, std::filesystem::path> apartment_files;
  std::filesystem::path task_pools;
  std::filesystem::path dataset;  // empty: zero-shot prompts
  std::filesystem::path out;
  int workers = 1;
  bool resume = false;

  // Relative paths resolve against `base_dir` (the config file's directory).
  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
  static RunConfig load(const std::filesystem::path& path);
  // Only fields that affect results; output location and parallelism are left out.
  nlohmann::json to_json() const;
  AgentConfig agent_config() const;
  std::string row_label() const;
};

std::shared_ptr<CommonsenseProvider> make_provider(const nlohmann::json& spec,
                                                   const std::filesystem::path& base_dir = ".");

struct EpisodeRow {
  std::string label;
  std::string task_id;
  std::string category;
  std::string apartment;
  std::uint64_t seed = 0;
  std::string instruction;
  std::string translated_goal;  // goal_label of the parsed goal, if any
  EpisodeResult result;

  // Summary only; `full` adds the trajectory.
  nlohmann::json to_json(bool full = false) const;
  static EpisodeRow from_json(const nlohmann::json& j);
};

struct CellStats {
  std::string label;
  std::string category;
  std::string apartment;
  int episodes = 0;
  int successes = 0;
  double mean = 0;  // percent
  double sem = 0;   // percent

  nlohmann::json to_json() const;
  static CellStats from_json(const nlohmann::json& j);
};

// Standard error of a Bernoulli sample mean, percent scale.
double sem_percent(int successes, int n);
CellStats cell_stats(const std::string& label, const std::string& category,
                     const std::string& apartment, int successes, int n);

struct Report {
  nlohmann::json config;  // RunConfig::to_json of each merged run
  std::vector<CellStats> cells;
  std::vector<EpisodeRow> episodes;

  nlohmann::json to_json() const;
  static Report from_json(const nlohmann::json& j);
  std::string to_csv() const;
  // Rows = labels, columns = 5 categories x 2 apartments, "mean±sem".
  std::string to_table() const;
};

Report merge_reports(const std::vector<Report>& reports);

using ProgressFn = std::function<void(const EpisodeRow&)>;

// Generates the tasks of every configured cell, runs them on a worker pool
// and aggregates. Episode rows are appended to <out>/episodes.jsonl as they
// finish; a provider outage stops the run after checkpointing and rethrows.
Report run_eval(const RunConfig& config, const ProgressFn& progress = {});
void write_report(const std::filesystem::path& dir, const Report& report);

}  // namespace llmmcts
