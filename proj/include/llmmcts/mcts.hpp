#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "llmmcts/belief.hpp"
#include "llmmcts/history.hpp"
#include "llmmcts/policy.hpp"
#include "llmmcts/rng.hpp"
#include "llmmcts/worldsim.hpp"

namespace llmmcts {

enum class SelectionMode { Puct, Uct };

std::string_view to_string(SelectionMode m);
SelectionMode parse_selection_mode(std::string_view s);

struct SearchParams {
  int n_sims = 100;
  double gamma = 0.95;
  double epsilon = 0.05;  // stop descending once gamma^d < epsilon
  int max_depth = 25;     // hard cap on simulated depth
  double c_puct = 2.0;
  double c_uct = std::sqrt(2.0);
  double goal_reward = kDefaultGoalReward;
  SelectionMode mode = SelectionMode::Puct;
  bool cache_policy = true;  // compute pi-hat once per node
  bool reuse_tree = false;   // keep the subtree below the executed step
  int root_parallel = 1;     // independent trees merged at the root

  void validate() const;
  nlohmann::json to_json() const;
  static SearchParams from_json(const nlohmann::json& j);
};

struct TreeNode {
  int visits = 0;
  std::vector<Action> actions;  // admissible set, stable order
  std::vector<int> action_visits;
  std::vector<double> q;
  std::optional<std::vector<double>> prior;  // cached pi-hat (puct)
};

// Nodes keyed by the canonical history serialization.
class SearchTree {
 public:
  TreeNode* find(const std::string& key);
  const TreeNode* find(const std::string& key) const;
  TreeNode& insert(const std::string& key, TreeNode node);
  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }
  // Drops every node that is not `key` or below it.
  void prune_to(const std::string& key);

 private:
  std::unordered_map<std::string, TreeNode> nodes_;
};

// Q + c * prior * sqrt(N) / (N_a + 1) for action i.
double puct_score(const TreeNode& node, std::size_t i, double prior, double c);
// Q + c * sqrt(ln N / N_a) for a visited action i.
double uct_score(const TreeNode& node, std::size_t i, double c);

// argmax puct_score; ties -> higher prior, then order.
std::size_t select_puct(const TreeNode& node, std::span<const double> prior, double c);
// Unvisited actions first (in order); otherwise argmax uct_score.
std::size_t select_uct(const TreeNode& node, double c);

// Produces pi-hat for a node from the history alone.
using PolicySource = std::function<PolicyDistribution(const PolicyQuery&, Rng&)>;

// What a search needs besides the tree: the goal as the agent understands it
// and the policy inputs.
struct SearchContext {
  const SearchParams* params = nullptr;
  const GoalTest* goal = nullptr;
  const GoalSpec* goal_spec = nullptr;
  std::string instruction;
  std::span<const PromptExample> examples;
  PolicySource policy;  // required in puct mode
};

struct TraceStep {
  std::string history;  // key digest
  std::string action;
  double reward = 0;
};

struct SimulationTrace {
  int index = 0;
  std::vector<TraceStep> path;
  double rollout = 0;
  double value = 0;
};

// Uniform random rollout from `s` (modified in place). Returns the
// discounted return; 0 when done or past the depth cutoff.
double rollout(SceneState& s, bool done, int depth, const SearchParams& params,
               const GoalTest& goal, Rng& rng);

// One pass of the recursive simulation. `s` is consumed; `h` is restored.
double simulate(SceneState& s, History& h, bool done, int depth, SearchTree& tree,
                const SearchContext& ctx, Rng& rng, SimulationTrace* trace = nullptr);

struct RootStat {
  Action action;
  int visits = 0;
  double q = 0;
};

struct SearchResult {
  Action action;
  int completed = 0;
  int aborted = 0;
  std::vector<RootStat> root;
  std::string last_error;  // diagnostics of the last aborted simulation
};

// N simulations from root-sampled states, then argmax Q among visited root
// actions (ties: more visits, then stable order). The root node is expanded
// before the first simulation so every simulation backs up through it.
// Throws NoSimulationsCompleted when every simulation aborted.
SearchResult search(History& h, const Belief& belief, const SceneState& known, SearchTree& tree,
                    const SearchContext& ctx, Rng& rng,
                    std::vector<SimulationTrace>* trace = nullptr);

nlohmann::json trace_to_json(const SimulationTrace& t);

}  // namespace llmmcts
