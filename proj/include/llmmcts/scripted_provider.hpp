#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "llmmcts/provider.hpp"
#include "llmmcts/similarity.hpp"

namespace llmmcts {

enum class PolicyMode { Perfect, Noisy, Adversarial, ScriptedTrace };

std::string_view to_string(PolicyMode m);
PolicyMode parse_policy_mode(std::string_view s);

struct WeightedPhrase {
  std::string phrase;  // "inside fridge", "on kitchen table"
  double weight = 1.0;
};

using PlacementPriors = std::map<std::string, std::vector<WeightedPhrase>>;

PlacementPriors priors_from_json(const nlohmann::json& j);
nlohmann::json priors_to_json(const PlacementPriors& priors);

struct ScriptedProviderConfig {
  PlacementPriors placement_priors;
  PolicyMode mode = PolicyMode::Perfect;
  double noise = 0.0;               // noisy(p): chance of a random admissible phrase
  std::vector<std::string> trace;   // scripted_trace: phrase for step i
  std::uint64_t seed = 0;

  // {"placement_priors": {...} | "priors_file": path, "mode", "p", "trace", "seed"}.
  // Relative priors_file paths resolve against `base_dir`.
  static ScriptedProviderConfig from_json(const nlohmann::json& j,
                                          const std::string& base_dir = ".");
  void validate() const;
};

// What the agent can know from its history alone.
struct Knowledge {
  Index room = 0;
  std::optional<EntityRef> proximity;
  std::optional<Index> held;
  std::vector<std::optional<Placement>> last_seen;  // per movable, never seen = nullopt
  std::vector<std::uint8_t> inspected;              // per slot
  std::vector<std::uint8_t> visible_now;            // per movable
  std::vector<std::int8_t> open_now;                // per container: 1/0, -1 not in view

  static Knowledge from_history(const Scene& scene, const History& history);
};

// The hand-written subgoal chain: find a needed item (most likely place
// first), grab it, bring it to the goal fixture, open if needed, put it.
// nullopt means the agent believes the goal is achieved ("done").
using SlotWeightFn = std::function<const std::vector<double>&(const std::string& cls)>;
std::optional<Action> expert_next_action(const Scene& scene, const GoalSpec& goal,
                                         const Knowledge& know, const SlotWeightFn& weights);

// Prior weight of every placement slot for one movable class.
std::vector<double> slot_weights(const Scene& scene, const PlacementPriors& priors,
                                 std::string_view movable_class, const SimilarityProvider& sim);

// Deterministic stand-in for an LLM: weighted placement priors plus a
// scripted policy. All randomness comes from the caller's stream mixed with
// the configured seed.
class ScriptedProvider : public CommonsenseProvider {
 public:
  explicit ScriptedProvider(ScriptedProviderConfig config,
                            std::shared_ptr<const SimilarityProvider> sim = default_similarity());

  std::string name() const override;
  std::vector<std::string> sample_object_placements(std::string_view object_class,
                                                    const Scene& scene, Rng& rng,
                                                    int sample) override;
  std::vector<std::string> sample_next_actions(const PolicyQuery& query, Rng& rng,
                                               int sample) override;
  std::string translate_goal_text(std::string_view instruction) override;

  // The action the perfect chain would take; nullopt = done.
  std::optional<Action> perfect_action(const PolicyQuery& query) const;

  const ScriptedProviderConfig& config() const { return config_; }

 private:
  const std::vector<double>& weights_for(const Scene& scene, const std::string& cls) const;

  ScriptedProviderConfig config_;
  std::shared_ptr<const SimilarityProvider> sim_;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::vector<double>> weight_cache_;
};

// Parses "put one apple inside the fridge and two plates on the kitchen
// table" into tuple lines "(apple, inside, fridge)", one per item.
std::string scripted_goal_tuples(std::string_view instruction, const Catalog& catalog);

}  // namespace llmmcts
