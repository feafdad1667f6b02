#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "llmmcts/provider.hpp"
#include "llmmcts/rng.hpp"
#include "llmmcts/similarity.hpp"
#include "llmmcts/worldsim.hpp"

namespace llmmcts {

inline constexpr double kProbabilityFloor = 1e-3;

// Counts over slots -> distribution. Entries with zero count get `floor`
// after normalization, then the vector is renormalized. `pre_renorm`, if
// given, receives the vector just before that final renormalization.
// All-zero counts yield the uniform distribution.
std::vector<double> placement_distribution(const std::vector<double>& counts,
                                           double floor = kProbabilityFloor,
                                           std::vector<double>* pre_renorm = nullptr);

// Independent per-movable categorical distributions over placement slots
// (containers first, then surfaces; see Scene::slot). Values are immutable:
// updates return a new Belief.
class Belief {
 public:
  Belief() = default;
  Belief(ScenePtr scene, std::vector<std::vector<double>> probs);

  const ScenePtr& scene() const { return scene_; }
  const std::vector<double>& probs(Index movable) const { return probs_[movable]; }
  double prob(Index movable, const Placement& p) const {
    return probs_[movable][scene_->slot(p)];
  }
  std::size_t size() const { return probs_.size(); }

  // Draws one slot for `movable`.
  std::size_t sample_slot(Index movable, Rng& rng) const;

  // {"apple.0": {"Inside(fridge.0)": 0.7, ...}, ...}
  nlohmann::json to_json() const;

  friend bool operator==(const Belief& a, const Belief& b) {
    return a.scene_ == b.scene_ && a.probs_ == b.probs_;
  }

 private:
  ScenePtr scene_;
  std::vector<std::vector<double>> probs_;
  std::vector<std::vector<double>> cdf_;
};

struct BeliefInitReport {
  std::vector<std::string> warnings;  // classes that fell back to uniform
  int provider_failures = 0;          // samples lost to ProviderError
};

// Commonsense prior: M placement samples per movable class, each phrase
// grounded to a fixture class and spread evenly over that class's instances;
// counts -> placement_distribution. Instances of a class share the class
// prior. A class with no groundable sample falls back to uniform.
Belief init_belief(const ScenePtr& scene, CommonsenseProvider& provider,
                   const SimilarityProvider& sim, int M, std::uint64_t seed,
                   BeliefInitReport* report = nullptr);

Belief uniform_belief(const ScenePtr& scene);
// Point mass on every movable's true placement (held items get a uniform row,
// never sampled).
Belief point_mass_belief(const SceneState& state);

// Observed movables become point masses; for the rest, slots inspected by
// `obs` are zeroed and the row renormalized (uniform over uninspected slots if
// nothing would remain). Held items are left unchanged.
Belief update_belief(const Belief& belief, const Observation& obs);

// Root sample: movables drawn independently from the belief; containers,
// surfaces and the agent pose copied from `known`. A held item stays held.
SceneState sample_state(const Belief& belief, const SceneState& known, Rng& rng);
// In-place variant for hot loops; `out` must share `known`'s scene.
void sample_state_into(const Belief& belief, const SceneState& known, Rng& rng, SceneState& out);

}  // namespace llmmcts
