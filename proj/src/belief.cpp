#include "llmmcts/belief.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "llmmcts/errors.hpp"
#include "llmmcts/grounding.hpp"

namespace llmmcts {

std::vector<double> placement_distribution(const std::vector<double>& counts, double floor,
                                           std::vector<double>* pre_renorm) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  std::vector<double> p(counts.size());
  if (total <= 0.0) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
    if (pre_renorm) *pre_renorm = p;
    return p;
  }
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = counts[i] > 0 ? counts[i] / total : floor;
  if (pre_renorm) *pre_renorm = p;
  const double z = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& x : p) x /= z;
  return p;
}

Belief::Belief(ScenePtr scene, std::vector<std::vector<double>> probs)
    : scene_(std::move(scene)), probs_(std::move(probs)) {
  cdf_.resize(probs_.size());
  for (std::size_t m = 0; m < probs_.size(); ++m) {
    cdf_[m].resize(probs_[m].size());
    std::partial_sum(probs_[m].begin(), probs_[m].end(), cdf_[m].begin());
  }
}

std::size_t Belief::sample_slot(Index movable, Rng& rng) const {
  const auto& c = cdf_[movable];
  const double u = uniform01(rng) * c.back();
  const auto it = std::upper_bound(c.begin(), c.end(), u);
  return it == c.end() ? c.size() - 1 : static_cast<std::size_t>(it - c.begin());
}

nlohmann::json Belief::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t m = 0; m < probs_.size(); ++m) {
    nlohmann::json row = nlohmann::json::object();
    for (std::size_t s = 0; s < probs_[m].size(); ++s) {
      row[scene_->id(scene_->placement_of_slot(s))] = probs_[m][s];
    }
    j[scene_->movables()[m].id] = row;
  }
  return j;
}

namespace {

std::vector<double> uniform_row(std::size_t n) {
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

}  // namespace

Belief init_belief(const ScenePtr& scene, CommonsenseProvider& provider,
                   const SimilarityProvider& sim, int M, std::uint64_t seed,
                   BeliefInitReport* report) {
  if (M < 1) throw std::invalid_argument("init_belief: M must be >= 1");
  const std::size_t slots = scene->num_slots();
  std::map<std::string, std::vector<double>> per_class;

  for (const auto& cls : scene->movable_classes()) {
    Rng rng(derive_seed(seed, stream_id(cls)));
    std::vector<double> counts(slots, 0.0);
    bool grounded = false;
    for (int i = 0; i < M; ++i) {
      std::vector<std::string> phrases;
      try {
        phrases = provider.sample_object_placements(cls, *scene, rng, i);
      } catch (const ProviderError&) {
        if (report) ++report->provider_failures;
        continue;
      }
      for (const auto& phrase : phrases) {
        const auto g = ground_placement(phrase, *scene, sim);
        if (!g) continue;
        std::vector<std::size_t> targets;
        for (const auto& ref : scene->instances_of(g->fixture_class)) {
          if ((ref.kind == EntityKind::Container) == (g->relation == Relation::Inside)) {
            targets.push_back(scene->slot({g->relation, ref.index}));
          }
        }
        for (auto s : targets) counts[s] += 1.0 / static_cast<double>(targets.size());
        grounded = grounded || !targets.empty();
      }
    }
    if (grounded) {
      per_class[cls] = placement_distribution(counts);
    } else {
      per_class[cls] = uniform_row(slots);
      if (report) report->warnings.push_back(cls + ": no groundable placement sample");
    }
  }

  std::vector<std::vector<double>> rows;
  rows.reserve(scene->movables().size());
  for (const auto& inst : scene->movables()) rows.push_back(per_class.at(inst.cls));
  return Belief(scene, std::move(rows));
}

Belief uniform_belief(const ScenePtr& scene) {
  return Belief(scene, std::vector<std::vector<double>>(scene->movables().size(),
                                                        uniform_row(scene->num_slots())));
}

Belief point_mass_belief(const SceneState& state) {
  const auto& sc = *state.scene;
  std::vector<std::vector<double>> rows;
  for (std::size_t m = 0; m < sc.movables().size(); ++m) {
    if (!state.movables[m]) {
      rows.push_back(uniform_row(sc.num_slots()));
      continue;
    }
    std::vector<double> row(sc.num_slots(), 0.0);
    row[sc.slot(*state.movables[m])] = 1.0;
    rows.push_back(std::move(row));
  }
  return Belief(state.scene, std::move(rows));
}

Belief update_belief(const Belief& belief, const Observation& obs) {
  const Scene& sc = *belief.scene();
  const std::size_t slots = sc.num_slots();
  std::vector<std::uint8_t> inspected(slots, 0);
  for (auto s : inspected_slots(sc, obs)) inspected[s] = 1;

  std::vector<std::vector<double>> rows;
  rows.reserve(belief.size());
  for (Index m = 0; m < belief.size(); ++m) {
    std::vector<double> row = belief.probs(m);
    if (const auto* seen = obs.find_movable(m)) {
      if (seen->location) {
        std::fill(row.begin(), row.end(), 0.0);
        row[sc.slot(*seen->location)] = 1.0;
      }
      rows.push_back(std::move(row));
      continue;
    }
    bool changed = false;
    for (std::size_t s = 0; s < slots; ++s) {
      if (inspected[s] && row[s] != 0.0) {
        row[s] = 0.0;
        changed = true;
      }
    }
    if (changed) {
      const double z = std::accumulate(row.begin(), row.end(), 0.0);
      if (z > 0.0) {
        for (auto& x : row) x /= z;
      } else {
        // The prior was wrong everywhere: spread over what is still unseen.
        const auto open = static_cast<double>(std::count(inspected.begin(), inspected.end(), 0));
        for (std::size_t s = 0; s < slots; ++s) {
          row[s] = open == 0 ? 1.0 / static_cast<double>(slots) : inspected[s] ? 0.0 : 1.0 / open;
        }
      }
    }
    rows.push_back(std::move(row));
  }
  return Belief(belief.scene(), std::move(rows));
}

void sample_state_into(const Belief& belief, const SceneState& known, Rng& rng,
                       SceneState& out) {
  out.scene = known.scene;
  out.open = known.open;
  out.agent = known.agent;
  out.movables.resize(known.movables.size());
  const Scene& sc = *known.scene;
  for (Index m = 0; m < known.movables.size(); ++m) {
    if (known.agent.held && *known.agent.held == m) {
      out.movables[m].reset();
      continue;
    }
    out.movables[m] = sc.placement_of_slot(belief.sample_slot(m, rng));
  }
}

SceneState sample_state(const Belief& belief, const SceneState& known, Rng& rng) {
  SceneState out;
  sample_state_into(belief, known, rng, out);
  return out;
}

}  // namespace llmmcts
