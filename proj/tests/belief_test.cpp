#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "llmmcts/belief.hpp"
#include "llmmcts/scripted_provider.hpp"
#include "test_support.hpp"

using namespace llmmcts;
using namespace llmmcts::testing;

namespace {

// fridge + kitchentable + 20 other placement slots.
ScenePtr wide_scene() {
  std::vector<Scene::FixtureSpec> containers = {
      {"fridge", "kitchen"},         {"microwave", "kitchen"},      {"oven", "kitchen"},
      {"stove", "kitchen"},          {"dishwasher", "kitchen"},     {"kitchencabinet", "kitchen"},
      {"kitchencabinet", "kitchen"}, {"kitchencabinet", "kitchen"}, {"kitchencabinet", "kitchen"},
      {"bathroomcabinet", "bathroom"}, {"bathroomcounter", "bathroom"}};
  std::vector<Scene::FixtureSpec> surfaces = {
      {"kitchentable", "kitchen"}, {"kitchencounter", "kitchen"}, {"cuttingboard", "kitchen"},
      {"fryingpan", "kitchen"},    {"coffeetable", "livingroom"}, {"sofa", "livingroom"},
      {"bookshelf", "livingroom"}, {"cabinet", "livingroom"},     {"bed", "bedroom"},
      {"nightstand", "bedroom"},   {"floor", "bathroom"}};
  return std::make_shared<const Scene>(kFourRooms, containers, surfaces,
                                       std::vector<std::string>{"apple"});
}

double row_sum(const std::vector<double>& r) { return std::accumulate(r.begin(), r.end(), 0.0); }

// Row with random positive mass on a random subset of slots.
std::vector<double> random_row(std::size_t n, Rng& rng) {
  std::vector<double> row(n, 0.0);
  double z = 0;
  for (auto& x : row) {
    if (bernoulli(rng, 0.6)) x = 0.01 + uniform01(rng);
    z += x;
  }
  if (z == 0) {
    row[0] = 1;
    z = 1;
  }
  for (auto& x : row) x /= z;
  return row;
}

}  // namespace

TEST(PlacementDistribution, FloorThenRenormalize) {
  std::vector<double> counts(22, 0.0);
  counts[0] = 7;
  counts[1] = 3;
  std::vector<double> pre;
  const auto p = placement_distribution(counts, kProbabilityFloor, &pre);
  EXPECT_DOUBLE_EQ(pre[0], 0.7);
  for (std::size_t i = 2; i < 22; ++i) EXPECT_DOUBLE_EQ(pre[i], 1e-3);
  EXPECT_NEAR(p[0], 0.7 / 1.02, 1e-12);
  EXPECT_NEAR(p[1], 0.3 / 1.02, 1e-12);
  EXPECT_NEAR(p[5], 1e-3 / 1.02, 1e-12);
  EXPECT_NEAR(row_sum(p), 1.0, 1e-12);
}

TEST(InitBelief, SevenThreeSamplesOverTwentyTwoSlots) {
  auto scene = wide_scene();
  ASSERT_EQ(scene->num_slots(), 22u);
  FakeProvider fake;
  fake.placements = [](std::string_view, int i) {
    return std::vector<std::string>{i < 7 ? "inside fridge" : "on kitchen table"};
  };
  const Belief b = init_belief(scene, fake, *default_similarity(), 10, 1);
  const auto& row = b.probs(0);
  EXPECT_NEAR(b.prob(0, inside(*scene, "fridge.0")), 0.7 / 1.02, 1e-9);
  EXPECT_NEAR(b.prob(0, on(*scene, "kitchentable.0")), 0.3 / 1.02, 1e-9);
  EXPECT_NEAR(b.prob(0, on(*scene, "sofa.0")), 1e-3 / 1.02, 1e-9);
  EXPECT_NEAR(row_sum(row), 1.0, 1e-9);
  EXPECT_EQ(fake.placement_calls, 10);
}

TEST(InitBelief, SinglePlacementFormula) {
  auto scene = wide_scene();
  FakeProvider fake;
  fake.placements = [](std::string_view, int) { return std::vector<std::string>{"inside fridge"}; };
  const Belief b = init_belief(scene, fake, *default_similarity(), 10, 1);
  const double L = 21;
  EXPECT_NEAR(b.prob(0, inside(*scene, "fridge.0")), 1.0 / (1.0 + 1e-3 * L), 1e-9);
}

TEST(InitBelief, UngroundableSamplesFallBackToUniformWithWarning) {
  auto scene = wide_scene();
  FakeProvider fake;
  fake.placements = [](std::string_view, int) { return std::vector<std::string>{"qqqq zzzz"}; };
  BeliefInitReport report;
  const Belief b = init_belief(scene, fake, *default_similarity(), 10, 1, &report);
  for (double p : b.probs(0)) EXPECT_NEAR(p, 1.0 / 22, 1e-12);
  ASSERT_EQ(report.warnings.size(), 1u);
}

TEST(InitBelief, RecoversKnownDistribution) {
  // Five placements with distinct classes; the provider draws from p.
  auto scene = std::make_shared<const Scene>(
      kFourRooms, std::vector<Scene::FixtureSpec>{{"fridge", "kitchen"}, {"microwave", "kitchen"}},
      std::vector<Scene::FixtureSpec>{{"kitchentable", "kitchen"},
                                      {"coffeetable", "livingroom"},
                                      {"nightstand", "bedroom"}},
      std::vector<std::string>{"apple"});
  ScriptedProviderConfig cfg;
  cfg.placement_priors["apple"] = {{"inside fridge", 4},
                                   {"inside microwave", 1},
                                   {"on kitchen table", 2},
                                   {"on coffee table", 2},
                                   {"on nightstand", 1}};
  ScriptedProvider provider(cfg);
  const Belief b = init_belief(scene, provider, *default_similarity(), 1000, 3);
  const std::vector<std::pair<Placement, double>> truth = {
      {inside(*scene, "fridge.0"), 0.4},     {inside(*scene, "microwave.0"), 0.1},
      {on(*scene, "kitchentable.0"), 0.2},   {on(*scene, "coffeetable.0"), 0.2},
      {on(*scene, "nightstand.0"), 0.1}};
  double kl = 0;
  for (const auto& [p, pt] : truth) kl += pt * std::log(pt / b.prob(0, p));
  EXPECT_LT(kl, 0.05);
}

TEST(InitBelief, InstancesShareTheClassPrior) {
  auto scene = small_scene({"apple", "apple"});
  FakeProvider fake;
  fake.placements = [](std::string_view, int) { return std::vector<std::string>{"inside fridge"}; };
  const Belief b = init_belief(scene, fake, *default_similarity(), 4, 1);
  EXPECT_EQ(b.probs(0), b.probs(1));
  EXPECT_EQ(fake.placement_calls, 4);  // one query set per class
}

TEST(SampleState, PointMassAlwaysDrawn) {
  auto scene = small_scene();
  SceneState s = initial_state(scene);
  s.movables[0] = inside(*scene, "fridge.0");
  const Belief b = point_mass_belief(s);
  Rng rng(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_state(b, s, rng).movables[0], s.movables[0]);
}

TEST(SampleState, FrequenciesMatchBelief) {
  auto scene = small_scene({"apple"});
  std::vector<double> row(scene->num_slots(), 0.0);
  row[scene->slot(inside(*scene, "fridge.0"))] = 0.7;
  row[scene->slot(on(*scene, "kitchentable.0"))] = 0.3;
  const Belief b(scene, {row});
  const SceneState known = initial_state(scene);
  Rng rng(17);
  int fridge = 0;
  for (int i = 0; i < 10000; ++i) {
    fridge += sample_state(b, known, rng).movables[0] == inside(*scene, "fridge.0");
  }
  EXPECT_NEAR(fridge / 10000.0, 0.7, 0.02);
}

TEST(SampleState, ObjectsAreIndependent) {
  auto scene = small_scene({"apple", "plate"});
  std::vector<double> a(scene->num_slots(), 0.0), p(scene->num_slots(), 0.0);
  a[scene->slot(inside(*scene, "fridge.0"))] = 0.6;
  a[scene->slot(on(*scene, "kitchentable.0"))] = 0.4;
  p[scene->slot(on(*scene, "coffeetable.0"))] = 0.3;
  p[scene->slot(on(*scene, "nightstand.0"))] = 0.7;
  const Belief b(scene, {a, p});
  const SceneState known = initial_state(scene);
  Rng rng(23);
  int joint = 0, ma = 0, mp = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto s = sample_state(b, known, rng);
    const bool x = s.movables[0] == inside(*scene, "fridge.0");
    const bool y = s.movables[1] == on(*scene, "nightstand.0");
    ma += x;
    mp += y;
    joint += x && y;
  }
  EXPECT_NEAR(joint / 1e4, (ma / 1e4) * (mp / 1e4), 0.02);
  EXPECT_NEAR(joint / 1e4, 0.42, 0.02);
}

TEST(SampleState, HeldItemAndPoseAreCopied) {
  auto scene = small_scene();
  SceneState s = initial_state(scene);
  s.movables[0].reset();
  s.agent.held = 0;
  s.agent.proximity = surface_ref(surface(*scene, "kitchentable.0"));
  s.open[container(*scene, "fridge.0")] = 1;
  Rng rng(1);
  const auto t = sample_state(uniform_belief(scene), s, rng);
  EXPECT_FALSE(t.movables[0].has_value());
  EXPECT_EQ(t.agent, s.agent);
  EXPECT_EQ(t.open, s.open);
}

TEST(UpdateBelief, SeenObjectBecomesPointMass) {
  auto scene = small_scene();
  SceneState s = initial_state(scene);
  const Belief b = update_belief(uniform_belief(scene), observe(s));
  EXPECT_DOUBLE_EQ(b.prob(0, on(*scene, "kitchentable.0")), 1.0);
}

TEST(UpdateBelief, OpenedEmptyContainerIsMaskedOut) {
  auto scene = small_scene({"apple"});
  SceneState s = initial_state(scene);
  s.movables[0] = on(*scene, "nightstand.0");
  s.open[container(*scene, "fridge.0")] = 1;
  const Belief prior = uniform_belief(scene);
  const Belief b = update_belief(prior, observe(s));
  EXPECT_EQ(b.prob(0, inside(*scene, "fridge.0")), 0.0);
  EXPECT_EQ(b.prob(0, on(*scene, "kitchentable.0")), 0.0);  // surfaces in view
  EXPECT_GT(b.prob(0, inside(*scene, "microwave.0")), 0.0);  // closed: not inspected
  EXPECT_NEAR(row_sum(b.probs(0)), 1.0, 1e-12);
  // Remaining mass is the prior renormalized: 4 uninspected slots left.
  EXPECT_NEAR(b.prob(0, on(*scene, "nightstand.0")), 0.25, 1e-12);
}

TEST(UpdateBelief, WrongEverywhereFallsBackToUninspected) {
  auto scene = small_scene({"apple"});
  SceneState s = initial_state(scene);
  s.movables[0] = on(*scene, "nightstand.0");
  s.open[container(*scene, "fridge.0")] = 1;
  std::vector<double> row(scene->num_slots(), 0.0);
  row[scene->slot(inside(*scene, "fridge.0"))] = 0.5;
  row[scene->slot(on(*scene, "kitchentable.0"))] = 0.5;
  const Belief b = update_belief(Belief(scene, {row}), observe(s));
  // Inspected: fridge (open), kitchentable, kitchencounter. 4 slots remain.
  for (std::size_t slot = 0; slot < scene->num_slots(); ++slot) {
    const bool inspected = slot == scene->slot(inside(*scene, "fridge.0")) ||
                           slot == scene->slot(on(*scene, "kitchentable.0")) ||
                           slot == scene->slot(on(*scene, "kitchencounter.0"));
    EXPECT_NEAR(b.probs(0)[slot], inspected ? 0.0 : 0.25, 1e-12) << slot;
  }
}

TEST(BeliefProperty, NormalizationIdempotenceAndStickyZeros) {
  Rng rng(2024);
  auto scene = small_scene({"apple", "plate", "mug"});
  for (int seq = 0; seq < 1000; ++seq) {
    // Random true state, random prior, random walk of observations.
    SceneState s = initial_state(scene);
    for (auto& m : s.movables) m = scene->placement_of_slot(uniform_index(rng, scene->num_slots()));
    for (auto& o : s.open) o = bernoulli(rng, 0.5);
    std::vector<std::vector<double>> rows;
    for (std::size_t m = 0; m < s.movables.size(); ++m) rows.push_back(random_row(scene->num_slots(), rng));
    Belief b(scene, rows);
    std::vector<std::vector<std::uint8_t>> zero(s.movables.size(),
                                                std::vector<std::uint8_t>(scene->num_slots(), 0));
    for (int step = 0; step < 12; ++step) {
      const auto acts = admissible_actions(s);
      apply(s, acts[uniform_index(rng, acts.size())]);
      const Observation o = observe(s);
      const Belief next = update_belief(b, o);
      ASSERT_EQ(update_belief(next, o), next) << "idempotence";
      for (Index m = 0; m < next.size(); ++m) {
        ASSERT_NEAR(row_sum(next.probs(m)), 1.0, 1e-9);
        const auto* seen = o.find_movable(m);
        if (seen && seen->location) {
          ASSERT_DOUBLE_EQ(next.prob(m, *seen->location), 1.0);
          zero[m].assign(scene->num_slots(), 1);
          zero[m][scene->slot(*seen->location)] = 0;
          continue;
        }
        if (seen) continue;  // held
        // Zeros persist unless the reset fallback fired (row became uniform
        // over the uninspected slots).
        bool reset = false;
        for (std::size_t k = 0; k < scene->num_slots(); ++k) {
          if (zero[m][k] && next.probs(m)[k] > 0) reset = true;
        }
        if (reset) {
          for (auto k : inspected_slots(*scene, o)) ASSERT_EQ(next.probs(m)[k], 0.0);
          double level = 0;
          for (double x : next.probs(m)) {
            if (x == 0) continue;
            if (level == 0) level = x;
            ASSERT_DOUBLE_EQ(x, level);
          }
        }
        for (std::size_t k = 0; k < scene->num_slots(); ++k) zero[m][k] = next.probs(m)[k] == 0.0;
      }
      // Sampling respects the observation.
      Rng draw(static_cast<std::uint64_t>(seq * 100 + step));
      const SceneState sampled = sample_state(next, s, draw);
      for (const auto& vm : o.movables) {
        if (vm.location) {
          ASSERT_EQ(sampled.movables[vm.index], vm.location);
        }
      }
      b = next;
    }
  }
}
