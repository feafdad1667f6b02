#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>

#include "llmmcts/policy.hpp"
#include "llmmcts/scripted_provider.hpp"
#include "test_support.hpp"

using namespace llmmcts;
using namespace llmmcts::testing;

namespace {

// Each listed text is its own basis vector: similarity 1 to itself, 0 to
// every other listed text.
class BasisSimilarity : public SimilarityProvider {
 public:
  explicit BasisSimilarity(const std::vector<std::string>& texts) {
    for (const auto& t : texts) index_.emplace(t, static_cast<std::uint32_t>(index_.size()));
  }
  std::size_t dimension() const override { return index_.size(); }
  Embedding embed(std::string_view text) const override {
    return {index_.size(), {{index_.at(std::string(text)), 1.0}}};
  }

 private:
  std::map<std::string, std::uint32_t> index_;
};

// Reference mixture written straight from the formula.
std::vector<double> oracle_policy(const std::vector<double>& scores, double lambda) {
  const double n = static_cast<double>(scores.size());
  const double eta = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
  double z = 0;
  for (double s : scores) z += std::exp(s - eta);
  std::vector<double> p;
  for (double s : scores) p.push_back(lambda / n + (1 - lambda) * std::exp(s - eta) / z);
  return p;
}

struct FourActions {
  ScenePtr scene = small_scene();
  SceneState state = initial_state(scene, "bedroom");
  std::vector<Action> actions;
  std::vector<std::string> rendered;

  FourActions() {
    actions = admissible_actions(state);  // 4 rooms + nightstand
    actions.resize(4);
    for (const auto& a : actions) rendered.push_back(render_action(*scene, a));
  }
};

}  // namespace

TEST(Softmax, ShiftInvariance) {
  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x(1 + uniform_index(rng, 8));
    for (auto& v : x) v = (uniform01(rng) - 0.5) * 40;
    const double c = (uniform01(rng) - 0.5) * 1e3;
    std::vector<double> y = x;
    for (auto& v : y) v += c;
    const auto px = softmax(x), py = softmax(y);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(px[i], py[i], 1e-12);
  }
}

TEST(EmpiricalPolicy, LambdaOneIsUniform) {
  const auto p = empirical_policy_from_scores(std::vector<double>{10, 0, 3, 0}, 1.0);
  for (double x : p) EXPECT_NEAR(x, 0.25, 1e-15);
}

TEST(EmpiricalPolicy, TaggedScoreExamples) {
  const std::vector<double> scores = {10, 0, 0, 0};
  // eta = 2.5, logits (7.5, -2.5, -2.5, -2.5).
  const auto p0 = empirical_policy_from_scores(scores, 0.0);
  const auto o0 = oracle_policy(scores, 0.0);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(p0[i], o0[i], 1e-12);
  EXPECT_NEAR(p0[0], 1.0 / (1.0 + 3.0 * std::exp(-10.0)), 1e-12);
  EXPECT_NEAR(p0[0], 0.99986, 1e-5);
  EXPECT_NEAR(p0[1], 4.5e-5, 1e-6);

  const auto p5 = empirical_policy_from_scores(scores, 0.5);
  const auto o5 = oracle_policy(scores, 0.5);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(p5[i], o5[i], 1e-12);
    EXPECT_GE(p5[i], 0.125);
  }
  EXPECT_NEAR(p5[0], 0.62493, 1e-5);
  EXPECT_NEAR(p5[1], 0.12502, 1e-5);
}

TEST(EmpiricalPolicy, FromPhrasesMatchesFormula) {
  FourActions f;
  const BasisSimilarity sim(f.rendered);
  const std::vector<std::string> samples(10, f.rendered[0]);
  for (double lambda : {0.0, 0.5, 1.0}) {
    const auto d = empirical_policy(*f.scene, f.actions, samples, lambda, sim);
    const auto o = oracle_policy({10, 0, 0, 0}, lambda);
    ASSERT_EQ(d.probs.size(), 4u);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(d.probs[i], o[i], 1e-9) << lambda;
    EXPECT_EQ(d.argmax(), 0u);
  }
}

TEST(EmpiricalPolicy, NoSamplesMeansUniform) {
  FourActions f;
  const auto d = empirical_policy(*f.scene, f.actions, {}, 0.0, *default_similarity());
  for (double x : d.probs) EXPECT_NEAR(x, 0.25, 1e-15);
}

TEST(EmpiricalPolicy, UngroundableSamplesAreDropped) {
  FourActions f;
  EmpiricalPolicyStats stats;
  const std::vector<std::string> samples = {"qqqq zzzz", f.rendered[1], "done"};
  const auto d = empirical_policy(*f.scene, f.actions, samples, 0.5, *default_similarity(),
                                  kGroundingThreshold, &stats);
  EXPECT_EQ(stats.kept, 1);
  EXPECT_EQ(stats.dropped, 2);
  EXPECT_EQ(d.argmax(), 1u);
}

TEST(PolicyProperty, SumPositivityPermutationAndMonotonicity) {
  Rng rng(31);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + uniform_index(rng, 10);
    std::vector<double> s(n);
    for (auto& v : s) v = uniform01(rng) * 10;
    const double lambda = uniform01(rng) * 0.99;
    const auto p = empirical_policy_from_scores(s, lambda);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
    for (double x : p) EXPECT_GE(x, lambda / static_cast<double>(n) - 1e-15);

    // Permutation equivariance.
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
    std::vector<double> sp(n);
    for (std::size_t i = 0; i < n; ++i) sp[i] = s[perm[i]];
    const auto pp = empirical_policy_from_scores(sp, lambda);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(pp[i], p[perm[i]], 1e-12);

    // Shift invariance of the whole mixture.
    std::vector<double> shifted = s;
    for (auto& v : shifted) v += 123.456;
    const auto ps = empirical_policy_from_scores(shifted, lambda);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(ps[i], p[i], 1e-12);

    // Raising one score raises its probability.
    if (n > 1) {
      const std::size_t k = uniform_index(rng, n);
      std::vector<double> up = s;
      up[k] += 0.5;
      EXPECT_GT(empirical_policy_from_scores(up, lambda)[k], p[k]);
    }
  }
}

TEST(PolicyProperty, NoiselessScriptedArgmaxIsTheExpertAction) {
  Rng rng(77);
  auto scene = small_scene({"apple", "plate", "mug"});
  ScriptedProviderConfig cfg;
  cfg.mode = PolicyMode::Noisy;
  cfg.noise = 0.0;
  cfg.placement_priors["apple"] = {{"inside fridge", 3}, {"on kitchen table", 1}};
  auto provider = std::make_shared<ScriptedProvider>(cfg);
  const ProviderPolicy policy(provider, default_similarity(), PolicyParams{});
  const GoalSpec goal{{{"apple", Relation::Inside, "fridge", 1}}};
  int checked = 0;
  for (int trial = 0; checked < 100 && trial < 1000; ++trial) {
    SceneState s = initial_state(scene);
    for (auto& m : s.movables) m = scene->placement_of_slot(uniform_index(rng, scene->num_slots()));
    for (auto& o : s.open) o = bernoulli(rng, 0.5);
    s.agent.room = static_cast<Index>(uniform_index(rng, 4));
    // A few random steps give a history with some knowledge in it.
    History h(observe(s));
    for (int k = 0, n = static_cast<int>(uniform_index(rng, 6)); k < n; ++k) {
      const auto acts = admissible_actions(s);
      const Action a = acts[uniform_index(rng, acts.size())];
      apply(s, a);
      h.push(a, observe(s));
    }
    if (goal_satisfied(s, goal)) continue;
    const auto acts = admissible_actions(s);
    PolicyQuery q;
    q.scene = scene.get();
    q.goal = &goal;
    q.history = &h;
    q.admissible = acts;
    const auto expert = provider->perfect_action(q);
    if (!expert) continue;
    const auto d = policy(q, rng);
    EXPECT_EQ(d.actions[d.argmax()], *expert) << action_label(*scene, *expert);
    ++checked;
  }
  EXPECT_EQ(checked, 100);
}

TEST(Retrieval, VerbatimInstructionRanksFirst) {
  std::vector<PromptExample> ds(3);
  ds[0].instruction = "put one mug inside the microwave";
  ds[1].instruction = "put one apple inside the fridge";
  ds[2].instruction = "put one book on the sofa";
  const auto idx = retrieve_prompt_indices("put one apple inside the fridge", ds, 1,
                                           *default_similarity());
  ASSERT_EQ(idx.size(), 1u);
  EXPECT_EQ(idx[0], 1u);
}

TEST(Retrieval, LargeKReturnsWholeDatasetSorted) {
  std::vector<PromptExample> ds(3);
  ds[0].instruction = "put one book on the sofa";
  ds[1].instruction = "put one apple inside the fridge";
  ds[2].instruction = "put one apple inside the microwave";
  const auto sim = default_similarity();
  const auto idx = retrieve_prompt_indices("put one apple inside the fridge", ds, 10, *sim);
  ASSERT_EQ(idx.size(), 3u);
  for (std::size_t i = 1; i < idx.size(); ++i) {
    EXPECT_GE(sim->similarity("put one apple inside the fridge", ds[idx[i - 1]].instruction),
              sim->similarity("put one apple inside the fridge", ds[idx[i]].instruction));
  }
}

TEST(Retrieval, NovelSimpleGolden) {
  std::vector<PromptExample> ds(2);
  ds[0].instruction = "put one plate on the kitchen table";
  ds[1].instruction = "put one chicken inside the fridge";
  // Token cosines: 4/sqrt(42) = 0.617 vs 5/6 = 0.833.
  const auto top = retrieve_prompts("put one plate inside the fridge", ds, 1, *default_similarity());
  ASSERT_EQ(top.size(), 1u);
  EXPECT_EQ(top[0].instruction, "put one chicken inside the fridge");
}
