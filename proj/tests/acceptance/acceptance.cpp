// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Data files are found through LLMMCTS_DATA_DIR.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "llmmcts/agent.hpp"
#include "llmmcts/belief.hpp"
#include "llmmcts/grounding.hpp"
#include "llmmcts/harness.hpp"
#include "llmmcts/llm_adapter.hpp"
#include "llmmcts/mcts.hpp"
#include "llmmcts/policy.hpp"
#include "llmmcts/scripted_provider.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace llmmcts;
using namespace llmmcts::testing;
namespace fs = std::filesystem;

namespace {

fs::path data_dir() {
  const char* d = std::getenv("LLMMCTS_DATA_DIR");
  return fs::absolute(d ? d : "data");
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Every episode of every run, for the budget criterion.
std::vector<EpisodeRow> g_all_episodes;

RunConfig base_config(PlannerKind planner, Ablation ablation, nlohmann::json provider) {
  RunConfig c;
  c.planner = planner;
  c.ablation = ablation;
  c.provider = std::move(provider);
  c.search.n_sims = 100;
  c.episodes = 20;
  c.seed = 7;
  c.apartment_files = {{"seen", data_dir() / "apartments" / "seen.json"},
                       {"unseen", data_dir() / "apartments" / "unseen.json"}};
  c.task_pools = data_dir() / "task_pools.json";
  c.dataset = data_dir() / "prompt_dataset.jsonl";
  c.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return c;
}

// Accurate priors: the scene generator's own placement distribution.
nlohmann::json scripted(const std::string& mode, double noise = 0.0) {
  nlohmann::json j = {{"kind", "scripted"},
                      {"priors_file", (data_dir() / "apartments" / "seen.json").string()},
                      {"mode", mode},
                      {"seed", 11}};
  if (mode == "noisy") j["p"] = noise;
  return j;
}

Report run(const RunConfig& c) {
  Report r = run_eval(c);
  g_all_episodes.insert(g_all_episodes.end(), r.episodes.begin(), r.episodes.end());
  return r;
}

double rate(const Report& r, const std::string& category = "Simple") {
  for (const auto& c : r.cells) {
    if (c.category == category) return c.mean;
  }
  throw std::runtime_error("no cell for category " + category);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// --- 1-4: scripted reproductions ----------------------------------------------------------

Report g_full;

Outcome uct_collapse() {
  auto c = base_config(PlannerKind::Uct, Ablation::None, scripted("perfect"));
  c.search.n_sims = 500;
  const Report r = run(c);
  const double s = rate(r);
  return {s <= 5.0, fmt("uct success %.1f%% (<= 5%%)", s)};
}

Outcome full_method() {
  g_full = run(base_config(PlannerKind::LlmMcts, Ablation::None, scripted("perfect")));
  const double s = rate(g_full);
  return {s >= 85.0, fmt("llm_mcts success %.1f%% (>= 85%%)", s)};
}

Outcome ablation_ordering() {
  const double full = rate(g_full);
  const double uniform = rate(run(base_config(PlannerKind::LlmMcts, Ablation::UniformPrior, scripted("perfect"))));
  const double no_heur = rate(run(base_config(PlannerKind::LlmMcts, Ablation::NoHeuristic, scripted("perfect"))));
  const double fo = rate(run(base_config(PlannerKind::LlmMcts, Ablation::FullyObservable, scripted("perfect"))));
  const bool ok = full >= uniform && no_heur <= 5.0 && fo >= full - 10.0;
  return {ok, fmt("full %.1f >= uniform_prior %.1f; no_heuristic %.1f <= 5; fully_observable %.1f >= %.1f",
                  full, uniform, no_heur, fo, full - 10.0)};
}

Outcome compositional_degradation() {
  auto c = base_config(PlannerKind::LlmMcts, Ablation::None, scripted("noisy", 0.2));
  c.categories = {{TaskKind::Simple, "seen"}, {TaskKind::NovelComp2, "seen"}, {TaskKind::NovelComp3, "seen"}};
  const Report r = run(c);
  const double s = rate(r, "Simple"), c2 = rate(r, "NovelComp2"), c3 = rate(r, "NovelComp3");
  return {c3 < c2 && c2 < s, fmt("noisy(0.2): comp3 %.1f < comp2 %.1f < simple %.1f", c3, c2, s)};
}

// --- 5: search vs value iteration ---------------------------------------------------------

Outcome search_oracle() {
  auto p = two_room_problem();
  const double reward = 100.0;
  const ValueIteration vi(p.start, p.goal, 0.95, reward);
  auto provider = std::make_shared<ScriptedProvider>(ScriptedProviderConfig{});
  auto policy = std::make_shared<ProviderPolicy>(provider, default_similarity(), PolicyParams{});
  SearchParams params;
  params.n_sims = 10000;
  params.gamma = 0.95;
  params.goal_reward = reward;
  params.c_puct = 40.0;
  GoalTest test(*p.scene, p.goal);
  SearchContext ctx;
  ctx.params = &params;
  ctx.goal = &test;
  ctx.goal_spec = &p.goal;
  ctx.policy = [policy](const PolicyQuery& q, Rng& rng) { return (*policy)(q, rng); };

  const auto t0 = std::chrono::steady_clock::now();
  History h(observe(p.start));
  SearchTree tree;
  Rng rng(1);
  const auto res = search(h, point_mass_belief(p.start), p.start, tree, ctx, rng);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  double worst = 0, best = -1;
  for (const auto& r : res.root) {
    worst = std::max(worst, std::abs(r.q - vi.q_value(p.start, r.action)));
    best = std::max(best, vi.q_value(p.start, r.action));
  }
  const bool optimal = vi.q_value(p.start, res.action) == best;
  return {worst <= 0.05 * reward && optimal && secs < 30,
          fmt("max |Q - Q_vi| %.3f (<= %.1f), optimal action %s, %.2fs", worst, 0.05 * reward,
              optimal ? "yes" : "no", secs)};
}

// --- 6: formulas ---------------------------------------------------------------------------

std::vector<double> oracle_policy(const std::vector<double>& scores, double lambda) {
  const double n = static_cast<double>(scores.size());
  const double eta = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
  double z = 0;
  for (double s : scores) z += std::exp(s - eta);
  std::vector<double> p;
  for (double s : scores) p.push_back(lambda / n + (1 - lambda) * std::exp(s - eta) / z);
  return p;
}

TreeNode two_action_node(int n, std::vector<int> na, std::vector<double> q) {
  TreeNode node;
  node.visits = n;
  node.actions = {Action::walk(room_ref(0)), Action::walk(room_ref(1))};
  node.action_visits = std::move(na);
  node.q = std::move(q);
  return node;
}

Outcome formulas() {
  double policy_err = 0;
  const std::vector<double> scores = {10, 0, 0, 0};
  for (double lambda : {1.0, 0.0, 0.5}) {
    const auto p = empirical_policy_from_scores(scores, lambda);
    const auto o = oracle_policy(scores, lambda);
    for (std::size_t i = 0; i < p.size(); ++i) policy_err = std::max(policy_err, std::abs(p[i] - o[i]));
  }
  // Frozen hand values.
  const auto p5 = empirical_policy_from_scores(scores, 0.5);
  const bool frozen = std::abs(p5[0] - 0.62493) < 1e-5 && std::abs(p5[1] - 0.12502) < 1e-5;

  const TreeNode puct = two_action_node(4, {3, 1}, {1.0, 0.0});
  const TreeNode uct = two_action_node(10, {8, 2}, {0.5, 0.4});
  const double sel_err = std::max({std::abs(puct_score(puct, 0, 0.5, 1.0) - 1.25),
                                   std::abs(puct_score(puct, 1, 0.5, 1.0) - 0.5),
                                   std::abs(uct_score(uct, 0, 1.0) - (0.5 + std::sqrt(std::log(10.0) / 8))),
                                   std::abs(uct_score(uct, 1, 1.0) - (0.4 + std::sqrt(std::log(10.0) / 2)))});
  const bool picks = select_puct(puct, std::vector<double>{0.5, 0.5}, 1.0) == 0 && select_uct(uct, 1.0) == 1;

  double shift_err = 0;
  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x(1 + uniform_index(rng, 8));
    for (auto& v : x) v = (uniform01(rng) - 0.5) * 40;
    const double c = (uniform01(rng) - 0.5) * 1e3;
    std::vector<double> y = x;
    for (auto& v : y) v += c;
    const auto px = softmax(x), py = softmax(y);
    for (std::size_t i = 0; i < x.size(); ++i) shift_err = std::max(shift_err, std::abs(px[i] - py[i]));
  }
  const bool ok = policy_err <= 1e-9 && frozen && sel_err <= 1e-12 && picks && shift_err <= 1e-12;
  return {ok, fmt("policy err %.1e, selection err %.1e, softmax shift err %.1e", policy_err, sel_err,
                  shift_err)};
}

// --- 7: belief -----------------------------------------------------------------------------

Outcome belief_suite() {
  // Floor before renormalization.
  std::vector<double> counts(22, 0.0);
  counts[0] = 7;
  counts[1] = 3;
  std::vector<double> pre;
  const auto dist = placement_distribution(counts, kProbabilityFloor, &pre);
  bool floor_ok = pre[0] == 0.7 && std::abs(dist[0] - 0.7 / 1.02) < 1e-12;
  for (std::size_t i = 2; i < pre.size(); ++i) floor_ok = floor_ok && pre[i] == 1e-3;

  // Randomized update sequences.
  Rng rng(2024);
  auto scene = small_scene({"apple", "plate", "mug"});
  double norm_err = 0;
  bool idempotent = true;
  for (int seq = 0; seq < 1000; ++seq) {
    SceneState s = initial_state(scene);
    for (auto& m : s.movables) m = scene->placement_of_slot(uniform_index(rng, scene->num_slots()));
    for (auto& o : s.open) o = bernoulli(rng, 0.5);
    std::vector<std::vector<double>> rows;
    for (std::size_t m = 0; m < s.movables.size(); ++m) {
      std::vector<double> row(scene->num_slots());
      for (auto& x : row) x = bernoulli(rng, 0.6) ? 0.01 + uniform01(rng) : 0.0;
      row[uniform_index(rng, row.size())] += 0.01;
      const double z = std::accumulate(row.begin(), row.end(), 0.0);
      for (auto& x : row) x /= z;
      rows.push_back(std::move(row));
    }
    Belief b(scene, rows);
    for (int step = 0; step < 12; ++step) {
      const auto acts = admissible_actions(s);
      apply(s, acts[uniform_index(rng, acts.size())]);
      const Observation o = observe(s);
      b = update_belief(b, o);
      idempotent = idempotent && update_belief(b, o) == b;
      for (Index m = 0; m < b.size(); ++m) {
        const auto& r = b.probs(m);
        norm_err = std::max(norm_err, std::abs(std::accumulate(r.begin(), r.end(), 0.0) - 1.0));
      }
    }
  }

  // Monte Carlo frequencies.
  auto one = small_scene({"apple"});
  std::vector<double> row(one->num_slots(), 0.0);
  row[one->slot(inside(*one, "fridge.0"))] = 0.7;
  row[one->slot(on(*one, "kitchentable.0"))] = 0.3;
  const Belief b(one, {row});
  const SceneState known = initial_state(one);
  Rng mc(17);
  int fridge = 0;
  for (int i = 0; i < 10000; ++i) fridge += sample_state(b, known, mc).movables[0] == inside(*one, "fridge.0");
  const double freq_err = std::abs(fridge / 10000.0 - 0.7);

  const bool ok = floor_ok && norm_err <= 1e-9 && idempotent && freq_err <= 0.02;
  return {ok, fmt("floor %s, max norm err %.1e over 1000 sequences, idempotent %s, MC err %.4f",
                  floor_ok ? "ok" : "missing", norm_err, idempotent ? "yes" : "no", freq_err)};
}

// --- 8: determinism ------------------------------------------------------------------------

Outcome determinism() {
  auto c = base_config(PlannerKind::LlmMcts, Ablation::None, scripted("noisy", 0.2));
  c.episodes = 5;
  c.categories = {{TaskKind::Simple, "seen"}, {TaskKind::NovelComp2, "unseen"}};
  const std::string a = run(c).to_json().dump();
  const std::string b = run(c).to_json().dump();
  return {a == b, fmt("two run_eval payloads of %zu bytes %s", a.size(), a == b ? "identical" : "differ")};
}

// --- 9: grounding goldens ------------------------------------------------------------------

Outcome grounding_goldens() {
  const auto sim = default_similarity();
  const auto name = ground_name("the kitchen table", Catalog::household().all_names(), *sim);
  bool ok = name.canonical == "kitchentable";
  std::string detail = "\"the kitchen table\" -> " + name.canonical;

  LLMAdapterConfig cfg;
  cfg.cache_dir = (data_dir() / "fixtures").string();
  cfg.replay_only = true;
  auto client = std::make_shared<LLMClient>(cfg);
  LLMProvider provider(client);
  const std::vector<std::pair<std::string, GoalSpec>> goldens = {
      {"put one apple into the fridge", GoalSpec{{{"apple", Relation::Inside, "fridge", 1}}}},
      {"put one apple on the kitchen table and one plate inside the dishwasher",
       GoalSpec{{{"apple", Relation::On, "kitchentable", 1}, {"plate", Relation::Inside, "dishwasher", 1}}}}};
  for (const auto& [instruction, expected] : goldens) {
    try {
      const GoalSpec g = translate_goal(instruction, provider, Catalog::household(), *sim);
      ok = ok && g == expected;
      detail += "; " + goal_label(g);
    } catch (const std::exception& e) {
      ok = false;
      detail += "; error: " + std::string(e.what());
    }
  }
  ok = ok && client->network_requests() == 0;
  return {ok, detail};
}

// --- 10: budget ----------------------------------------------------------------------------

Outcome budget() {
  int worst = 0;
  for (const auto& e : g_all_episodes) {
    worst = std::max({worst, e.result.steps_taken, static_cast<int>(e.result.trajectory.size())});
  }
  return {worst <= kDefaultStepBudget && !g_all_episodes.empty(),
          fmt("max steps %d over %zu episodes (<= %d)", worst, g_all_episodes.size(), kDefaultStepBudget)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"uct collapse", uct_collapse},
      {"full method", full_method},
      {"ablation ordering", ablation_ordering},
      {"compositional degradation", compositional_degradation},
      {"search vs value iteration", search_oracle},
      {"formula suite", formulas},
      {"belief suite", belief_suite},
      {"determinism", determinism},
      {"grounding goldens", grounding_goldens},
      {"step budget", budget},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::printf("[%s] criterion %zu %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
