#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <set>

#include "llmmcts/errors.hpp"
#include "llmmcts/harness.hpp"

using namespace llmmcts;
namespace fs = std::filesystem;

namespace {

fs::path data_dir() {
  const char* d = std::getenv("LLMMCTS_DATA_DIR");
  return d ? d : "data";
}

std::map<std::string, Apartment> apartments() {
  return {{"seen", Apartment::load(data_dir() / "apartments" / "seen.json")},
          {"unseen", Apartment::load(data_dir() / "apartments" / "unseen.json")}};
}

TaskPools pools() { return TaskPools::load(data_dir() / "task_pools.json"); }

// A small scripted run over the shipped data.
RunConfig small_config(PlannerKind planner, int episodes) {
  RunConfig c;
  c.planner = planner;
  c.provider = {{"kind", "scripted"},
                {"priors_file", (data_dir() / "apartments" / "seen.json").string()},
                {"mode", "perfect"},
                {"seed", 3}};
  c.search.n_sims = 30;
  c.episodes = episodes;
  c.seed = 99;
  c.apartment_files = {{"seen", data_dir() / "apartments" / "seen.json"},
                       {"unseen", data_dir() / "apartments" / "unseen.json"}};
  c.task_pools = data_dir() / "task_pools.json";
  c.dataset = data_dir() / "prompt_dataset.jsonl";
  return c;
}

std::set<GoalPair> dataset_pairs() {
  std::set<GoalPair> out;
  for (const auto& ex : load_prompt_dataset((data_dir() / "prompt_dataset.jsonl").string())) {
    for (const auto& p : ex.goal.predicates) out.insert({p.movable_class, p.relation, p.target_class});
  }
  return out;
}

}  // namespace

TEST(Sem, TaggedExamples) {
  EXPECT_NEAR(sem_percent(9, 10), 100 * std::sqrt(0.9 * 0.1 / 10), 1e-12);
  EXPECT_NEAR(sem_percent(9, 10), 9.49, 0.005);
  EXPECT_EQ(sem_percent(0, 10), 0.0);
  EXPECT_EQ(sem_percent(10, 10), 0.0);
  const auto c = cell_stats("LLM-MCTS", "Simple", "seen", 9, 10);
  EXPECT_DOUBLE_EQ(c.mean, 90.0);
  EXPECT_NEAR(c.sem, 9.49, 0.005);
  EXPECT_EQ(cell_stats("x", "Simple", "seen", 0, 10).mean, 0.0);
}

TEST(Apartments, ShippedLayoutsHaveEnoughPlacements) {
  for (const auto& [name, apt] : apartments()) {
    const auto scene = apt.build_scene();
    EXPECT_GE(scene->num_slots(), 20u) << name;
    EXPECT_EQ(scene->rooms().size(), 4u) << name;
  }
  // Seen and unseen differ in layout.
  const auto a = apartments();
  EXPECT_NE(a.at("seen").to_json().at("containers"), a.at("unseen").to_json().at("containers"));
}

TEST(Apartments, SampledScenesAreValidAndClosed) {
  const auto a = apartments();
  Rng rng(1);
  for (const auto& [name, apt] : a) {
    const auto scene = apt.build_scene();
    for (int i = 0; i < 50; ++i) {
      const SceneState s = sample_scene(apt, scene, rng);
      EXPECT_NO_THROW(validate(s));
      for (auto o : s.open) EXPECT_EQ(o, 0);
      for (const auto& m : s.movables) EXPECT_TRUE(m.has_value());
    }
  }
}

TEST(GenerateTasks, PredicateCountsAndUnsatisfiedStart) {
  const auto a = apartments();
  const auto p = pools();
  for (auto kind : kAllTaskKinds) {
    for (const std::string apt : {"seen", "unseen"}) {
      const auto tasks = generate_tasks({kind, apt}, 5, a, p, 17);
      ASSERT_EQ(tasks.size(), 5u);
      for (const auto& t : tasks) {
        EXPECT_EQ(static_cast<int>(t.task.goal.predicates.size()), predicate_count(kind));
        EXPECT_FALSE(goal_satisfied(t.scene, t.task.goal)) << t.task.id;
        EXPECT_EQ(t.task.instruction, render_goal(t.task.goal, t.scene.scene->catalog()));
      }
    }
  }
  EXPECT_EQ(predicate_count(TaskKind::Simple), 1);
  EXPECT_GE(predicate_count(TaskKind::Comp), 2);
  EXPECT_EQ(predicate_count(TaskKind::NovelComp3), 3);
}

TEST(GenerateTasks, DeterministicUnderSeedAndDrawnWithoutReplacement) {
  const auto a = apartments();
  const auto p = pools();
  const auto x = generate_tasks({TaskKind::Comp, "seen"}, 10, a, p, 5);
  const auto y = generate_tasks({TaskKind::Comp, "seen"}, 10, a, p, 5);
  std::set<std::string> goals;
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(task_to_json(x[i].task), task_to_json(y[i].task));
    EXPECT_EQ(scene_to_json(x[i].scene), scene_to_json(y[i].scene));
    goals.insert(goal_label(x[i].task.goal));
  }
  EXPECT_EQ(goals.size(), x.size());
}

TEST(GenerateTasks, PoolExhaustedWhenCountExceedsThePool) {
  const auto a = apartments();
  const auto p = pools();
  const int n = static_cast<int>(p.combinations(TaskKind::Simple).size());
  EXPECT_NO_THROW(generate_tasks({TaskKind::Simple, "seen"}, n, a, p, 1));
  EXPECT_THROW(generate_tasks({TaskKind::Simple, "seen"}, n + 1, a, p, 1), PoolExhausted);
}

TEST(GenerateTasks, NovelPairsNeverAppearInThePromptDataset) {
  const auto seen = dataset_pairs();
  ASSERT_FALSE(seen.empty());
  const auto p = pools();
  for (const auto& pair : p.novel_simple) EXPECT_FALSE(seen.count(pair)) << pair.object << " " << pair.target;
  // Novel compositional goals are not dataset goals either.
  std::set<std::string> dataset_goals;
  for (const auto& ex : load_prompt_dataset((data_dir() / "prompt_dataset.jsonl").string())) {
    dataset_goals.insert(goal_label(ex.goal));
  }
  for (auto kind : {TaskKind::NovelSimple, TaskKind::NovelComp2, TaskKind::NovelComp3}) {
    for (const auto& t : generate_tasks({kind, "seen"}, 10, apartments(), p, 3)) {
      EXPECT_FALSE(dataset_goals.count(goal_label(t.task.goal))) << t.task.id;
      if (kind == TaskKind::NovelSimple) {
        const auto& q = t.task.goal.predicates[0];
        EXPECT_FALSE(seen.count({q.movable_class, q.relation, q.target_class}));
      }
    }
  }
}

TEST(GenerateTasks, NovelSimpleGoldenPairIsInThePool) {
  const auto p = pools();
  const GoalPair plate_fridge{"plate", Relation::Inside, "fridge"};
  EXPECT_NE(std::find(p.novel_simple.begin(), p.novel_simple.end(), plate_fridge),
            p.novel_simple.end());
}

TEST(RunEval, ReportIsDeterministicAndSemMatchesRows) {
  const auto cfg = small_config(PlannerKind::LlmMcts, 4);
  const Report a = run_eval(cfg);
  const Report b = run_eval(cfg);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  EXPECT_EQ(a.to_csv(), b.to_csv());
  ASSERT_EQ(a.cells.size(), 1u);
  ASSERT_EQ(a.episodes.size(), 4u);
  int wins = 0;
  for (const auto& e : a.episodes) {
    wins += e.result.success;
    EXPECT_LE(e.result.steps_taken, cfg.max_steps);
  }
  EXPECT_EQ(a.cells[0].successes, wins);
  EXPECT_NEAR(a.cells[0].mean, 100.0 * wins / 4, 1e-12);
  const double p = wins / 4.0;
  EXPECT_NEAR(a.cells[0].sem, 100 * std::sqrt(p * (1 - p) / 4), 1e-12);
}

TEST(RunEval, ParallelWorkersGiveTheSameReport) {
  auto cfg = small_config(PlannerKind::LlmMcts, 4);
  const Report serial = run_eval(cfg);
  cfg.workers = 3;
  EXPECT_EQ(run_eval(cfg).to_json().dump(), serial.to_json().dump());
}

TEST(RunEval, ReportShapeAndMerge) {
  auto cfg = small_config(PlannerKind::PolicyOnly, 2);
  cfg.categories = {{TaskKind::Simple, "seen"}, {TaskKind::NovelComp2, "unseen"}};
  const Report po = run_eval(cfg);
  cfg.planner = PlannerKind::LlmMcts;
  const Report mcts = run_eval(cfg);
  const Report merged = merge_reports({po, mcts});
  EXPECT_EQ(merged.cells.size(), 4u);
  EXPECT_EQ(merged.episodes.size(), 8u);

  const std::string table = merged.to_table();
  EXPECT_NE(table.find("Seen Apartment"), std::string::npos);
  EXPECT_NE(table.find("Unseen Apartment"), std::string::npos);
  for (const char* h : {"Simple", "Comp.", "NovelSimple", "NovelComp.(2)", "NovelComp.(3)"}) {
    EXPECT_NE(table.find(h), std::string::npos) << h;
  }
  // Header lines plus one row per planner.
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 4);

  const Report back = Report::from_json(merged.to_json());
  EXPECT_EQ(back.to_json(), merged.to_json());
}

TEST(RunEval, WritesAndResumesFromTheCheckpoint) {
  auto cfg = small_config(PlannerKind::PolicyOnly, 3);
  cfg.out = fs::temp_directory_path() / ("llmmcts_harness_" + std::to_string(::getpid()));
  fs::remove_all(cfg.out);
  const Report first = run_eval(cfg);
  write_report(cfg.out, first);
  for (const char* f : {"report.json", "report.csv", "report.txt", "episodes.jsonl"}) {
    EXPECT_TRUE(fs::exists(cfg.out / f)) << f;
  }
  cfg.resume = true;
  int rerun = 0;
  const Report second = run_eval(cfg, [&](const EpisodeRow&) { ++rerun; });
  EXPECT_EQ(rerun, 0);
  EXPECT_EQ(second.to_json().dump(), first.to_json().dump());
  fs::remove_all(cfg.out);
}

TEST(RunConfigJson, RoundTripAndValidation) {
  const auto cfg = small_config(PlannerKind::Uct, 3);
  const auto back = RunConfig::from_json(cfg.to_json());
  EXPECT_EQ(back.to_json(), cfg.to_json());
  EXPECT_EQ(cfg.to_json().count("out"), 0u);
  EXPECT_EQ(cfg.agent_config().planner, PlannerKind::Uct);
  EXPECT_EQ(cfg.row_label(), "uct");
  EXPECT_THROW(RunConfig::from_json({{"planner", "gpt2"}}), std::invalid_argument);
  EXPECT_THROW(RunConfig::from_json({{"workers", 0}}), std::invalid_argument);
}

TEST(PolicyOnlyBaseline, NoiseLowersSuccessAndAdversarialNeverSucceeds) {
  // 50 seeded episodes: 20 + 20 Simple, 10 NovelSimple.
  auto cfg = small_config(PlannerKind::PolicyOnly, 20);
  cfg.categories = {{TaskKind::Simple, "seen"}, {TaskKind::Simple, "unseen"}};
  auto run50 = [&] {
    Report r = run_eval(cfg);
    auto more = cfg;
    more.episodes = 10;
    more.categories = {{TaskKind::NovelSimple, "seen"}};
    return merge_reports({r, run_eval(more)});
  };
  const Report perfect = run50();
  cfg.provider["mode"] = "noisy";
  cfg.provider["p"] = 0.5;
  const Report noisy = run50();
  cfg.provider["mode"] = "adversarial";
  cfg.episodes = 10;
  const Report adversarial = run_eval(cfg);
  auto wins = [](const Report& r) {
    int w = 0;
    for (const auto& c : r.cells) w += c.successes;
    return w;
  };
  ASSERT_EQ(perfect.episodes.size(), 50u);
  EXPECT_LT(wins(noisy), wins(perfect));
  EXPECT_EQ(wins(adversarial), 0);
}
