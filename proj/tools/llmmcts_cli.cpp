// llmmcts: task generation, evaluation runs, report merging, fixture recording.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "llmmcts/errors.hpp"
#include "llmmcts/harness.hpp"
#include "llmmcts/llm_adapter.hpp"

namespace fs = std::filesystem;
using namespace llmmcts;

namespace {

constexpr int kExitOutage = 3;

struct Overrides {
  std::string planner;
  std::string ablation;
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  std::optional<int> n_sims;
  std::optional<int> workers;
  std::string out;
  bool resume = false;
  bool quiet = false;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--planner", o.planner, "llm_mcts | uct | policy_only");
  cmd->add_option("--ablation", o.ablation, "none | no_heuristic | uniform_prior | fully_observable");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--episodes", o.episodes, "Episodes per category cell");
  cmd->add_option("--n-sims", o.n_sims, "Simulations per search");
  cmd->add_option("--workers", o.workers, "Parallel episode workers");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_flag("--resume", o.resume, "Skip episodes already in <out>/episodes.jsonl");
  cmd->add_flag("-q,--quiet", o.quiet, "No per-episode progress lines");
}

RunConfig load_config(const std::string& path, const Overrides& o) {
  RunConfig c = RunConfig::load(path);
  if (!o.planner.empty()) c.planner = parse_planner(o.planner);
  if (!o.ablation.empty()) c.ablation = parse_ablation(o.ablation);
  // The config's label names its own planner; an override gets the derived one.
  if (!o.planner.empty() || !o.ablation.empty()) c.label.clear();
  if (o.seed) c.seed = *o.seed;
  if (o.episodes) c.episodes = *o.episodes;
  if (o.n_sims) c.search.n_sims = *o.n_sims;
  if (o.workers) c.workers = *o.workers;
  if (!o.out.empty()) c.out = o.out;
  if (o.resume) c.resume = true;
  c.search.validate();
  return c;
}

int run_command(RunConfig config, bool quiet) {
  ProgressFn progress;
  if (!quiet) {
    progress = [](const EpisodeRow& r) {
      std::fprintf(stderr, "%-22s %-7s steps=%-2d %s\n", r.task_id.c_str(),
                   r.result.success ? "success" : "fail", r.result.steps_taken,
                   r.result.failure_cause ? std::string(to_string(*r.result.failure_cause)).c_str()
                                          : "");
    };
  }
  try {
    const Report report = run_eval(config, progress);
    std::cout << report.to_table();
    if (!config.out.empty()) std::cerr << "wrote " << (config.out / "report.json").string() << "\n";
    return 0;
  } catch (const ProviderOutage& e) {
    std::cerr << "provider outage: " << e.what() << "\nrerun with --resume to continue\n";
    return kExitOutage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LLM-guided Monte Carlo planning for household rearrangement"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;

  auto* gen = app.add_subcommand("gen-tasks", "Write scene and task files for every configured cell");
  gen->add_option("--config", config_path, "RunConfig JSON")->required()->check(CLI::ExistingFile);
  add_overrides(gen, overrides);

  auto* run = app.add_subcommand("run", "Run the configured evaluation and write the report");
  run->add_option("--config", config_path, "RunConfig JSON")->required()->check(CLI::ExistingFile);
  add_overrides(run, overrides);

  std::vector<std::string> inputs;
  std::string report_out;
  auto* rep = app.add_subcommand("report", "Merge report.json files into one table");
  rep->add_option("inputs", inputs, "report.json files or run directories")->required();
  rep->add_option("--out", report_out, "Directory for the merged report files");

  auto* rec = app.add_subcommand("record-fixtures",
                                 "Run with a live LLM provider, persisting every response");
  rec->add_option("--config", config_path, "RunConfig JSON with an llm provider")
      ->required()
      ->check(CLI::ExistingFile);
  add_overrides(rec, overrides);

  std::string apartment_path, pools_path, dataset_out;
  int dataset_count = 200;
  std::uint64_t dataset_seed = 0;
  auto* ds = app.add_subcommand("gen-dataset", "Generate the expert prompt dataset");
  ds->add_option("--apartment", apartment_path, "Apartment JSON")->required()->check(CLI::ExistingFile);
  ds->add_option("--pools", pools_path, "Task pool JSON")->required()->check(CLI::ExistingFile);
  ds->add_option("--count", dataset_count, "Number of examples")->check(CLI::PositiveNumber);
  ds->add_option("--seed", dataset_seed, "Seed");
  ds->add_option("--out", dataset_out, "Output JSONL")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const RunConfig c = load_config(config_path, overrides);
      if (c.out.empty()) throw std::invalid_argument("gen-tasks needs --out");
      std::map<std::string, Apartment> apartments;
      for (const auto& [name, path] : c.apartment_files) apartments.emplace(name, Apartment::load(path));
      const TaskPools pools = TaskPools::load(c.task_pools);
      for (const auto& cat : c.categories) {
        const std::string tag = std::string(to_string(cat.kind)) + ":" + cat.apartment;
        const auto tasks = generate_tasks(cat, c.episodes, apartments, pools,
                                          derive_seed(c.seed, stream_id("tasks/" + tag)));
        const auto dir = c.out / (std::string(to_string(cat.kind)) + "-" + cat.apartment);
        write_tasks(dir, tasks);
        std::cout << tasks.size() << " tasks -> " << dir.string() << "\n";
      }
      return 0;
    }
    if (*run) return run_command(load_config(config_path, overrides), overrides.quiet);
    if (*rec) {
      RunConfig c = load_config(config_path, overrides);
      if (c.provider.value("kind", "") != "llm") {
        throw std::invalid_argument("record-fixtures needs an llm provider in the config");
      }
      c.provider["replay_only"] = false;
      return run_command(std::move(c), overrides.quiet);
    }
    if (*rep) {
      std::vector<Report> reports;
      for (const auto& in : inputs) {
        fs::path p(in);
        if (fs::is_directory(p)) p /= "report.json";
        reports.push_back(Report::from_json(read_json(p)));
      }
      const Report merged = merge_reports(reports);
      if (!report_out.empty()) write_report(report_out, merged);
      std::cout << merged.to_table();
      return 0;
    }
    if (*ds) {
      const auto data = generate_prompt_dataset(Apartment::load(apartment_path),
                                                TaskPools::load(pools_path), dataset_count,
                                                dataset_seed);
      save_prompt_dataset(dataset_out, data);
      std::cout << data.size() << " examples -> " << dataset_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
