#include "llmmcts/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "llmmcts/errors.hpp"
#include "llmmcts/llm_adapter.hpp"

namespace llmmcts {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(TaskKind k) {
  switch (k) {
    case TaskKind::Simple: return "Simple";
    case TaskKind::Comp: return "Comp";
    case TaskKind::NovelSimple: return "NovelSimple";
    case TaskKind::NovelComp2: return "NovelComp2";
    case TaskKind::NovelComp3: return "NovelComp3";
  }
  return "?";
}

TaskKind parse_task_kind(std::string_view s) {
  for (auto k : kAllTaskKinds) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown task category: " + std::string(s));
}

int predicate_count(TaskKind k) {
  switch (k) {
    case TaskKind::Simple:
    case TaskKind::NovelSimple: return 1;
    case TaskKind::Comp:
    case TaskKind::NovelComp2: return 2;
    case TaskKind::NovelComp3: return 3;
  }
  return 1;
}

// --- apartments ---------------------------------------------------------------

Apartment Apartment::from_json(const json& j) {
  if (j.value("format_version", 0) != 1) throw SceneFormatError("apartment format_version must be 1");
  const Catalog& cat = Catalog::household();
  Apartment a;
  a.name = j.at("name").get<std::string>();
  a.rooms = j.at("rooms").get<std::vector<std::string>>();
  auto fixtures = [&](const char* key, ObjectKind kind) {
    std::vector<Scene::FixtureSpec> out;
    for (const auto& f : j.at(key)) {
      Scene::FixtureSpec spec{f.at("class").get<std::string>(), f.at("room").get<std::string>()};
      if (cat.kind_of(spec.cls) != kind) {
        throw SceneFormatError(std::string("apartment ") + key + " entry has wrong kind: " + spec.cls);
      }
      out.push_back(std::move(spec));
    }
    return out;
  };
  a.containers = fixtures("containers", ObjectKind::Container);
  a.surfaces = fixtures("surfaces", ObjectKind::Surface);
  for (const auto& [cls, n] : j.at("movables").items()) {
    if (cat.kind_of(cls) != ObjectKind::Movable) throw SceneFormatError("not a movable: " + cls);
    if (n.get<int>() < 1) throw SceneFormatError("movable count must be >= 1: " + cls);
    a.movables.emplace_back(cls, n.get<int>());
  }
  a.placement_priors = priors_from_json(j.at("placement_priors"));
  return a;
}

Apartment Apartment::load(const fs::path& path) { return from_json(read_json(path)); }

json Apartment::to_json() const {
  auto fixtures = [](const std::vector<Scene::FixtureSpec>& v) {
    json out = json::array();
    for (const auto& f : v) out.push_back({{"class", f.cls}, {"room", f.room}});
    return out;
  };
  json movs = json::object();
  for (const auto& [cls, n] : movables) movs[cls] = n;
  return {{"format_version", 1},
          {"name", name},
          {"rooms", rooms},
          {"containers", fixtures(containers)},
          {"surfaces", fixtures(surfaces)},
          {"movables", movs},
          {"placement_priors", priors_to_json(placement_priors)}};
}

ScenePtr Apartment::build_scene() const {
  std::vector<std::string> items;
  for (const auto& [cls, n] : movables) items.insert(items.end(), n, cls);
  return std::make_shared<const Scene>(rooms, containers, surfaces, std::move(items));
}

namespace {

std::size_t draw_slot(const std::vector<double>& w, Rng& rng) {
  double total = 0;
  for (double x : w) total += x;
  if (!(total > 0)) return uniform_index(rng, w.size());
  double u = uniform01(rng) * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (u < w[i]) return i;
    u -= w[i];
  }
  // Rounding left u at the end: take the last slot with weight.
  for (std::size_t i = w.size(); i-- > 0;) {
    if (w[i] > 0) return i;
  }
  return 0;
}

bool slot_matches(const Scene& sc, std::size_t slot, const GoalPredicate& p) {
  const Placement pl = sc.placement_of_slot(slot);
  if (pl.relation != p.relation) return false;
  const auto& target = pl.relation == Relation::Inside ? sc.containers()[pl.target]
                                                       : sc.surfaces()[pl.target];
  return target.cls == p.target_class;
}

}  // namespace

SceneState sample_scene(const Apartment& apartment, const ScenePtr& scene, Rng& rng,
                        const SimilarityProvider& sim) {
  SceneState s;
  s.scene = scene;
  s.open.assign(scene->containers().size(), 0);
  s.movables.resize(scene->movables().size());
  std::map<std::string, std::vector<double>> weights;
  for (std::size_t m = 0; m < scene->movables().size(); ++m) {
    const auto& cls = scene->movables()[m].cls;
    auto it = weights.find(cls);
    if (it == weights.end()) {
      it = weights.emplace(cls, slot_weights(*scene, apartment.placement_priors, cls, sim)).first;
    }
    s.movables[m] = scene->placement_of_slot(draw_slot(it->second, rng));
  }
  s.agent.room = static_cast<Index>(uniform_index(rng, scene->rooms().size()));
  validate(s);
  return s;
}

void unsatisfy_goal(SceneState& state, const GoalSpec& goal, const Apartment& apartment, Rng& rng,
                    const SimilarityProvider& sim) {
  const Scene& sc = *state.scene;
  for (const auto& p : goal.predicates) {
    for (std::size_t m = 0; m < sc.movables().size(); ++m) {
      if (sc.movables()[m].cls != p.movable_class || !state.movables[m]) continue;
      if (!slot_matches(sc, sc.slot(*state.movables[m]), p)) continue;
      auto w = slot_weights(sc, apartment.placement_priors, p.movable_class, sim);
      bool any = false;
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (slot_matches(sc, i, p)) w[i] = 0;
        any = any || w[i] > 0;
      }
      if (!any) {
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = slot_matches(sc, i, p) ? 0.0 : 1.0;
      }
      state.movables[m] = sc.placement_of_slot(draw_slot(w, rng));
    }
  }
}

// --- pools and task generation ----------------------------------------------------

namespace {

std::vector<GoalPair> pairs_from_json(const json& arr) {
  std::vector<GoalPair> out;
  for (const auto& e : arr) {
    out.push_back({e.at(0).get<std::string>(), parse_relation(e.at(1).get<std::string>()),
                   e.at(2).get<std::string>()});
  }
  return out;
}

bool distinct_objects(const std::vector<const GoalPair*>& v) {
  std::set<std::string> seen;
  for (const auto* p : v) {
    if (!seen.insert(p->object).second) return false;
  }
  return true;
}

std::vector<std::vector<GoalPair>> choose(const std::vector<GoalPair>& pairs, int k) {
  std::vector<std::vector<GoalPair>> out;
  const int n = static_cast<int>(pairs.size());
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  if (k > n) return out;
  while (true) {
    std::vector<const GoalPair*> pick;
    for (int i : idx) pick.push_back(&pairs[i]);
    if (distinct_objects(pick)) {
      std::vector<GoalPair> combo;
      for (const auto* p : pick) combo.push_back(*p);
      out.push_back(std::move(combo));
    }
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

}  // namespace

TaskPools TaskPools::from_json(const json& j) {
  TaskPools p;
  p.seen_simple = pairs_from_json(j.at("seen_simple"));
  p.novel_simple = pairs_from_json(j.at("novel_simple"));
  std::set<GoalPair> seen(p.seen_simple.begin(), p.seen_simple.end());
  for (const auto& n : p.novel_simple) {
    if (seen.count(n)) throw SceneFormatError("novel pair also in the seen pool: " + n.object);
  }
  return p;
}

TaskPools TaskPools::load(const fs::path& path) { return from_json(read_json(path)); }

std::vector<std::vector<GoalPair>> TaskPools::combinations(TaskKind kind) const {
  switch (kind) {
    case TaskKind::Simple: return choose(seen_simple, 1);
    case TaskKind::Comp: return choose(seen_simple, 2);
    case TaskKind::NovelSimple: return choose(novel_simple, 1);
    case TaskKind::NovelComp2: return choose(novel_simple, 2);
    case TaskKind::NovelComp3: return choose(novel_simple, 3);
  }
  return {};
}

GoalSpec goal_from_pairs(const std::vector<GoalPair>& pairs) {
  GoalSpec g;
  for (const auto& p : pairs) {
    auto it = std::find_if(g.predicates.begin(), g.predicates.end(), [&](const GoalPredicate& q) {
      return q.movable_class == p.object && q.relation == p.relation && q.target_class == p.target;
    });
    if (it != g.predicates.end()) {
      ++it->count;
    } else {
      g.predicates.push_back({p.object, p.relation, p.target, 1});
    }
  }
  return g;
}

namespace {

void check_goal_fits(const Scene& sc, const GoalSpec& goal, const std::string& apartment) {
  for (const auto& p : goal.predicates) {
    const auto have = sc.instances_of(p.movable_class).size();
    if (have < static_cast<std::size_t>(p.count) || sc.instances_of(p.target_class).empty()) {
      throw SceneFormatError("apartment " + apartment + " cannot host goal " + goal_label(goal));
    }
  }
}

}  // namespace

std::vector<GeneratedTask> generate_tasks(const TaskCategory& category, int count,
                                          const std::map<std::string, Apartment>& apartments,
                                          const TaskPools& pools, std::uint64_t seed,
                                          const SimilarityProvider& sim) {
  const auto pool = pools.combinations(category.kind);
  if (count < 0 || static_cast<std::size_t>(count) > pool.size()) {
    throw PoolExhausted(std::string(to_string(category.kind)) + " pool holds " +
                        std::to_string(pool.size()) + " goals, " + std::to_string(count) +
                        " requested");
  }
  auto ait = apartments.find(category.apartment);
  if (ait == apartments.end()) throw std::invalid_argument("unknown apartment: " + category.apartment);
  const Apartment& apt = ait->second;
  const ScenePtr scene = apt.build_scene();

  // Partial Fisher-Yates: the first `count` entries are the draw.
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng pick(derive_seed(seed, 0));
  for (int i = 0; i < count; ++i) {
    const std::size_t j = i + uniform_index(pick, order.size() - i);
    std::swap(order[i], order[j]);
  }

  std::vector<GeneratedTask> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i) + 1));
    const GoalSpec goal = goal_from_pairs(pool[order[i]]);
    check_goal_fits(*scene, goal, apt.name);
    SceneState state = sample_scene(apt, scene, rng, sim);
    unsatisfy_goal(state, goal, apt, rng, sim);

    char id[64];
    std::snprintf(id, sizeof id, "%s-%s-%03d", std::string(to_string(category.kind)).c_str(),
                  category.apartment.c_str(), i);
    TaskSpec task{id, render_goal(goal, scene->catalog()), goal,
                  std::string(to_string(category.kind)), category.apartment};
    out.push_back({std::move(task), std::move(state)});
  }
  return out;
}

std::vector<fs::path> write_tasks(const fs::path& dir, const std::vector<GeneratedTask>& tasks) {
  fs::create_directories(dir);
  std::vector<fs::path> out;
  for (const auto& t : tasks) {
    const auto scene_path = dir / (t.task.id + ".scene.json");
    const auto task_path = dir / (t.task.id + ".task.json");
    write_json(scene_path, scene_to_json(t.scene));
    write_json(task_path, task_to_json(t.task));
    out.push_back(scene_path);
    out.push_back(task_path);
  }
  return out;
}

std::vector<PromptExample> generate_prompt_dataset(const Apartment& apartment,
                                                   const TaskPools& pools, int count,
                                                   std::uint64_t seed,
                                                   const SimilarityProvider& sim) {
  ScriptedProviderConfig pc;
  pc.placement_priors = apartment.placement_priors;
  ScriptedProvider expert(pc);
  const ScenePtr scene = apartment.build_scene();
  const auto simple = pools.combinations(TaskKind::Simple);
  const auto comp = pools.combinations(TaskKind::Comp);

  Rng rng(seed);
  std::vector<PromptExample> out;
  for (int attempt = 0; static_cast<int>(out.size()) < count; ++attempt) {
    if (attempt > 20 * count) throw std::runtime_error("expert keeps failing; dataset incomplete");
    const auto& pool = attempt % 2 == 0 ? simple : comp;
    const GoalSpec goal = goal_from_pairs(pool[uniform_index(rng, pool.size())]);
    SceneState state = sample_scene(apartment, scene, rng, sim);
    unsatisfy_goal(state, goal, apartment, rng, sim);
    const std::string instruction = render_goal(goal, scene->catalog());

    History h(observe(state));
    std::vector<std::string> actions;
    for (int t = 0; t < kDefaultStepBudget; ++t) {
      const auto admissible = admissible_actions(state);
      PolicyQuery q;
      q.scene = scene.get();
      q.goal = &goal;
      q.instruction = instruction;
      q.history = &h;
      q.admissible = admissible;
      const auto a = expert.perfect_action(q);
      if (!a) break;
      apply(state, *a);
      actions.push_back(render_action(*scene, *a));
      h.push(*a, observe(state));
    }
    if (!goal_satisfied(state, goal) || actions.empty()) continue;

    const std::size_t k = uniform_index(rng, actions.size());
    PromptExample ex;
    ex.instruction = instruction;
    ex.completed_actions.assign(actions.begin(), actions.begin() + k);
    ex.observation = render_observation(
        *scene, k == 0 ? h.initial() : h.steps()[k - 1].observation);
    ex.next_actions.assign(actions.begin() + k, actions.end());
    ex.next_actions.push_back("done");
    ex.goal = goal;
    out.push_back(std::move(ex));
  }
  return out;
}

// --- configuration ----------------------------------------------------------------------

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_relative() ? (base / path).lexically_normal() : path;
}

TaskCategory parse_category(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    const auto colon = s.find(':');
    if (colon == std::string::npos) return {parse_task_kind(s), "seen"};
    return {parse_task_kind(s.substr(0, colon)), s.substr(colon + 1)};
  }
  return {parse_task_kind(j.at("kind").get<std::string>()), j.value("apartment", "seen")};
}

}  // namespace

RunConfig RunConfig::from_json(const json& j, const fs::path& base_dir) {
  RunConfig c;
  c.label = j.value("label", "");
  c.planner = parse_planner(j.value("planner", "llm_mcts"));
  c.ablation = parse_ablation(j.value("ablation", "none"));
  if (j.contains("provider")) c.provider = j.at("provider");
  for (const char* key : {"priors_file", "cache_dir"}) {
    if (c.provider.contains(key)) {
      c.provider[key] = resolve(base_dir, c.provider[key].get<std::string>()).string();
    }
  }
  if (j.contains("search")) c.search = SearchParams::from_json(j.at("search"));
  if (j.contains("policy")) {
    const auto& p = j.at("policy");
    c.policy.M = p.value("M", c.policy.M);
    c.policy.K = p.value("K", c.policy.K);
    c.policy.lambda = p.value("lambda", c.policy.lambda);
    c.policy.threshold = p.value("threshold", c.policy.threshold);
  }
  c.belief_samples = j.value("belief_samples", c.belief_samples);
  c.max_steps = j.value("max_steps", c.max_steps);
  c.episodes = j.value("episodes", c.episodes);
  c.seed = j.value("seed", c.seed);
  if (j.contains("categories")) {
    c.categories.clear();
    for (const auto& e : j.at("categories")) c.categories.push_back(parse_category(e));
  }
  if (j.contains("apartments")) {
    for (const auto& [name, path] : j.at("apartments").items()) {
      c.apartment_files[name] = resolve(base_dir, path.get<std::string>());
    }
  }
  c.task_pools = resolve(base_dir, j.value("task_pools", ""));
  c.dataset = resolve(base_dir, j.value("dataset", ""));
  c.out = resolve(base_dir, j.value("out", ""));
  c.workers = j.value("workers", c.workers);
  c.resume = j.value("resume", c.resume);
  if (c.episodes < 0) throw std::invalid_argument("episodes must be >= 0");
  if (c.max_steps < 0) throw std::invalid_argument("max_steps must be >= 0");
  if (c.workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (c.policy.M < 1) throw std::invalid_argument("policy.M must be >= 1");
  if (c.policy.lambda < 0 || c.policy.lambda > 1) throw std::invalid_argument("lambda must lie in [0, 1]");
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  return from_json(read_json(path), path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

json RunConfig::to_json() const {
  json cats = json::array();
  for (const auto& c : categories) cats.push_back(std::string(to_string(c.kind)) + ":" + c.apartment);
  json apts = json::object();
  for (const auto& [name, path] : apartment_files) apts[name] = path.generic_string();
  return {{"label", row_label()},
          {"planner", to_string(planner)},
          {"ablation", to_string(ablation)},
          {"provider", provider},
          {"search", search.to_json()},
          {"policy", {{"M", policy.M}, {"K", policy.K}, {"lambda", policy.lambda},
                      {"threshold", policy.threshold}}},
          {"belief_samples", belief_samples},
          {"max_steps", max_steps},
          {"episodes", episodes},
          {"seed", seed},
          {"categories", cats},
          {"apartments", apts},
          {"task_pools", task_pools.generic_string()},
          {"dataset", dataset.generic_string()}};
}

AgentConfig RunConfig::agent_config() const {
  AgentConfig a;
  a.planner = planner;
  a.ablation = ablation;
  a.search = search;
  a.policy = policy;
  a.belief_samples = belief_samples;
  a.max_steps = max_steps;
  return a;
}

std::string RunConfig::row_label() const {
  if (!label.empty()) return label;
  std::string s(to_string(planner));
  if (ablation != Ablation::None) s += "/" + std::string(to_string(ablation));
  return s;
}

std::shared_ptr<CommonsenseProvider> make_provider(const json& spec, const fs::path& base_dir) {
  const std::string kind = spec.value("kind", "scripted");
  if (kind == "scripted") {
    return std::make_shared<ScriptedProvider>(ScriptedProviderConfig::from_json(spec, base_dir.string()));
  }
  if (kind == "llm") {
    auto cfg = LLMAdapterConfig::from_json(spec);
    cfg.cache_dir = resolve(base_dir, cfg.cache_dir).string();
    return std::make_shared<LLMProvider>(std::make_shared<LLMClient>(std::move(cfg)));
  }
  throw std::invalid_argument("unknown provider kind: " + kind);
}

// --- report -------------------------------------------------------------------------------

json EpisodeRow::to_json(bool full) const {
  json j = {{"label", label},           {"task_id", task_id},
            {"category", category},     {"apartment", apartment},
            {"seed", seed},             {"instruction", instruction},
            {"success", result.success}, {"steps_taken", result.steps_taken},
            {"failure_cause", result.failure_cause
                                  ? json(std::string(llmmcts::to_string(*result.failure_cause)))
                                  : json(nullptr)}};
  if (!result.detail.empty()) j["detail"] = result.detail;
  if (!translated_goal.empty()) j["translated_goal"] = translated_goal;
  if (full) j["trajectory"] = episode_to_json(result).at("trajectory");
  return j;
}

EpisodeRow EpisodeRow::from_json(const json& j) {
  EpisodeRow r;
  r.label = j.at("label").get<std::string>();
  r.task_id = j.at("task_id").get<std::string>();
  r.category = j.at("category").get<std::string>();
  r.apartment = j.at("apartment").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.instruction = j.value("instruction", "");
  r.result.success = j.at("success").get<bool>();
  r.result.steps_taken = j.at("steps_taken").get<int>();
  if (j.contains("failure_cause") && j["failure_cause"].is_string()) {
    const auto s = j["failure_cause"].get<std::string>();
    for (auto c : {FailureCause::BudgetExhausted, FailureCause::GoalParseFailure,
                   FailureCause::PlannerAbort}) {
      if (llmmcts::to_string(c) == s) r.result.failure_cause = c;
    }
  }
  r.result.detail = j.value("detail", "");
  r.translated_goal = j.value("translated_goal", "");
  if (j.contains("trajectory")) {
    for (const auto& s : j["trajectory"]) {
      r.result.trajectory.push_back({s.at("step").get<int>(), s.at("action").get<std::string>(),
                                     s.at("reward").get<double>(), s.at("done").get<bool>(),
                                     s.value("visible", std::vector<std::string>{})});
    }
  }
  return r;
}

json CellStats::to_json() const {
  return {{"label", label},         {"category", category}, {"apartment", apartment},
          {"episodes", episodes},   {"successes", successes}, {"mean", mean},
          {"sem", sem}};
}

CellStats CellStats::from_json(const json& j) {
  return {j.at("label").get<std::string>(), j.at("category").get<std::string>(),
          j.at("apartment").get<std::string>(), j.at("episodes").get<int>(),
          j.at("successes").get<int>(), j.at("mean").get<double>(), j.at("sem").get<double>()};
}

double sem_percent(int successes, int n) {
  if (n <= 0) return 0.0;
  const double p = static_cast<double>(successes) / n;
  return 100.0 * std::sqrt(p * (1.0 - p) / n);
}

CellStats cell_stats(const std::string& label, const std::string& category,
                     const std::string& apartment, int successes, int n) {
  return {label, category, apartment, n, successes,
          n > 0 ? 100.0 * successes / n : 0.0, sem_percent(successes, n)};
}

json Report::to_json() const {
  json cs = json::array();
  for (const auto& c : cells) cs.push_back(c.to_json());
  json eps = json::array();
  for (const auto& e : episodes) eps.push_back(e.to_json());
  return {{"format_version", 1}, {"runs", config}, {"cells", cs}, {"episodes", eps}};
}

Report Report::from_json(const json& j) {
  Report r;
  r.config = j.value("runs", json::array());
  for (const auto& c : j.at("cells")) r.cells.push_back(CellStats::from_json(c));
  for (const auto& e : j.value("episodes", json::array())) r.episodes.push_back(EpisodeRow::from_json(e));
  return r;
}

namespace {

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;  // count code points
  return n;
}

std::string pad(const std::string& s, std::size_t width) {
  const auto w = display_width(s);
  return w >= width ? s : s + std::string(width - w, ' ');
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string Report::to_csv() const {
  std::string out = "label,category,apartment,episodes,successes,success_rate,sem\n";
  for (const auto& c : cells) {
    out += csv_field(c.label) + "," + c.category + "," + c.apartment + "," +
           std::to_string(c.episodes) + "," + std::to_string(c.successes) + "," + fixed(c.mean, 2) +
           "," + fixed(c.sem, 2) + "\n";
  }
  return out;
}

std::string Report::to_table() const {
  static const char* kHeads[] = {"Simple", "Comp.", "NovelSimple", "NovelComp.(2)", "NovelComp.(3)"};
  const std::vector<std::string> apartments = {"seen", "unseen"};
  std::vector<std::string> labels;
  for (const auto& c : cells) {
    if (std::find(labels.begin(), labels.end(), c.label) == labels.end()) labels.push_back(c.label);
  }
  auto cell_text = [&](const std::string& label, TaskKind k, const std::string& apt) -> std::string {
    for (const auto& c : cells) {
      if (c.label == label && c.category == to_string(k) && c.apartment == apt) {
        return fixed(c.mean, 1) + "±" + fixed(c.sem, 1);
      }
    }
    return "-";
  };

  std::size_t first = std::string("Method").size();
  for (const auto& l : labels) first = std::max(first, display_width(l));
  std::size_t col = 0;
  for (const char* h : kHeads) col = std::max(col, std::string(h).size());
  for (const auto& l : labels) {
    for (const auto& apt : apartments) {
      for (auto k : kAllTaskKinds) col = std::max(col, display_width(cell_text(l, k, apt)));
    }
  }
  first += 2;
  col += 2;

  std::string out = pad("", first);
  for (const auto& apt : apartments) {
    out += pad(apt == "seen" ? "Seen Apartment" : "Unseen Apartment", col * 5);
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  out += "\n" + pad("Method", first);
  for (std::size_t a = 0; a < apartments.size(); ++a) {
    for (const char* h : kHeads) out += pad(h, col);
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  out += "\n";
  for (const auto& l : labels) {
    std::string line = pad(l, first);
    for (const auto& apt : apartments) {
      for (auto k : kAllTaskKinds) line += pad(cell_text(l, k, apt), col);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

Report merge_reports(const std::vector<Report>& reports) {
  Report out;
  out.config = json::array();
  for (const auto& r : reports) {
    for (const auto& c : r.config) out.config.push_back(c);
    out.cells.insert(out.cells.end(), r.cells.begin(), r.cells.end());
    out.episodes.insert(out.episodes.end(), r.episodes.begin(), r.episodes.end());
  }
  return out;
}

// --- evaluation ------------------------------------------------------------------------------

namespace {

struct Job {
  std::size_t cell;
  const GeneratedTask* task;
  std::uint64_t seed;
};

std::string category_tag(const TaskCategory& c) {
  return std::string(to_string(c.kind)) + ":" + c.apartment;
}

std::map<std::string, EpisodeRow> load_checkpoint(const fs::path& path, const std::string& label) {
  std::map<std::string, EpisodeRow> rows;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      auto row = EpisodeRow::from_json(json::parse(line));
      if (row.label == label) rows[row.task_id] = std::move(row);
    } catch (const std::exception&) {
      // a partially written last line is simply re-run
    }
  }
  return rows;
}

}  // namespace

Report run_eval(const RunConfig& config, const ProgressFn& progress) {
  const std::string label = config.row_label();
  std::map<std::string, Apartment> apartments;
  for (const auto& c : config.categories) {
    if (apartments.count(c.apartment)) continue;
    auto it = config.apartment_files.find(c.apartment);
    if (it == config.apartment_files.end()) {
      throw std::invalid_argument("no apartment file configured for " + c.apartment);
    }
    apartments.emplace(c.apartment, Apartment::load(it->second));
  }
  const TaskPools pools = TaskPools::load(config.task_pools);
  std::vector<PromptExample> dataset;
  if (!config.dataset.empty()) dataset = load_prompt_dataset(config.dataset.string());

  EpisodeDeps deps;
  deps.provider = make_provider(config.provider);
  deps.dataset = dataset;
  const AgentConfig agent = config.agent_config();

  // Tasks and episode seeds depend only on the master seed and the cell, so
  // different planners under one seed face identical episodes.
  std::vector<std::vector<GeneratedTask>> tasks;
  std::vector<Job> jobs;
  tasks.reserve(config.categories.size());
  for (std::size_t ci = 0; ci < config.categories.size(); ++ci) {
    const auto& cat = config.categories[ci];
    const std::string tag = category_tag(cat);
    tasks.push_back(generate_tasks(cat, config.episodes, apartments, pools,
                                   derive_seed(config.seed, stream_id("tasks/" + tag))));
    const std::uint64_t cell_seed = derive_seed(config.seed, stream_id("episodes/" + tag));
    for (std::size_t i = 0; i < tasks.back().size(); ++i) {
      jobs.push_back({ci, &tasks.back()[i], derive_seed(cell_seed, i)});
    }
  }

  const fs::path jsonl = config.out.empty() ? fs::path() : config.out / "episodes.jsonl";
  std::map<std::string, EpisodeRow> done;
  if (!jsonl.empty()) {
    fs::create_directories(config.out);
    if (config.resume) {
      done = load_checkpoint(jsonl, label);
    } else {
      std::ofstream(jsonl, std::ios::trunc);
    }
  }

  std::vector<std::optional<EpisodeRow>> rows(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto it = done.find(jobs[i].task->task.id);
    if (it != done.end() && it->second.seed == jobs[i].seed) rows[i] = it->second;
  }

  std::mutex out_mu;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> outage{false};
  std::exception_ptr outage_error;

  auto worker = [&] {
    while (!outage) {
      const std::size_t i = next++;
      if (i >= jobs.size()) return;
      if (rows[i]) continue;
      const Job& job = jobs[i];
      EpisodeRow row;
      row.label = label;
      row.task_id = job.task->task.id;
      row.category = job.task->task.category;
      row.apartment = job.task->task.apartment;
      row.seed = job.seed;
      row.instruction = job.task->task.instruction;
      try {
        row.result = run_episode(job.task->scene, job.task->task.instruction, job.task->task.goal,
                                 deps, agent, job.seed);
        if (row.result.translated_goal) row.translated_goal = goal_label(*row.result.translated_goal);
      } catch (const ProviderOutage&) {
        std::lock_guard lock(out_mu);
        if (!outage.exchange(true)) outage_error = std::current_exception();
        return;
      } catch (const std::exception& e) {
        row.result = EpisodeResult{};
        row.result.failure_cause = FailureCause::PlannerAbort;
        row.result.detail = e.what();
      }
      std::lock_guard lock(out_mu);
      if (!jsonl.empty()) {
        std::ofstream(jsonl, std::ios::app) << row.to_json(true).dump() << '\n';
      }
      if (progress) progress(row);
      rows[i] = std::move(row);
    }
  };

  const int n_workers = std::max(1, std::min<int>(config.workers, static_cast<int>(jobs.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (outage) std::rethrow_exception(outage_error);

  Report report;
  report.config = json::array({config.to_json()});
  std::vector<int> succ(config.categories.size(), 0), count(config.categories.size(), 0);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    ++count[jobs[i].cell];
    succ[jobs[i].cell] += rows[i]->result.success;
    report.episodes.push_back(*rows[i]);
  }
  for (std::size_t ci = 0; ci < config.categories.size(); ++ci) {
    const auto& cat = config.categories[ci];
    report.cells.push_back(
        cell_stats(label, std::string(to_string(cat.kind)), cat.apartment, succ[ci], count[ci]));
  }

  if (!jsonl.empty()) {
    // Rewrite in job order so the log is independent of worker scheduling.
    std::ofstream out(jsonl, std::ios::trunc);
    for (const auto& r : rows) out << r->to_json(true).dump() << '\n';
    out.close();
    write_report(config.out, report);
  }
  return report;
}

void write_report(const fs::path& dir, const Report& report) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "report.json");
    out << report.to_json().dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "report.csv");
    out << report.to_csv();
  }
  {
    std::ofstream out(dir / "report.txt");
    out << report.to_table();
  }
}

}  // namespace llmmcts
