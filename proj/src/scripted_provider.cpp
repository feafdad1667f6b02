#include "llmmcts/scripted_provider.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <regex>

#include "llmmcts/errors.hpp"
#include "llmmcts/grounding.hpp"
#include "llmmcts/scene_io.hpp"

namespace llmmcts {

using nlohmann::json;

std::string_view to_string(PolicyMode m) {
  switch (m) {
    case PolicyMode::Perfect: return "perfect";
    case PolicyMode::Noisy: return "noisy";
    case PolicyMode::Adversarial: return "adversarial";
    case PolicyMode::ScriptedTrace: return "scripted_trace";
  }
  return "?";
}

PolicyMode parse_policy_mode(std::string_view s) {
  if (s == "perfect") return PolicyMode::Perfect;
  if (s == "noisy") return PolicyMode::Noisy;
  if (s == "adversarial") return PolicyMode::Adversarial;
  if (s == "scripted_trace") return PolicyMode::ScriptedTrace;
  throw SceneFormatError("unknown policy mode: " + std::string(s));
}

PlacementPriors priors_from_json(const json& j) {
  PlacementPriors out;
  for (const auto& [cls, list] : j.items()) {
    auto& v = out[cls];
    for (const auto& e : list) {
      if (e.is_array()) {
        v.push_back({e.at(0).get<std::string>(), e.at(1).get<double>()});
      } else {
        v.push_back({e.at("phrase").get<std::string>(), e.value("weight", 1.0)});
      }
    }
  }
  return out;
}

json priors_to_json(const PlacementPriors& priors) {
  json j = json::object();
  for (const auto& [cls, list] : priors) {
    json arr = json::array();
    for (const auto& wp : list) arr.push_back(json::array({wp.phrase, wp.weight}));
    j[cls] = arr;
  }
  return j;
}

ScriptedProviderConfig ScriptedProviderConfig::from_json(const json& j,
                                                         const std::string& base_dir) {
  ScriptedProviderConfig c;
  if (j.contains("placement_priors")) {
    c.placement_priors = priors_from_json(j.at("placement_priors"));
  } else if (j.contains("priors_file")) {
    std::filesystem::path p = j.at("priors_file").get<std::string>();
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    const json file = read_json(p);
    c.placement_priors = priors_from_json(file.at("placement_priors"));
  }
  c.mode = parse_policy_mode(j.value("mode", std::string("perfect")));
  c.noise = j.value("p", 0.0);
  c.trace = j.value("trace", std::vector<std::string>{});
  c.seed = j.value("seed", std::uint64_t{0});
  c.validate();
  return c;
}

void ScriptedProviderConfig::validate() const {
  if (noise < 0.0 || noise > 1.0) throw SceneFormatError("noise p must lie in [0, 1]");
  for (const auto& [cls, list] : placement_priors) {
    for (const auto& wp : list) {
      if (!(wp.weight > 0.0)) throw SceneFormatError("prior weight for " + cls + " must be > 0");
    }
  }
}

// --- knowledge reconstruction ----------------------------------------------

Knowledge Knowledge::from_history(const Scene& scene, const History& history) {
  Knowledge k;
  k.last_seen.assign(scene.movables().size(), std::nullopt);
  k.inspected.assign(scene.num_slots(), 0);
  k.visible_now.assign(scene.movables().size(), 0);
  auto absorb = [&](const Observation& o) {
    for (const auto& m : o.movables) k.last_seen[m.index] = m.location;
    for (auto s : inspected_slots(scene, o)) k.inspected[s] = 1;
  };
  absorb(history.initial());
  for (const auto& step : history.steps()) absorb(step.observation);
  const Observation& last = history.last_observation();
  for (const auto& m : last.movables) k.visible_now[m.index] = 1;
  k.open_now.assign(scene.containers().size(), -1);
  for (const auto& c : last.containers) k.open_now[c.index] = c.open ? 1 : 0;
  k.room = last.agent_room;
  k.proximity = history.proximity();
  k.held = history.held();
  return k;
}

// --- the subgoal chain --------------------------------------------------------

namespace {

struct ChainContext {
  const Scene& scene;
  const GoalSpec& goal;
  const Knowledge& know;

  const std::string& fixture_class(const Placement& p) const {
    return p.relation == Relation::Inside ? scene.containers()[p.target].cls
                                          : scene.surfaces()[p.target].cls;
  }

  bool matches(std::size_t i, Index m, const Placement& p) const {
    const auto& pr = goal.predicates[i];
    return scene.movables()[m].cls == pr.movable_class && p.relation == pr.relation &&
           fixture_class(p) == pr.target_class;
  }

  bool at_goal(Index m) const {
    const auto& loc = know.last_seen[m];
    if (!loc) return false;
    for (std::size_t i = 0; i < goal.predicates.size(); ++i) {
      if (matches(i, m, *loc)) return true;
    }
    return false;
  }

  int have(std::size_t i) const {
    int n = 0;
    for (Index m = 0; m < scene.movables().size(); ++m) {
      if (know.last_seen[m] && matches(i, m, *know.last_seen[m])) ++n;
    }
    return n;
  }

  bool near(EntityRef e) const { return know.proximity && *know.proximity == e; }
};

bool seen_open(const Knowledge& know, const Scene&, Index c) { return know.open_now[c] == 1; }

Action act_on_item(const ChainContext& cx, Index m) {
  const auto& know = cx.know;
  if (cx.near(movable_ref(m))) return Action::grab(m);
  if (know.visible_now[m]) return Action::walk(movable_ref(m));
  const Placement at = *know.last_seen[m];
  const Index r = cx.scene.room_of(at);
  if (r != know.room) return Action::walk(room_ref(r));
  // Same room but not visible: it sits in a closed container.
  if (at.relation == Relation::On) return Action::walk(surface_ref(at.target));
  if (cx.near(container_ref(at.target))) return Action::open(at.target);
  return Action::walk(container_ref(at.target));
}

std::optional<Action> deliver(const ChainContext& cx, Index held) {
  const Scene& sc = cx.scene;
  const auto& know = cx.know;
  const auto& cls = sc.movables()[held].cls;
  for (std::size_t i = 0; i < cx.goal.predicates.size(); ++i) {
    const auto& pr = cx.goal.predicates[i];
    if (pr.movable_class != cls || cx.have(i) >= pr.count) continue;
    const auto kind = pr.relation == Relation::Inside ? EntityKind::Container : EntityKind::Surface;
    auto room_of_ref = [&](EntityRef r) {
      return kind == EntityKind::Container ? sc.containers()[r.index].room
                                           : sc.surfaces()[r.index].room;
    };
    // Closest instance first: the one the agent stands at, then this room.
    std::optional<EntityRef> target;
    for (const auto& ref : sc.instances_of(pr.target_class)) {
      if (ref.kind != kind) continue;
      if (cx.near(ref)) {
        target = ref;
        break;
      }
      if (!target || (room_of_ref(ref) == know.room && room_of_ref(*target) != know.room)) {
        target = ref;
      }
    }
    if (!target) continue;
    const Index room = room_of_ref(*target);
    if (cx.near(*target)) {
      if (kind == EntityKind::Container) {
        if (!seen_open(know, sc, target->index)) return Action::open(target->index);
        return Action::put_in(held, target->index);
      }
      return Action::put_back(held, target->index);
    }
    if (room == know.room) return Action::walk(*target);
    return Action::walk(room_ref(room));
  }

  // Holding something the goal does not need: set it down nearby.
  if (know.proximity && know.proximity->kind == EntityKind::Surface) {
    return Action::put_back(held, know.proximity->index);
  }
  if (know.proximity && know.proximity->kind == EntityKind::Container &&
      seen_open(know, sc, know.proximity->index)) {
    return Action::put_in(held, know.proximity->index);
  }
  for (Index s = 0; s < sc.surfaces().size(); ++s) {
    if (sc.surfaces()[s].room == know.room) return Action::walk(surface_ref(s));
  }
  if (!sc.surfaces().empty()) return Action::walk(room_ref(sc.surfaces()[0].room));
  return std::nullopt;
}

std::optional<Action> search(const ChainContext& cx, const std::vector<double>& w) {
  const Scene& sc = cx.scene;
  const auto& know = cx.know;
  std::optional<std::size_t> best;
  auto better = [&](std::size_t a, std::size_t b) {
    if (w[a] != w[b]) return w[a] > w[b];
    const bool ra = sc.room_of_slot(a) == know.room, rb = sc.room_of_slot(b) == know.room;
    if (ra != rb) return ra;
    return a < b;
  };
  for (std::size_t s = 0; s < sc.num_slots(); ++s) {
    if (know.inspected[s]) continue;
    if (!best || better(s, *best)) best = s;
  }
  if (!best) return std::nullopt;
  const Placement p = sc.placement_of_slot(*best);
  const Index r = sc.room_of(p);
  if (r != know.room) return Action::walk(room_ref(r));
  // Uninspected slots in the current room are closed containers.
  if (cx.near(container_ref(p.target))) return Action::open(p.target);
  return Action::walk(container_ref(p.target));
}

}  // namespace

std::optional<Action> expert_next_action(const Scene& scene, const GoalSpec& goal,
                                         const Knowledge& know, const SlotWeightFn& weights) {
  ChainContext cx{scene, goal, know};
  if (know.held) return deliver(cx, *know.held);

  std::vector<std::size_t> open_preds;
  for (std::size_t i = 0; i < goal.predicates.size(); ++i) {
    if (cx.have(i) < goal.predicates[i].count) open_preds.push_back(i);
  }
  if (open_preds.empty()) return std::nullopt;

  // Prefer an item already in view, then any item whose place is known.
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i : open_preds) {
      const auto& cls = goal.predicates[i].movable_class;
      for (Index m = 0; m < scene.movables().size(); ++m) {
        if (scene.movables()[m].cls != cls || !know.last_seen[m] || cx.at_goal(m)) continue;
        if (pass == 0 && !know.visible_now[m]) continue;
        return act_on_item(cx, m);
      }
    }
  }
  return search(cx, weights(goal.predicates[open_preds.front()].movable_class));
}

std::vector<double> slot_weights(const Scene& scene, const PlacementPriors& priors,
                                 std::string_view movable_class, const SimilarityProvider& sim) {
  std::vector<double> w(scene.num_slots(), 0.0);
  auto it = priors.find(std::string(movable_class));
  if (it == priors.end()) return w;
  for (const auto& wp : it->second) {
    const auto g = ground_placement(wp.phrase, scene, sim);
    if (!g) continue;
    for (const auto& ref : scene.instances_of(g->fixture_class)) {
      const bool inside = ref.kind == EntityKind::Container;
      if (inside != (g->relation == Relation::Inside)) continue;
      w[scene.slot({g->relation, ref.index})] += wp.weight;
    }
  }
  return w;
}

// --- provider -----------------------------------------------------------------

ScriptedProvider::ScriptedProvider(ScriptedProviderConfig config,
                                   std::shared_ptr<const SimilarityProvider> sim)
    : config_(std::move(config)), sim_(std::move(sim)) {
  config_.validate();
}

std::string ScriptedProvider::name() const {
  std::string n = "scripted:" + std::string(to_string(config_.mode));
  if (config_.mode == PolicyMode::Noisy) n += "(" + std::to_string(config_.noise) + ")";
  return n;
}

std::vector<std::string> ScriptedProvider::sample_object_placements(std::string_view object_class,
                                                                    const Scene&, Rng& rng,
                                                                    int) {
  auto it = config_.placement_priors.find(std::string(object_class));
  if (it == config_.placement_priors.end() || it->second.empty()) return {};
  double total = 0;
  for (const auto& wp : it->second) total += wp.weight;
  Rng local(derive_seed(config_.seed, rng()));
  double u = uniform01(local) * total;
  for (const auto& wp : it->second) {
    if (u < wp.weight) return {wp.phrase};
    u -= wp.weight;
  }
  return {it->second.back().phrase};
}

const std::vector<double>& ScriptedProvider::weights_for(const Scene& scene,
                                                         const std::string& cls) const {
  std::string key = cls + "|";
  for (const auto& c : scene.containers()) key += c.cls + ",";
  key += "|";
  for (const auto& s : scene.surfaces()) key += s.cls + ",";
  std::lock_guard lock(mu_);
  auto it = weight_cache_.find(key);
  if (it == weight_cache_.end()) {
    it = weight_cache_.emplace(key, slot_weights(scene, config_.placement_priors, cls, *sim_))
             .first;
  }
  return it->second;
}

std::optional<Action> ScriptedProvider::perfect_action(const PolicyQuery& q) const {
  const Knowledge know = Knowledge::from_history(*q.scene, *q.history);
  return expert_next_action(*q.scene, *q.goal, know,
                            [&](const std::string& cls) -> const std::vector<double>& {
                              return weights_for(*q.scene, cls);
                            });
}

std::vector<std::string> ScriptedProvider::sample_next_actions(const PolicyQuery& q, Rng& rng,
                                                               int) {
  Rng local(derive_seed(config_.seed, rng()));
  auto render = [&](const std::optional<Action>& a) -> std::string {
    return a ? render_action(*q.scene, *a) : std::string("done");
  };

  switch (config_.mode) {
    case PolicyMode::ScriptedTrace: {
      const std::size_t i = q.history->size();
      return {i < config_.trace.size() ? config_.trace[i] : std::string("done")};
    }
    case PolicyMode::Noisy:
      if (!q.admissible.empty() && bernoulli(local, config_.noise)) {
        return {render_action(*q.scene, q.admissible[uniform_index(local, q.admissible.size())])};
      }
      return {render(perfect_action(q))};
    case PolicyMode::Adversarial: {
      const std::string good = render(perfect_action(q));
      const Embedding e = sim_->embed(good);
      std::string worst;
      double lowest = 2.0;
      for (const auto& a : q.admissible) {
        auto text = render_action(*q.scene, a);
        const double s = sim_->score(e, sim_->embed(text));
        if (s < lowest) {
          lowest = s;
          worst = std::move(text);
        }
      }
      return {worst.empty() ? good : worst};
    }
    case PolicyMode::Perfect:
    default: return {render(perfect_action(q))};
  }
}

// --- goal translation -----------------------------------------------------------

namespace {

int count_word(const std::string& w) {
  static const std::map<std::string, int> words = {
      {"a", 1}, {"an", 1}, {"one", 1}, {"two", 2}, {"three", 3}, {"four", 4}, {"five", 5}};
  if (auto it = words.find(w); it != words.end()) return it->second;
  if (!w.empty() && std::all_of(w.begin(), w.end(), ::isdigit)) return std::stoi(w);
  return 0;
}

// Canonical catalog name for a spoken object phrase, trying a singular form
// for plurals. Falls back to the squashed phrase.
std::string canonical_object(const std::string& phrase, int count, const Catalog& catalog) {
  const auto c = canonicalize(phrase);
  if (catalog.contains(c)) return c;
  if (count > 1) {
    for (std::string_view suffix : {"es", "s"}) {
      if (c.size() > suffix.size() && c.ends_with(suffix)) {
        auto s = c.substr(0, c.size() - suffix.size());
        if (catalog.contains(s)) return s;
      }
    }
  }
  return c;
}

}  // namespace

std::string scripted_goal_tuples(std::string_view instruction, const Catalog& catalog) {
  std::string text;
  for (char c : instruction) text.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  while (!text.empty() && (text.back() == '.' || std::isspace(static_cast<unsigned char>(text.back())))) {
    text.pop_back();
  }

  static const std::regex clause_split(R"(\s*,\s*(?:and\s+)?|\s+and\s+)");
  static const std::regex clause(
      R"(^\s*(?:put\s+)?(\w+)\s+(.+?)\s+(inside|into|in|onto|on)\s+(?:the\s+)?(.+?)\s*$)");

  std::string out;
  std::sregex_token_iterator it(text.begin(), text.end(), clause_split, -1), end;
  for (; it != end; ++it) {
    const std::string part = *it;
    std::smatch m;
    if (!std::regex_match(part, m, clause)) continue;
    const int n = count_word(m[1].str());
    if (n <= 0) continue;
    const auto obj = canonical_object(m[2].str(), n, catalog);
    const auto rel = *relation_from_word(m[3].str()) == Relation::Inside ? "inside" : "on";
    const auto tgt = canonicalize(m[4].str());
    for (int i = 0; i < n; ++i) out += "(" + obj + ", " + rel + ", " + tgt + ")\n";
  }
  return out;
}

std::string ScriptedProvider::translate_goal_text(std::string_view instruction) {
  return scripted_goal_tuples(instruction, Catalog::household());
}

}  // namespace llmmcts
