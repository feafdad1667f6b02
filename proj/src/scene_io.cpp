#include "llmmcts/scene_io.hpp"

#include <fstream>
#include <map>

#include "llmmcts/errors.hpp"

namespace llmmcts {

using nlohmann::json;

namespace {

void check_version(const json& j, int expected, const char* what) {
  const int v = j.value("format_version", 0);
  if (v != expected) {
    throw SceneFormatError(std::string(what) + " format_version " + std::to_string(v) +
                           " is not supported (expected " + std::to_string(expected) + ")");
  }
}

const json& field(const json& j, const char* key) {
  if (!j.contains(key)) throw SceneFormatError(std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace

Relation parse_relation(std::string_view text) {
  if (text == "Inside" || text == "inside") return Relation::Inside;
  if (text == "On" || text == "on") return Relation::On;
  throw SceneFormatError("unknown relation: " + std::string(text));
}

SceneState scene_from_json(const json& j, const Catalog& catalog) {
  check_version(j, kSceneFormatVersion, "scene");
  try {
    std::vector<std::string> rooms = field(j, "rooms").get<std::vector<std::string>>();

    std::vector<Scene::FixtureSpec> containers;
    std::vector<Scene::FixtureSpec> surfaces;
    std::vector<std::string> movables;
    // file label -> (class, ordinal) in order of appearance
    std::map<std::string, std::string> canonical;
    std::map<std::string, int> ordinals;
    auto relabel = [&](const json& item) {
      const auto cls = field(item, "class").get<std::string>();
      const auto label = item.value("id", cls + "." + std::to_string(ordinals[cls]));
      const auto id = cls + "." + std::to_string(ordinals[cls]++);
      if (!canonical.emplace(label, id).second) {
        throw SceneFormatError("duplicate instance id: " + label);
      }
      return cls;
    };

    for (const auto& c : field(j, "containers")) {
      containers.push_back({relabel(c), field(c, "room").get<std::string>()});
    }
    for (const auto& s : field(j, "surfaces")) {
      surfaces.push_back({relabel(s), field(s, "room").get<std::string>()});
    }
    for (const auto& m : field(j, "movables")) movables.push_back(relabel(m));

    auto scene = std::make_shared<const Scene>(rooms, containers, surfaces, movables, catalog);
    auto resolve = [&](const std::string& label) {
      auto it = canonical.find(label);
      if (it == canonical.end()) throw SceneFormatError("unknown instance id: " + label);
      return *scene->find(it->second);
    };

    SceneState state;
    state.scene = scene;
    state.open.assign(scene->containers().size(), 0);
    state.movables.assign(scene->movables().size(), std::nullopt);

    // Second pass recomputes the same class.ordinal ids as relabel().
    std::map<std::string, int> second;
    auto next_id = [&](const json& item) {
      const auto cls = item.at("class").get<std::string>();
      return cls + "." + std::to_string(second[cls]++);
    };
    for (const auto& c : j.at("containers")) {
      state.open[scene->find(next_id(c))->index] = c.value("open", false) ? 1 : 0;
    }
    for (const auto& s : j.at("surfaces")) next_id(s);

    for (const auto& m : j.at("movables")) {
      const auto id = next_id(m);
      const EntityRef self = *scene->find(id);
      const auto& pl = field(m, "placement");
      const Relation rel = parse_relation(field(pl, "relation").get<std::string>());
      const EntityRef target = resolve(field(pl, "target").get<std::string>());
      const auto want = rel == Relation::Inside ? EntityKind::Container : EntityKind::Surface;
      if (target.kind != want) {
        throw SceneFormatError(id + ": " + std::string(to_string(rel)) +
                               " placement on the wrong kind of target");
      }
      state.movables[self.index] = Placement{rel, target.index};
    }

    const auto& agent = field(j, "agent");
    const auto room = scene->room_index(field(agent, "room").get<std::string>());
    if (!room) throw SceneFormatError("agent starts in unknown room");
    state.agent.room = *room;
    validate(state);
    return state;
  } catch (const json::exception& e) {
    throw SceneFormatError(std::string("malformed scene: ") + e.what());
  }
}

json scene_to_json(const SceneState& state) {
  const Scene& sc = *state.scene;
  json j;
  j["format_version"] = kSceneFormatVersion;
  j["rooms"] = sc.rooms();
  j["containers"] = json::array();
  for (std::size_t c = 0; c < sc.containers().size(); ++c) {
    const auto& inst = sc.containers()[c];
    j["containers"].push_back({{"id", inst.id},
                               {"class", inst.cls},
                               {"room", sc.rooms()[inst.room]},
                               {"open", state.open[c] != 0}});
  }
  j["surfaces"] = json::array();
  for (const auto& inst : sc.surfaces()) {
    j["surfaces"].push_back(
        {{"id", inst.id}, {"class", inst.cls}, {"room", sc.rooms()[inst.room]}});
  }
  j["movables"] = json::array();
  for (std::size_t m = 0; m < sc.movables().size(); ++m) {
    const auto& inst = sc.movables()[m];
    const auto& loc = state.movables[m];
    if (!loc) throw SceneFormatError("cannot serialize a scene while an item is held");
    const auto& target = loc->relation == Relation::Inside ? sc.containers()[loc->target].id
                                                           : sc.surfaces()[loc->target].id;
    j["movables"].push_back(
        {{"id", inst.id},
         {"class", inst.cls},
         {"placement", {{"relation", std::string(to_string(loc->relation))}, {"target", target}}}});
  }
  j["agent"] = {{"room", sc.rooms()[state.agent.room]}};
  return j;
}

json goal_to_json(const GoalSpec& goal) {
  json arr = json::array();
  for (const auto& p : goal.predicates) {
    arr.push_back({{"object", p.movable_class},
                   {"relation", std::string(to_string(p.relation))},
                   {"target", p.target_class},
                   {"count", p.count}});
  }
  return arr;
}

GoalSpec goal_from_json(const json& j) {
  GoalSpec g;
  for (const auto& p : j) {
    g.predicates.push_back({p.at("object").get<std::string>(),
                            parse_relation(p.at("relation").get<std::string>()),
                            p.at("target").get<std::string>(), p.value("count", 1)});
  }
  return g;
}

TaskSpec task_from_json(const json& j) {
  check_version(j, kTaskFormatVersion, "task");
  try {
    TaskSpec t;
    t.id = j.value("id", std::string{});
    t.instruction = field(j, "instruction").get<std::string>();
    t.goal = goal_from_json(field(j, "goal"));
    t.category = j.value("category", std::string{});
    t.apartment = j.value("apartment", std::string{});
    return t;
  } catch (const json::exception& e) {
    throw SceneFormatError(std::string("malformed task: ") + e.what());
  }
}

json task_to_json(const TaskSpec& t) {
  return {{"format_version", kTaskFormatVersion},
          {"id", t.id},
          {"instruction", t.instruction},
          {"goal", goal_to_json(t.goal)},
          {"category", t.category},
          {"apartment", t.apartment}};
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SceneFormatError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw SceneFormatError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw SceneFormatError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

SceneState load_scene(const std::filesystem::path& path, const Catalog& catalog) {
  return scene_from_json(read_json(path), catalog);
}

TaskSpec load_task(const std::filesystem::path& path) { return task_from_json(read_json(path)); }

}  // namespace llmmcts
