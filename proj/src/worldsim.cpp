#include "llmmcts/worldsim.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "llmmcts/errors.hpp"

namespace llmmcts {

std::string_view to_string(Relation r) { return r == Relation::Inside ? "Inside" : "On"; }

namespace {

std::vector<Instance> make_instances(const std::vector<std::string>& classes,
                                     const std::vector<Index>& rooms) {
  std::map<std::string, int> next_ordinal;
  std::vector<Instance> out;
  out.reserve(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) {
    Instance inst;
    inst.cls = classes[i];
    inst.ordinal = next_ordinal[classes[i]]++;
    inst.id = inst.cls + "." + std::to_string(inst.ordinal);
    inst.room = rooms.empty() ? 0 : rooms[i];
    out.push_back(std::move(inst));
  }
  std::sort(out.begin(), out.end(), [](const Instance& a, const Instance& b) {
    return a.cls != b.cls ? a.cls < b.cls : a.ordinal < b.ordinal;
  });
  return out;
}

void require_kind(const Catalog& catalog, const std::string& cls, ObjectKind kind,
                  const char* what) {
  auto k = catalog.kind_of(cls);
  if (!k) throw SceneFormatError(std::string("unknown ") + what + " class: " + cls);
  if (*k != kind) throw SceneFormatError("'" + cls + "' is not a " + what);
}

const char* article(std::string_view word) {
  if (!word.empty() && std::string_view("aeiou").find(word.front()) != std::string_view::npos) {
    return "an";
  }
  return "a";
}

}  // namespace

// --- Scene -------------------------------------------------------------------

Scene::Scene(std::vector<std::string> rooms, std::vector<FixtureSpec> containers,
             std::vector<FixtureSpec> surfaces, std::vector<std::string> movables,
             const Catalog& catalog)
    : catalog_(&catalog), rooms_(std::move(rooms)) {
  if (rooms_.empty()) throw SceneFormatError("scene has no rooms");
  for (const auto& r : rooms_) require_kind(catalog, r, ObjectKind::Room, "room");
  std::sort(rooms_.begin(), rooms_.end());
  if (std::adjacent_find(rooms_.begin(), rooms_.end()) != rooms_.end()) {
    throw SceneFormatError("duplicate room in scene");
  }

  auto build = [&](const std::vector<FixtureSpec>& specs, ObjectKind kind,
                   const char* what) {
    std::vector<std::string> classes;
    std::vector<Index> room_ids;
    for (const auto& f : specs) {
      require_kind(catalog, f.cls, kind, what);
      auto r = room_index(f.room);
      if (!r) throw SceneFormatError("fixture " + f.cls + " in unknown room " + f.room);
      classes.push_back(f.cls);
      room_ids.push_back(*r);
    }
    return make_instances(classes, room_ids);
  };
  containers_ = build(containers, ObjectKind::Container, "container");
  surfaces_ = build(surfaces, ObjectKind::Surface, "surface");
  for (const auto& m : movables) require_kind(catalog, m, ObjectKind::Movable, "movable");
  movables_ = make_instances(movables, {});
  for (auto* list : {&containers_, &surfaces_, &movables_}) {
    for (auto& inst : *list) {
      const auto same = std::count_if(list->begin(), list->end(),
                                      [&](const Instance& o) { return o.cls == inst.cls; });
      inst.display = catalog.display(inst.cls);
      if (same > 1) inst.display += " " + std::to_string(inst.ordinal + 1);
    }
  }
  if (num_slots() == 0) throw SceneFormatError("scene has no containers or surfaces");
}

Placement Scene::placement_of_slot(std::size_t slot) const {
  if (slot < containers_.size()) return {Relation::Inside, static_cast<Index>(slot)};
  return {Relation::On, static_cast<Index>(slot - containers_.size())};
}

Index Scene::room_of(const Placement& p) const {
  return p.relation == Relation::Inside ? containers_[p.target].room
                                        : surfaces_[p.target].room;
}

std::optional<Index> Scene::room_index(std::string_view name) const {
  auto it = std::lower_bound(rooms_.begin(), rooms_.end(), name);
  if (it == rooms_.end() || *it != name) return std::nullopt;
  return static_cast<Index>(it - rooms_.begin());
}

std::optional<EntityRef> Scene::find(std::string_view id) const {
  if (auto r = room_index(id)) return room_ref(*r);
  auto search = [&](const std::vector<Instance>& list,
                    EntityKind kind) -> std::optional<EntityRef> {
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].id == id) return EntityRef{kind, static_cast<Index>(i)};
    }
    return std::nullopt;
  };
  if (auto e = search(containers_, EntityKind::Container)) return e;
  if (auto e = search(surfaces_, EntityKind::Surface)) return e;
  return search(movables_, EntityKind::Movable);
}

const std::string& Scene::id(EntityRef ref) const {
  switch (ref.kind) {
    case EntityKind::Room: return rooms_.at(ref.index);
    case EntityKind::Container: return containers_.at(ref.index).id;
    case EntityKind::Surface: return surfaces_.at(ref.index).id;
    case EntityKind::Movable: return movables_.at(ref.index).id;
  }
  throw std::logic_error("bad entity kind");
}

const std::string& Scene::cls(EntityRef ref) const {
  switch (ref.kind) {
    case EntityKind::Room: return rooms_.at(ref.index);
    case EntityKind::Container: return containers_.at(ref.index).cls;
    case EntityKind::Surface: return surfaces_.at(ref.index).cls;
    case EntityKind::Movable: return movables_.at(ref.index).cls;
  }
  throw std::logic_error("bad entity kind");
}

std::string Scene::display(EntityRef ref) const {
  switch (ref.kind) {
    case EntityKind::Room: return catalog_->display(rooms_.at(ref.index));
    case EntityKind::Container: return containers_.at(ref.index).display;
    case EntityKind::Surface: return surfaces_.at(ref.index).display;
    case EntityKind::Movable: return movables_.at(ref.index).display;
  }
  return {};
}

std::string Scene::display(const Placement& p) const {
  return p.relation == Relation::Inside ? display(container_ref(p.target))
                                        : display(surface_ref(p.target));
}

std::string Scene::id(const Placement& p) const {
  const auto& target = p.relation == Relation::Inside ? containers_.at(p.target).id
                                                      : surfaces_.at(p.target).id;
  return std::string(to_string(p.relation)) + "(" + target + ")";
}

std::vector<EntityRef> Scene::instances_of(std::string_view c) const {
  std::vector<EntityRef> out;
  auto scan = [&](const std::vector<Instance>& list, EntityKind kind) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].cls == c) out.push_back({kind, static_cast<Index>(i)});
    }
  };
  if (auto r = room_index(c)) out.push_back(room_ref(*r));
  scan(containers_, EntityKind::Container);
  scan(surfaces_, EntityKind::Surface);
  scan(movables_, EntityKind::Movable);
  return out;
}

std::vector<std::string> Scene::fixture_classes() const {
  std::set<std::string> s;
  for (const auto& c : containers_) s.insert(c.cls);
  for (const auto& c : surfaces_) s.insert(c.cls);
  return {s.begin(), s.end()};
}

std::vector<std::string> Scene::movable_classes() const {
  std::set<std::string> s;
  for (const auto& m : movables_) s.insert(m.cls);
  return {s.begin(), s.end()};
}

// --- SceneState ------------------------------------------------------------

Index SceneState::room_of_movable(Index m) const {
  const auto& loc = movables[m];
  return loc ? scene->room_of(*loc) : agent.room;
}

void validate(const SceneState& s) {
  if (!s.scene) throw SceneFormatError("state has no scene");
  const Scene& sc = *s.scene;
  if (s.movables.size() != sc.movables().size()) throw SceneFormatError("movable count mismatch");
  if (s.open.size() != sc.containers().size()) throw SceneFormatError("container count mismatch");
  if (s.agent.room >= sc.rooms().size()) throw SceneFormatError("agent room out of range");
  int held_count = 0;
  for (std::size_t m = 0; m < s.movables.size(); ++m) {
    const auto& loc = s.movables[m];
    if (!loc) {
      ++held_count;
      if (s.agent.held != static_cast<Index>(m)) {
        throw SceneFormatError(sc.movables()[m].id + " is held but agent does not hold it");
      }
      continue;
    }
    const auto limit = loc->relation == Relation::Inside ? sc.containers().size()
                                                         : sc.surfaces().size();
    if (loc->target >= limit) throw SceneFormatError("placement target out of range");
  }
  if (held_count > 1) throw SceneFormatError("more than one held item");
  if (s.agent.held && (held_count != 1 || s.movables.at(*s.agent.held).has_value())) {
    throw SceneFormatError("agent holds an item that is not marked held");
  }
  if (s.agent.proximity) {
    const EntityRef p = *s.agent.proximity;
    Index room = 0;
    switch (p.kind) {
      case EntityKind::Room: throw SceneFormatError("proximity cannot be a room");
      case EntityKind::Container: room = sc.containers().at(p.index).room; break;
      case EntityKind::Surface: room = sc.surfaces().at(p.index).room; break;
      case EntityKind::Movable: room = s.room_of_movable(p.index); break;
    }
    if (room != s.agent.room) throw SceneFormatError("proximity target not in agent's room");
  }
}

// --- Observation -----------------------------------------------------------

bool Observation::sees(EntityRef ref) const {
  switch (ref.kind) {
    case EntityKind::Room: return ref.index == agent_room;
    case EntityKind::Container:
      return std::any_of(containers.begin(), containers.end(),
                         [&](const auto& c) { return c.index == ref.index; });
    case EntityKind::Surface:
      return std::binary_search(surfaces.begin(), surfaces.end(), ref.index);
    case EntityKind::Movable: return find_movable(ref.index) != nullptr;
  }
  return false;
}

const VisibleMovable* Observation::find_movable(Index m) const {
  for (const auto& v : movables) {
    if (v.index == m) return &v;
  }
  return nullptr;
}

namespace {
void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}
}  // namespace

void Observation::encode(std::string& out) const {
  out.push_back('O');
  put16(out, agent_room);
  put16(out, static_cast<std::uint16_t>(containers.size()));
  for (const auto& c : containers) {
    put16(out, c.index);
    out.push_back(c.open ? 1 : 0);
  }
  put16(out, static_cast<std::uint16_t>(movables.size()));
  for (const auto& m : movables) {
    put16(out, m.index);
    if (m.location) {
      out.push_back(static_cast<char>(m.location->relation));
      put16(out, m.location->target);
    } else {
      out.push_back(static_cast<char>(0x7f));
      put16(out, 0xffff);
    }
  }
}

// --- Goals -----------------------------------------------------------------

void validate(const GoalSpec& goal, const Catalog& catalog) {
  if (goal.predicates.empty()) throw GoalParseFailure("goal has no predicates");
  for (const auto& p : goal.predicates) {
    if (p.count < 1) throw GoalParseFailure("goal count must be >= 1");
    if (catalog.kind_of(p.movable_class) != ObjectKind::Movable) {
      throw GoalParseFailure("goal object is not a movable class: " + p.movable_class);
    }
    const auto want = p.relation == Relation::Inside ? ObjectKind::Container
                                                     : ObjectKind::Surface;
    if (catalog.kind_of(p.target_class) != want) {
      throw GoalParseFailure("goal target '" + p.target_class + "' does not fit relation " +
                             std::string(to_string(p.relation)));
    }
  }
}

GoalTest::GoalTest(const Scene& scene, const GoalSpec& goal)
    : containers_(scene.containers().size()) {
  for (const auto& p : goal.predicates) {
    Compiled c;
    c.count = p.count;
    c.movable_matches.resize(scene.movables().size());
    for (std::size_t m = 0; m < scene.movables().size(); ++m) {
      c.movable_matches[m] = scene.movables()[m].cls == p.movable_class;
    }
    c.slot_matches.assign(scene.num_slots(), 0);
    for (std::size_t s = 0; s < scene.num_slots(); ++s) {
      const Placement pl = scene.placement_of_slot(s);
      if (pl.relation != p.relation) continue;
      const auto& inst = pl.relation == Relation::Inside ? scene.containers()[pl.target]
                                                         : scene.surfaces()[pl.target];
      c.slot_matches[s] = inst.cls == p.target_class;
    }
    preds_.push_back(std::move(c));
  }
}

int GoalTest::progress(const SceneState& state, std::size_t i) const {
  const auto& c = preds_[i];
  int n = 0;
  for (std::size_t m = 0; m < state.movables.size(); ++m) {
    if (!c.movable_matches[m]) continue;
    const auto& loc = state.movables[m];
    if (!loc) continue;
    const std::size_t slot =
        loc->relation == Relation::Inside ? loc->target : containers_ + loc->target;
    if (c.slot_matches[slot]) ++n;
  }
  return n;
}

bool GoalTest::satisfied(const SceneState& state) const {
  for (std::size_t i = 0; i < preds_.size(); ++i) {
    if (progress(state, i) < preds_[i].count) return false;
  }
  return true;
}

bool goal_satisfied(const SceneState& state, const GoalSpec& goal) {
  return GoalTest(*state.scene, goal).satisfied(state);
}

// --- admissibility and transitions --------------------------------------------

namespace {

bool movable_visible(const SceneState& s, Index m) {
  const auto& loc = s.movables[m];
  if (!loc) return true;  // held
  const Scene& sc = *s.scene;
  if (loc->relation == Relation::On) return sc.surfaces()[loc->target].room == s.agent.room;
  return sc.containers()[loc->target].room == s.agent.room && s.open[loc->target];
}

bool entity_visible(const SceneState& s, EntityRef e) {
  const Scene& sc = *s.scene;
  switch (e.kind) {
    case EntityKind::Room: return e.index < sc.rooms().size();
    case EntityKind::Container:
      return e.index < sc.containers().size() && sc.containers()[e.index].room == s.agent.room;
    case EntityKind::Surface:
      return e.index < sc.surfaces().size() && sc.surfaces()[e.index].room == s.agent.room;
    case EntityKind::Movable:
      return e.index < sc.movables().size() && movable_visible(s, e.index);
  }
  return false;
}

bool close_to(const SceneState& s, EntityRef e) {
  return s.agent.proximity && *s.agent.proximity == e;
}

}  // namespace

void admissible_actions(const SceneState& s, std::vector<Action>& out) {
  out.clear();
  const Scene& sc = *s.scene;
  const Index room = s.agent.room;

  for (Index r = 0; r < sc.rooms().size(); ++r) out.push_back(Action::walk(room_ref(r)));
  for (Index c = 0; c < sc.containers().size(); ++c) {
    if (sc.containers()[c].room == room) out.push_back(Action::walk(container_ref(c)));
  }
  for (Index f = 0; f < sc.surfaces().size(); ++f) {
    if (sc.surfaces()[f].room == room) out.push_back(Action::walk(surface_ref(f)));
  }
  for (Index m = 0; m < sc.movables().size(); ++m) {
    if (s.movables[m] && movable_visible(s, m)) out.push_back(Action::walk(movable_ref(m)));
  }

  if (!s.agent.proximity) return;
  const EntityRef near = *s.agent.proximity;
  if (near.kind == EntityKind::Container) {
    if (!s.open[near.index]) {
      out.push_back(Action::open(near.index));
    } else {
      out.push_back(Action::close(near.index));
    }
  }
  if (near.kind == EntityKind::Movable && !s.agent.held && s.movables[near.index]) {
    out.push_back(Action::grab(near.index));
  }
  if (s.agent.held) {
    if (near.kind == EntityKind::Container && s.open[near.index]) {
      out.push_back(Action::put_in(*s.agent.held, near.index));
    }
    if (near.kind == EntityKind::Surface) {
      out.push_back(Action::put_back(*s.agent.held, near.index));
    }
  }
}

std::vector<Action> admissible_actions(const SceneState& state) {
  std::vector<Action> out;
  admissible_actions(state, out);
  return out;
}

std::optional<std::string> precondition_failure(const SceneState& s, const Action& a) {
  switch (a.kind) {
    case ActionKind::Walk:
      if (a.first.kind == EntityKind::Room) {
        if (a.first.index >= s.scene->rooms().size()) return "unknown room";
        return std::nullopt;
      }
      if (a.first.kind == EntityKind::Movable && a.first.index < s.movables.size() &&
          !s.movables[a.first.index]) {
        return "cannot walk to the held item";
      }
      if (!entity_visible(s, a.first)) return "target is not visible";
      return std::nullopt;
    case ActionKind::Open:
    case ActionKind::Close:
      if (a.first.kind != EntityKind::Container ||
          a.first.index >= s.scene->containers().size()) {
        return "target is not a container";
      }
      if (!close_to(s, a.first)) return "agent is not close to the container";
      if (a.kind == ActionKind::Open && s.open[a.first.index]) return "already open";
      if (a.kind == ActionKind::Close && !s.open[a.first.index]) return "already closed";
      return std::nullopt;
    case ActionKind::Grab:
      if (a.first.kind != EntityKind::Movable || a.first.index >= s.movables.size()) {
        return "target is not a movable item";
      }
      if (s.agent.held) return "agent is already holding an item";
      if (!close_to(s, a.first)) return "agent is not close to the item";
      return std::nullopt;
    case ActionKind::PutIn:
    case ActionKind::PutBack: {
      const bool in = a.kind == ActionKind::PutIn;
      const auto want = in ? EntityKind::Container : EntityKind::Surface;
      if (a.first.kind != EntityKind::Movable || a.second.kind != want) {
        return "argument kinds do not match the action";
      }
      if (!s.agent.held || *s.agent.held != a.first.index) {
        return "agent is not holding the item";
      }
      if (!close_to(s, a.second)) return "agent is not close to the target";
      if (in && !s.open[a.second.index]) return "container is closed";
      return std::nullopt;
    }
  }
  return "unknown action";
}

bool is_admissible(const SceneState& state, const Action& action) {
  return !precondition_failure(state, action).has_value();
}

void apply(SceneState& s, const Action& a) {
  if (auto why = precondition_failure(s, a)) {
    throw PreconditionViolated(action_label(*s.scene, a), *why);
  }
  switch (a.kind) {
    case ActionKind::Walk:
      if (a.first.kind == EntityKind::Room) {
        s.agent.room = a.first.index;
        s.agent.proximity.reset();
      } else {
        s.agent.proximity = a.first;
      }
      break;
    case ActionKind::Open: s.open[a.first.index] = 1; break;
    case ActionKind::Close: s.open[a.first.index] = 0; break;
    case ActionKind::Grab: {
      // The agent stays at the furniture the item was taken from.
      const Placement from = *s.movables[a.first.index];
      s.movables[a.first.index].reset();
      s.agent.held = a.first.index;
      s.agent.proximity = from.relation == Relation::Inside ? container_ref(from.target)
                                                            : surface_ref(from.target);
      break;
    }
    case ActionKind::PutIn:
    case ActionKind::PutBack: {
      const Relation rel = a.kind == ActionKind::PutIn ? Relation::Inside : Relation::On;
      s.movables[a.first.index] = Placement{rel, a.second.index};
      s.agent.held.reset();
      break;
    }
  }
}

SceneState transition(const SceneState& state, const Action& action) {
  SceneState next = state;
  apply(next, action);
  return next;
}

Observation observe(const SceneState& s) {
  const Scene& sc = *s.scene;
  Observation o;
  o.agent_room = s.agent.room;
  for (Index c = 0; c < sc.containers().size(); ++c) {
    if (sc.containers()[c].room == s.agent.room) o.containers.push_back({c, s.open[c] != 0});
  }
  for (Index f = 0; f < sc.surfaces().size(); ++f) {
    if (sc.surfaces()[f].room == s.agent.room) o.surfaces.push_back(f);
  }
  for (Index m = 0; m < sc.movables().size(); ++m) {
    if (movable_visible(s, m)) o.movables.push_back({m, s.movables[m]});
  }
  return o;
}

StepResult step_with_reward(const SceneState& state, const Action& action,
                            const GoalTest& goal, double goal_reward) {
  StepResult r{transition(state, action), {}, 0.0, false};
  r.observation = observe(r.state);
  if (goal.satisfied(r.state)) {
    r.reward = goal_reward;
    r.done = true;
  }
  return r;
}

StepResult step_with_reward(const SceneState& state, const Action& action,
                            const GoalSpec& goal, double goal_reward) {
  return step_with_reward(state, action, GoalTest(*state.scene, goal), goal_reward);
}

std::vector<std::size_t> inspected_slots(const Scene& scene, const Observation& obs) {
  std::vector<std::size_t> out;
  for (const auto& c : obs.containers) {
    if (c.open) out.push_back(scene.slot({Relation::Inside, c.index}));
  }
  for (Index f : obs.surfaces) out.push_back(scene.slot({Relation::On, f}));
  return out;
}

// --- rendering ----------------------------------------------------------------

std::string render_action(const Scene& sc, const Action& a) {
  switch (a.kind) {
    case ActionKind::Walk: return "walk to the " + sc.display(a.first);
    case ActionKind::Open: return "open the " + sc.display(a.first);
    case ActionKind::Close: return "close the " + sc.display(a.first);
    case ActionKind::Grab: return "grab the " + sc.display(a.first);
    case ActionKind::PutIn:
      return "put the " + sc.display(a.first) + " inside the " + sc.display(a.second);
    case ActionKind::PutBack:
      return "put the " + sc.display(a.first) + " on the " + sc.display(a.second);
  }
  return {};
}

std::string action_label(const Scene& sc, const Action& a) {
  auto id = [&](EntityRef e) -> std::string {
    switch (e.kind) {
      case EntityKind::Room:
        return e.index < sc.rooms().size() ? sc.rooms()[e.index] : "?";
      case EntityKind::Container:
        return e.index < sc.containers().size() ? sc.containers()[e.index].id : "?";
      case EntityKind::Surface:
        return e.index < sc.surfaces().size() ? sc.surfaces()[e.index].id : "?";
      case EntityKind::Movable:
        return e.index < sc.movables().size() ? sc.movables()[e.index].id : "?";
    }
    return "?";
  };
  switch (a.kind) {
    case ActionKind::Walk: return "Walk(" + id(a.first) + ")";
    case ActionKind::Open: return "Open(" + id(a.first) + ")";
    case ActionKind::Close: return "Close(" + id(a.first) + ")";
    case ActionKind::Grab: return "Grab(" + id(a.first) + ")";
    case ActionKind::PutIn: return "PutIn(" + id(a.first) + ", " + id(a.second) + ")";
    case ActionKind::PutBack: return "PutBack(" + id(a.first) + ", " + id(a.second) + ")";
  }
  return {};
}

std::string render_observation(const Scene& sc, const Observation& o) {
  std::vector<std::string> parts;
  const std::string room = sc.display(room_ref(o.agent_room));
  for (Index f : o.surfaces) {
    const auto name = sc.display(surface_ref(f));
    parts.push_back(std::string(article(name)) + " " + name + " is inside the " + room);
  }
  for (const auto& c : o.containers) {
    const auto name = sc.display(container_ref(c.index));
    parts.push_back(std::string(article(name)) + " " + name + " is inside the " + room +
                    " and " + name + " is " + (c.open ? "open" : "closed"));
  }
  for (const auto& m : o.movables) {
    const auto name = sc.display(movable_ref(m.index));
    if (!m.location) {
      parts.push_back("you are holding " + std::string(article(name)) + " " + name);
      continue;
    }
    parts.push_back(std::string(article(name)) + " " + name + " is " +
                    (m.location->relation == Relation::Inside ? "inside" : "on") + " the " +
                    sc.display(*m.location));
  }
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ", ";
    out += parts[i];
  }
  return out;
}

std::string render_goal(const GoalSpec& goal, const Catalog& catalog) {
  static const char* const kCounts[] = {"zero", "one", "two", "three", "four", "five"};
  std::string out = "put ";
  for (std::size_t i = 0; i < goal.predicates.size(); ++i) {
    const auto& p = goal.predicates[i];
    if (i) out += " and ";
    std::string noun = catalog.display(p.movable_class);
    if (p.count > 1) noun += "s";
    out += (p.count < 6 ? std::string(kCounts[p.count]) : std::to_string(p.count)) + " " +
           noun + (p.relation == Relation::Inside ? " inside the " : " on the ") +
           catalog.display(p.target_class);
  }
  return out;
}

std::string goal_label(const GoalSpec& goal) {
  std::string out;
  for (std::size_t i = 0; i < goal.predicates.size(); ++i) {
    const auto& p = goal.predicates[i];
    if (i) out += "; ";
    out += std::string(to_string(p.relation)) + "(" + p.movable_class + ", " +
           p.target_class + "):" + std::to_string(p.count);
  }
  return out;
}

}  // namespace llmmcts
