#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "llmmcts/catalog.hpp"

namespace llmmcts {

using Index = std::uint16_t;

enum class Relation : std::uint8_t { Inside, On };

std::string_view to_string(Relation r);

// Where a movable rests. Inside targets a container index, On a surface index.
struct Placement {
  Relation relation = Relation::On;
  Index target = 0;

  friend auto operator<=>(const Placement&, const Placement&) = default;
};

// nullopt means the agent is holding the item.
using Location = std::optional<Placement>;

enum class EntityKind : std::uint8_t { Room, Container, Surface, Movable };

struct EntityRef {
  EntityKind kind = EntityKind::Room;
  Index index = 0;

  friend auto operator<=>(const EntityRef&, const EntityRef&) = default;
};

inline EntityRef room_ref(Index i) { return {EntityKind::Room, i}; }
inline EntityRef container_ref(Index i) { return {EntityKind::Container, i}; }
inline EntityRef surface_ref(Index i) { return {EntityKind::Surface, i}; }
inline EntityRef movable_ref(Index i) { return {EntityKind::Movable, i}; }

enum class ActionKind : std::uint8_t { Walk, Open, Close, Grab, PutIn, PutBack };

// Grounded action. Default ordering is by variant, then by argument ids, which
// is the stable order used for every tie-break downstream.
struct Action {
  ActionKind kind = ActionKind::Walk;
  EntityRef first;
  EntityRef second;  // only meaningful for PutIn / PutBack

  static Action walk(EntityRef target) { return {ActionKind::Walk, target, {}}; }
  static Action open(Index c) { return {ActionKind::Open, container_ref(c), {}}; }
  static Action close(Index c) { return {ActionKind::Close, container_ref(c), {}}; }
  static Action grab(Index m) { return {ActionKind::Grab, movable_ref(m), {}}; }
  static Action put_in(Index m, Index c) {
    return {ActionKind::PutIn, movable_ref(m), container_ref(c)};
  }
  static Action put_back(Index m, Index s) {
    return {ActionKind::PutBack, movable_ref(m), surface_ref(s)};
  }

  friend auto operator<=>(const Action&, const Action&) = default;
};

// A container, surface or movable instance. Instance ids are (class, ordinal)
// pairs; `id` is the printable form "class.ordinal".
struct Instance {
  std::string cls;
  int ordinal = 0;
  std::string id;
  Index room = 0;  // unused for movables
  std::string display;  // spoken name; "kitchen cabinet 2" when the class repeats
};

// Immutable apartment layout: rooms, furniture and the set of movable
// instances. Each instance list is sorted by (class, ordinal).
class Scene {
 public:
  struct FixtureSpec {
    std::string cls;
    std::string room;
  };

  Scene(std::vector<std::string> rooms, std::vector<FixtureSpec> containers,
        std::vector<FixtureSpec> surfaces, std::vector<std::string> movables,
        const Catalog& catalog = Catalog::household());

  const Catalog& catalog() const { return *catalog_; }
  const std::vector<std::string>& rooms() const { return rooms_; }
  const std::vector<Instance>& containers() const { return containers_; }
  const std::vector<Instance>& surfaces() const { return surfaces_; }
  const std::vector<Instance>& movables() const { return movables_; }

  // Placement slots: containers first, then surfaces. This is the belief
  // vector layout.
  std::size_t num_slots() const { return containers_.size() + surfaces_.size(); }
  std::size_t slot(const Placement& p) const {
    return p.relation == Relation::Inside ? p.target : containers_.size() + p.target;
  }
  Placement placement_of_slot(std::size_t slot) const;
  Index room_of(const Placement& p) const;
  Index room_of_slot(std::size_t slot) const { return room_of(placement_of_slot(slot)); }

  std::optional<Index> room_index(std::string_view name) const;
  // Lookup by printable id ("fridge.0") or room name.
  std::optional<EntityRef> find(std::string_view id) const;
  const std::string& id(EntityRef ref) const;
  const std::string& cls(EntityRef ref) const;
  std::string display(EntityRef ref) const;
  std::string display(const Placement& p) const;
  std::string id(const Placement& p) const;  // "Inside(fridge.0)"

  // All instances of a class, in stable order.
  std::vector<EntityRef> instances_of(std::string_view cls) const;
  // Distinct fixture (container + surface) classes present, sorted.
  std::vector<std::string> fixture_classes() const;
  std::vector<std::string> movable_classes() const;

 private:
  const Catalog* catalog_;
  std::vector<std::string> rooms_;
  std::vector<Instance> containers_;
  std::vector<Instance> surfaces_;
  std::vector<Instance> movables_;
};

using ScenePtr = std::shared_ptr<const Scene>;

struct AgentPose {
  Index room = 0;
  std::optional<EntityRef> proximity;
  std::optional<Index> held;

  friend bool operator==(const AgentPose&, const AgentPose&) = default;
};

// Ground-truth world state. Dynamic parts only; the layout lives in `scene`.
struct SceneState {
  ScenePtr scene;
  std::vector<Location> movables;    // indexed like scene->movables()
  std::vector<std::uint8_t> open;    // indexed like scene->containers()
  AgentPose agent;

  bool is_open(Index container) const { return open[container] != 0; }
  // Room the movable is currently in (the agent's room when held).
  Index room_of_movable(Index m) const;

  friend bool operator==(const SceneState& a, const SceneState& b) {
    return a.scene == b.scene && a.movables == b.movables && a.open == b.open &&
           a.agent == b.agent;
  }
};

// Throws SceneFormatError when a state breaks its invariants (held item
// consistency, targets in range, proximity in the agent's room).
void validate(const SceneState& state);

struct VisibleContainer {
  Index index;
  bool open;
  friend auto operator<=>(const VisibleContainer&, const VisibleContainer&) = default;
};

struct VisibleMovable {
  Index index;
  Location location;
  friend auto operator<=>(const VisibleMovable&, const VisibleMovable&) = default;
};

// What the agent sees: everything in its room except the inside of closed
// containers, plus whatever it holds. All lists sorted by index.
struct Observation {
  Index agent_room = 0;
  std::vector<VisibleContainer> containers;
  std::vector<Index> surfaces;
  std::vector<VisibleMovable> movables;

  bool sees(EntityRef ref) const;
  const VisibleMovable* find_movable(Index m) const;
  // Compact canonical byte encoding, appended to `out`.
  void encode(std::string& out) const;

  friend bool operator==(const Observation&, const Observation&) = default;
};

struct GoalPredicate {
  std::string movable_class;
  Relation relation = Relation::Inside;
  std::string target_class;
  int count = 1;

  friend bool operator==(const GoalPredicate&, const GoalPredicate&) = default;
};

struct GoalSpec {
  std::vector<GoalPredicate> predicates;

  friend bool operator==(const GoalSpec&, const GoalSpec&) = default;
};

// Throws GoalParseFailure if a count is < 1 or a class is unknown/mis-kinded.
void validate(const GoalSpec& goal, const Catalog& catalog);

// Goal compiled against one scene for fast repeated checks.
class GoalTest {
 public:
  GoalTest() = default;
  GoalTest(const Scene& scene, const GoalSpec& goal);

  bool satisfied(const SceneState& state) const;
  // Number of instances currently counting toward predicate i.
  int progress(const SceneState& state, std::size_t i) const;
  std::size_t size() const { return preds_.size(); }

 private:
  struct Compiled {
    std::vector<std::uint8_t> movable_matches;
    std::vector<std::uint8_t> slot_matches;
    int count;
  };
  std::vector<Compiled> preds_;
  std::size_t containers_ = 0;
};

// --- operations -----------------------------------------------------------

std::vector<Action> admissible_actions(const SceneState& state);
// Allocation-free variant for hot loops; clears and fills `out`.
void admissible_actions(const SceneState& state, std::vector<Action>& out);

// Reason the action is not admissible, or nullopt when it is.
std::optional<std::string> precondition_failure(const SceneState& state,
                                                const Action& action);
bool is_admissible(const SceneState& state, const Action& action);

// Applies `action` in place. Throws PreconditionViolated.
void apply(SceneState& state, const Action& action);
SceneState transition(const SceneState& state, const Action& action);

Observation observe(const SceneState& state);

bool goal_satisfied(const SceneState& state, const GoalSpec& goal);

inline constexpr double kDefaultGoalReward = 100.0;

struct StepResult {
  SceneState state;
  Observation observation;
  double reward = 0.0;
  bool done = false;
};

StepResult step_with_reward(const SceneState& state, const Action& action,
                            const GoalSpec& goal,
                            double goal_reward = kDefaultGoalReward);
StepResult step_with_reward(const SceneState& state, const Action& action,
                            const GoalTest& goal,
                            double goal_reward = kDefaultGoalReward);

// Slots whose full contents are revealed by `obs`: every surface in the
// agent's room and the inside of every open container there.
std::vector<std::size_t> inspected_slots(const Scene& scene, const Observation& obs);

// --- text rendering ---------------------------------------------------------

// "walk to the kitchen table", "put the apple inside the fridge", ...
std::string render_action(const Scene& scene, const Action& action);
// "Walk(kitchentable.0)"
std::string action_label(const Scene& scene, const Action& action);
// "a kitchen table is inside the kitchen, an apple is on the kitchen table, ..."
std::string render_observation(const Scene& scene, const Observation& obs);
// "put one apple inside the fridge and one plate on the kitchen table"
std::string render_goal(const GoalSpec& goal, const Catalog& catalog);
// "Inside(apple, fridge):1; On(plate, kitchentable):1"
std::string goal_label(const GoalSpec& goal);

}  // namespace llmmcts
