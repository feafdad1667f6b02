#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "llmmcts/worldsim.hpp"

namespace llmmcts {

inline constexpr int kSceneFormatVersion = 1;
inline constexpr int kTaskFormatVersion = 1;

// Scene file: {"format_version", "rooms", "containers": [{id, class, room, open}],
// "surfaces": [{id, class, room}], "movables": [{id, class, placement}],
// "agent": {room}}. Placement is {"relation": "Inside"|"On", "target": <id>}.
// File ids are free labels; instances are re-identified as class.ordinal in
// order of appearance.
SceneState scene_from_json(const nlohmann::json& j,
                           const Catalog& catalog = Catalog::household());
nlohmann::json scene_to_json(const SceneState& state);
SceneState load_scene(const std::filesystem::path& path,
                      const Catalog& catalog = Catalog::household());

struct TaskSpec {
  std::string id;
  std::string instruction;
  GoalSpec goal;  // ground truth, used only for scoring
  std::string category;
  std::string apartment;
};

TaskSpec task_from_json(const nlohmann::json& j);
nlohmann::json task_to_json(const TaskSpec& task);
TaskSpec load_task(const std::filesystem::path& path);

nlohmann::json goal_to_json(const GoalSpec& goal);
GoalSpec goal_from_json(const nlohmann::json& j);

Relation parse_relation(std::string_view text);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace llmmcts
