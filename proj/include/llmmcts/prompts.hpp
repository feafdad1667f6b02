#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "llmmcts/worldsim.hpp"

namespace llmmcts {

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

// One expert trajectory rendered in the in-context format: the goal, the
// actions already taken, what is visible at that point, and the rest of the
// plan ending in "done".
struct PromptExample {
  std::string instruction;
  std::vector<std::string> completed_actions;
  std::string observation;
  std::vector<std::string> next_actions;
  GoalSpec goal;  // ground truth predicates, used for dataset bookkeeping
};

nlohmann::json example_to_json(const PromptExample& ex);
PromptExample example_from_json(const nlohmann::json& j);
std::vector<PromptExample> load_prompt_dataset(const std::string& path);
void save_prompt_dataset(const std::string& path, std::span<const PromptExample> data);

// A parsed template file. Sections start with "@@ <name>" lines; slots are
// written {name}. Fixed conversation turns use "user"/"assistant", per-example
// turns "example_user"/"example_assistant", the final question "query".
class PromptTemplate {
 public:
  PromptTemplate(std::string name, std::string_view text);

  const std::string& name() const { return name_; }
  std::vector<ChatMessage> render(const std::map<std::string, std::string>& slots,
                                  std::span<const std::map<std::string, std::string>> examples =
                                      {}) const;

 private:
  struct Section {
    std::string kind;
    std::string body;
  };
  std::string name_;
  std::vector<Section> sections_;
};

// Templates shipped with the library (prompts/*.txt, embedded at build time).
const PromptTemplate& policy_template();
const PromptTemplate& world_model_template();
const PromptTemplate& goal_template();

// Replaces every {key} in `text`; unknown slots are left untouched.
std::string fill_slots(std::string_view text, const std::map<std::string, std::string>& slots);

// Canonical single-string form of a conversation, used for hashing.
std::string flatten(std::span<const ChatMessage> messages);

// "Answer: Inside fridge, On kitchen table." -> {"Inside fridge", "On kitchen table"}
std::vector<std::string> parse_placement_answer(std::string_view text);
// "grab the apple, walk to the fridge, done." -> {"grab the apple", ...}
std::vector<std::string> parse_action_list(std::string_view text);

// Comma-joined display names used by the world-model prompt.
std::string list_rooms(const Scene& scene);
std::string list_fixture_classes(const Scene& scene, ObjectKind kind);

}  // namespace llmmcts
