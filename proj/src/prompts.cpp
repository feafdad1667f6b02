#include "llmmcts/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "llmmcts/errors.hpp"
#include "llmmcts/scene_io.hpp"

namespace llmmcts {

// Defined in the build-generated prompt_templates.cpp.
std::string_view embedded_template(std::string_view name);

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split_any(std::string_view text, std::string_view seps) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    auto t = trim(cur);
    if (!t.empty()) out.push_back(std::move(t));
    cur.clear();
  };
  for (char c : text) {
    if (seps.find(c) != std::string_view::npos) {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

// Drops a leading "Answer:" / "Next actions:" style label.
std::string_view strip_label(std::string_view text, std::string_view label) {
  auto t = text;
  while (!t.empty() && std::isspace(static_cast<unsigned char>(t.front()))) t.remove_prefix(1);
  if (t.size() >= label.size()) {
    bool same = true;
    for (std::size_t i = 0; i < label.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(t[i])) != label[i]) {
        same = false;
        break;
      }
    }
    if (same) t.remove_prefix(label.size());
  }
  return t;
}

}  // namespace

json example_to_json(const PromptExample& ex) {
  return {{"instruction", ex.instruction},
          {"goal", goal_to_json(ex.goal)},
          {"completed_actions", ex.completed_actions},
          {"observation", ex.observation},
          {"next_actions", ex.next_actions}};
}

PromptExample example_from_json(const json& j) {
  PromptExample ex;
  ex.instruction = j.at("instruction").get<std::string>();
  ex.goal = goal_from_json(j.value("goal", json::array()));
  ex.completed_actions = j.value("completed_actions", std::vector<std::string>{});
  ex.observation = j.value("observation", std::string{});
  ex.next_actions = j.value("next_actions", std::vector<std::string>{});
  return ex;
}

std::vector<PromptExample> load_prompt_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SceneFormatError("cannot open prompt dataset " + path);
  std::vector<PromptExample> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      out.push_back(example_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw SceneFormatError(path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void save_prompt_dataset(const std::string& path, std::span<const PromptExample> data) {
  std::ofstream out(path);
  if (!out) throw SceneFormatError("cannot write " + path);
  for (const auto& ex : data) out << example_to_json(ex).dump() << '\n';
}

PromptTemplate::PromptTemplate(std::string name, std::string_view text) : name_(std::move(name)) {
  std::size_t pos = 0;
  Section* cur = nullptr;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = text.substr(pos, nl - pos);
    if (line.starts_with("@@ ")) {
      sections_.push_back({trim(line.substr(3)), {}});
      cur = &sections_.back();
    } else if (cur) {
      if (!cur->body.empty()) cur->body.push_back('\n');
      cur->body += line;
    }
    pos = nl + 1;
  }
  static const std::set<std::string> kinds = {"system", "user", "assistant", "example_user",
                                               "example_assistant", "query"};
  for (auto& s : sections_) {
    if (!kinds.contains(s.kind)) {
      throw SceneFormatError("template " + name_ + ": unknown section '" + s.kind + "'");
    }
    // Trailing blank lines are layout, not content.
    while (!s.body.empty() && s.body.back() == '\n') s.body.pop_back();
  }
}

std::vector<ChatMessage> PromptTemplate::render(
    const std::map<std::string, std::string>& slots,
    std::span<const std::map<std::string, std::string>> examples) const {
  std::vector<ChatMessage> out;
  bool examples_done = false;
  for (std::size_t i = 0; i < sections_.size(); ++i) {
    const auto& s = sections_[i];
    if (s.kind == "example_user" || s.kind == "example_assistant") {
      if (examples_done) continue;
      examples_done = true;
      // Each example expands every example_* section in order.
      std::vector<const Section*> shot;
      for (std::size_t k = i; k < sections_.size() && sections_[k].kind.starts_with("example_");
           ++k) {
        shot.push_back(&sections_[k]);
      }
      for (const auto& ex : examples) {
        for (const Section* part : shot) {
          out.push_back({part->kind == "example_user" ? "user" : "assistant",
                         fill_slots(part->body, ex)});
        }
      }
      continue;
    }
    const std::string role = s.kind == "query" ? "user" : s.kind;
    out.push_back({role, fill_slots(s.body, slots)});
  }
  return out;
}

std::string fill_slots(std::string_view text, const std::map<std::string, std::string>& slots) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      const auto close = text.find('}', i);
      if (close != std::string_view::npos) {
        const std::string key(text.substr(i + 1, close - i - 1));
        if (auto it = slots.find(key); it != slots.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

std::string flatten(std::span<const ChatMessage> messages) {
  std::string out;
  for (const auto& m : messages) {
    out += "<|" + m.role + "|>\n";
    out += m.content;
    out += '\n';
  }
  return out;
}

std::vector<std::string> parse_placement_answer(std::string_view text) {
  // Only the first answer line counts; models sometimes continue the pattern.
  auto t = strip_label(text, "answer:");
  if (auto q = t.find("Question"); q != std::string_view::npos) t = t.substr(0, q);
  return split_any(t, ",;.\n");
}

std::vector<std::string> parse_action_list(std::string_view text) {
  auto t = strip_label(text, "next actions:");
  if (auto g = t.find("Goal:"); g != std::string_view::npos) t = t.substr(0, g);
  return split_any(t, ",;.\n");
}

std::string list_rooms(const Scene& scene) {
  std::vector<std::string> names;
  for (const auto& r : scene.rooms()) names.push_back(scene.catalog().display(r));
  return join(names, ", ");
}

std::string list_fixture_classes(const Scene& scene, ObjectKind kind) {
  std::vector<std::string> names;
  const auto& list = kind == ObjectKind::Container ? scene.containers() : scene.surfaces();
  std::set<std::string> seen;
  for (const auto& inst : list) {
    if (seen.insert(inst.cls).second) names.push_back(scene.catalog().display(inst.cls));
  }
  return join(names, ", ");
}

const PromptTemplate& policy_template() {
  static const PromptTemplate t("policy_v1", embedded_template("policy_v1"));
  return t;
}

const PromptTemplate& world_model_template() {
  static const PromptTemplate t("world_model_v1", embedded_template("world_model_v1"));
  return t;
}

const PromptTemplate& goal_template() {
  static const PromptTemplate t("goal_v1", embedded_template("goal_v1"));
  return t;
}

}  // namespace llmmcts
