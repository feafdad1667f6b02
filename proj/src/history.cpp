#include "llmmcts/history.hpp"

#include <cstdio>

namespace llmmcts {

void encode_action(const Action& a, std::string& out) {
  out.push_back('A');
  out.push_back(static_cast<char>(a.kind));
  for (const EntityRef& e : {a.first, a.second}) {
    out.push_back(static_cast<char>(e.kind));
    out.push_back(static_cast<char>(e.index & 0xff));
    out.push_back(static_cast<char>(e.index >> 8));
  }
}

std::string key_digest(const std::string& key) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : key) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

History::History(Observation initial) : initial_(std::move(initial)) {
  initial_.encode(key_);
}

void History::push(const Action& action, Observation observation) {
  marks_.push_back(key_.size());
  encode_action(action, key_);
  observation.encode(key_);
  steps_.push_back({action, std::move(observation)});
}

void History::pop() {
  steps_.pop_back();
  key_.resize(marks_.back());
  marks_.pop_back();
}

std::optional<EntityRef> History::proximity() const {
  std::optional<EntityRef> near;
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    const Action& a = steps_[i].action;
    switch (a.kind) {
      case ActionKind::Walk:
        if (a.first.kind == EntityKind::Room) {
          near.reset();
        } else {
          near = a.first;
        }
        break;
      case ActionKind::Grab: {
        // Mirrors the simulator: the agent stays at the item's furniture.
        const Observation& before = i == 0 ? initial_ : steps_[i - 1].observation;
        if (const auto* seen = before.find_movable(a.first.index); seen && seen->location) {
          const Placement p = *seen->location;
          near = p.relation == Relation::Inside ? container_ref(p.target)
                                                : surface_ref(p.target);
        }
        break;
      }
      default: break;
    }
  }
  return near;
}

std::optional<Index> History::held() const {
  for (const auto& m : last_observation().movables) {
    if (!m.location) return m.index;
  }
  return std::nullopt;
}

std::string History::render_actions(const Scene& scene) const {
  if (steps_.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    if (i) out += ", ";
    out += render_action(scene, steps_[i].action);
  }
  return out;
}

}  // namespace llmmcts
