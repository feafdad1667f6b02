#pragma once

#include <optional>
#include <string>
#include <vector>

#include "llmmcts/worldsim.hpp"

namespace llmmcts {

struct HistoryStep {
  Action action;
  Observation observation;
};

// h_t = (o_0, a_0, o_1, ..., a_{t-1}, o_t). The byte key is a canonical
// serialization of the whole sequence and identifies a search-tree node.
class History {
 public:
  explicit History(Observation initial);

  void push(const Action& action, Observation observation);
  void pop();

  const Observation& initial() const { return initial_; }
  const std::vector<HistoryStep>& steps() const { return steps_; }
  const Observation& last_observation() const {
    return steps_.empty() ? initial_ : steps_.back().observation;
  }
  std::size_t size() const { return steps_.size(); }
  const std::string& key() const { return key_; }

  // Agent proximity implied by the executed actions.
  std::optional<EntityRef> proximity() const;
  // Held item, read from the last observation.
  std::optional<Index> held() const;

  // "walk to the kitchen, grab the apple" or "none".
  std::string render_actions(const Scene& scene) const;

 private:
  Observation initial_;
  std::vector<HistoryStep> steps_;
  std::string key_;
  std::vector<std::size_t> marks_;
};

void encode_action(const Action& action, std::string& out);
// Short printable digest of a history key (FNV-1a, hex).
std::string key_digest(const std::string& key);

}  // namespace llmmcts
