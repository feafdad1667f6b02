#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "llmmcts/history.hpp"
#include "llmmcts/prompts.hpp"
#include "llmmcts/rng.hpp"
#include "llmmcts/worldsim.hpp"

namespace llmmcts {

// Everything a policy query may look at. Structured fields serve the scripted
// provider; the text accessors render the same information for an LLM. The
// sampled simulator state is deliberately absent: a policy only sees h.
struct PolicyQuery {
  const Scene* scene = nullptr;
  const GoalSpec* goal = nullptr;  // the translated goal, not ground truth
  std::string instruction;
  const History* history = nullptr;
  std::span<const Action> admissible;
  std::span<const PromptExample> examples;

  std::string goal_text() const;
  std::string history_text() const { return history->render_actions(*scene); }
  std::string observation_text() const {
    return render_observation(*scene, history->last_observation());
  }
};

// The single seam through which commonsense knowledge enters the planner.
// Every call is one sample; callers own the repetition and may call from
// several threads at once.
class CommonsenseProvider {
 public:
  virtual ~CommonsenseProvider() = default;

  virtual std::string name() const = 0;

  // One sample of plausible placements for an object class, as free-text
  // phrases like "inside fridge". Empty when the class is unknown.
  // `sample` numbers the call within the caller's M-sample loop.
  virtual std::vector<std::string> sample_object_placements(std::string_view object_class,
                                                            const Scene& scene, Rng& rng,
                                                            int sample) = 0;

  // One sampled plan continuation; the first phrase is the proposed action.
  virtual std::vector<std::string> sample_next_actions(const PolicyQuery& query, Rng& rng,
                                                       int sample) = 0;

  // Free-text goal tuples for an instruction, parsed by translate_goal.
  virtual std::string translate_goal_text(std::string_view instruction) = 0;
};

}  // namespace llmmcts
