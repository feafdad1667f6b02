#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "llmmcts/provider.hpp"
#include "llmmcts/similarity.hpp"
#include "llmmcts/worldsim.hpp"

namespace llmmcts {

inline constexpr double kGroundingThreshold = 0.2;

struct GroundingResult {
  std::string canonical;
  double score = 0.0;
  bool accepted = false;
  std::size_t index = 0;  // position of the winner in the candidate list
};

// argmax similarity over candidates; ties go to the earlier candidate.
// Requires a non-empty candidate list.
GroundingResult ground_name(std::string_view text, std::span<const std::string> candidates,
                            const SimilarityProvider& sim,
                            double threshold = kGroundingThreshold);

struct ActionGrounding {
  Action action;
  std::string rendered;
  double score = 0.0;
  bool accepted = false;
  std::size_t index = 0;
};

// Renders each admissible action and returns the best match for `text`.
ActionGrounding ground_action(std::string_view text, const Scene& scene,
                              std::span<const Action> admissible, const SimilarityProvider& sim,
                              double threshold = kGroundingThreshold);

// A placement phrase resolved to a fixture class.
struct PlacementGuess {
  Relation relation;
  std::string fixture_class;
  double score;
};

// "inside the fridge" -> (Inside, fridge). A leading relation word restricts
// the candidates to containers (inside/in/into) or surfaces (on/onto);
// without one, every fixture class in the scene competes. Returns nullopt
// when the best match falls below the threshold.
std::optional<PlacementGuess> ground_placement(std::string_view phrase, const Scene& scene,
                                               const SimilarityProvider& sim,
                                               double threshold = kGroundingThreshold);

struct GoalTuple {
  std::string object;
  Relation relation;
  std::string target;
};

// Accepts "(a, rel, b)" and "a, rel, b" forms, one per line; several
// parenthesised tuples may share a line. Unparseable lines are skipped.
std::vector<GoalTuple> parse_goal_tuples(std::string_view text);
std::optional<Relation> relation_from_word(std::string_view word);

// Queries the provider, parses tuples, grounds names against the catalog and
// folds repeated tuples into counts. Throws GoalParseFailure when nothing
// usable comes back; never returns a partially grounded goal.
GoalSpec translate_goal(std::string_view instruction, CommonsenseProvider& provider,
                        const Catalog& catalog, const SimilarityProvider& sim);

}  // namespace llmmcts
