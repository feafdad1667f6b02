#include "llmmcts/grounding.hpp"

#include <cctype>
#include <map>

#include "llmmcts/errors.hpp"

namespace llmmcts {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::optional<GoalTuple> tuple_from_fields(std::string_view body) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= body.size(); ++i) {
    if (i == body.size() || body[i] == ',') {
      parts.push_back(trim(body.substr(start, i - start)));
      start = i + 1;
    }
  }
  if (parts.size() != 3 || parts[0].empty() || parts[2].empty()) return std::nullopt;
  const auto rel = relation_from_word(parts[1]);
  if (!rel) return std::nullopt;
  return GoalTuple{parts[0], *rel, parts[2]};
}

}  // namespace

GroundingResult ground_name(std::string_view text, std::span<const std::string> candidates,
                            const SimilarityProvider& sim, double threshold) {
  const Embedding q = sim.embed(text);
  GroundingResult best;
  best.score = -2.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double s = sim.score(q, sim.embed(candidates[i]));
    if (s > best.score) {
      best.score = s;
      best.index = i;
    }
  }
  if (!candidates.empty()) best.canonical = candidates[best.index];
  best.accepted = !candidates.empty() && best.score >= threshold;
  return best;
}

ActionGrounding ground_action(std::string_view text, const Scene& scene,
                              std::span<const Action> admissible, const SimilarityProvider& sim,
                              double threshold) {
  const Embedding q = sim.embed(text);
  ActionGrounding best;
  best.score = -2.0;
  for (std::size_t i = 0; i < admissible.size(); ++i) {
    auto rendered = render_action(scene, admissible[i]);
    const double s = sim.score(q, sim.embed(rendered));
    if (s > best.score) {
      best.score = s;
      best.index = i;
      best.action = admissible[i];
      best.rendered = std::move(rendered);
    }
  }
  best.accepted = !admissible.empty() && best.score >= threshold;
  return best;
}

std::optional<Relation> relation_from_word(std::string_view word) {
  const auto w = lower(trim(word));
  if (w == "inside" || w == "in" || w == "into") return Relation::Inside;
  if (w == "on" || w == "onto") return Relation::On;
  return std::nullopt;
}

std::optional<PlacementGuess> ground_placement(std::string_view phrase, const Scene& scene,
                                               const SimilarityProvider& sim, double threshold) {
  auto text = trim(phrase);
  std::optional<Relation> rel;
  if (auto sp = text.find(' '); sp != std::string::npos) {
    rel = relation_from_word(std::string_view(text).substr(0, sp));
    if (rel) text = trim(std::string_view(text).substr(sp + 1));
  }

  std::vector<std::string> candidates;
  std::vector<Relation> relations;
  auto add = [&](const std::vector<Instance>& list, Relation r) {
    for (const auto& inst : list) {
      bool dup = false;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        dup = dup || (candidates[i] == inst.cls && relations[i] == r);
      }
      if (!dup) {
        candidates.push_back(inst.cls);
        relations.push_back(r);
      }
    }
  };
  if (!rel || *rel == Relation::Inside) add(scene.containers(), Relation::Inside);
  if (!rel || *rel == Relation::On) add(scene.surfaces(), Relation::On);
  if (candidates.empty() || text.empty()) return std::nullopt;

  const auto g = ground_name(text, candidates, sim, threshold);
  if (!g.accepted) return std::nullopt;
  return PlacementGuess{relations[g.index], g.canonical, g.score};
}

std::vector<GoalTuple> parse_goal_tuples(std::string_view text) {
  std::vector<GoalTuple> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty()) continue;

    if (line.find('(') != std::string::npos) {
      std::size_t at = 0;
      while ((at = line.find('(', at)) != std::string::npos) {
        const auto close = line.find(')', at);
        if (close == std::string::npos) break;
        if (auto t = tuple_from_fields(std::string_view(line).substr(at + 1, close - at - 1))) {
          out.push_back(*t);
        }
        at = close + 1;
      }
    } else {
      std::string_view body = line;
      while (!body.empty() && (body.back() == '.' || body.back() == ';')) body.remove_suffix(1);
      if (auto t = tuple_from_fields(body)) out.push_back(*t);
    }
  }
  return out;
}

GoalSpec translate_goal(std::string_view instruction, CommonsenseProvider& provider,
                        const Catalog& catalog, const SimilarityProvider& sim) {
  if (trim(instruction).empty()) throw GoalParseFailure("empty instruction");
  const std::string response = provider.translate_goal_text(instruction);
  const auto tuples = parse_goal_tuples(response);
  if (tuples.empty()) {
    throw GoalParseFailure("no goal tuple in provider response: '" + response + "'");
  }

  const auto movables = catalog.names(ObjectKind::Movable);
  const auto containers = catalog.names(ObjectKind::Container);
  const auto surfaces = catalog.names(ObjectKind::Surface);

  GoalSpec goal;
  std::map<std::tuple<std::string, Relation, std::string>, std::size_t> slot;
  for (const auto& t : tuples) {
    const auto obj = ground_name(t.object, movables, sim);
    const auto tgt = ground_name(t.target, t.relation == Relation::Inside ? containers : surfaces,
                                 sim);
    if (!obj.accepted || !tgt.accepted) {
      throw GoalParseFailure("cannot ground goal tuple (" + t.object + ", " +
                             std::string(to_string(t.relation)) + ", " + t.target + ")");
    }
    const auto key = std::make_tuple(obj.canonical, t.relation, tgt.canonical);
    if (auto it = slot.find(key); it != slot.end()) {
      ++goal.predicates[it->second].count;
    } else {
      slot.emplace(key, goal.predicates.size());
      goal.predicates.push_back({obj.canonical, t.relation, tgt.canonical, 1});
    }
  }
  validate(goal, catalog);
  return goal;
}

}  // namespace llmmcts
