#include "llmmcts/mcts.hpp"

#include <algorithm>
#include <thread>

#include "llmmcts/errors.hpp"

namespace llmmcts {

std::string_view to_string(SelectionMode m) { return m == SelectionMode::Puct ? "puct" : "uct"; }

SelectionMode parse_selection_mode(std::string_view s) {
  if (s == "puct") return SelectionMode::Puct;
  if (s == "uct") return SelectionMode::Uct;
  throw std::invalid_argument("unknown selection mode: " + std::string(s));
}

void SearchParams::validate() const {
  if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("gamma must lie in (0, 1)");
  if (!(epsilon > 0 && epsilon < 1)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (n_sims < 1) throw std::invalid_argument("n_sims must be >= 1");
  if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  if (!(c_puct > 0) || !(c_uct > 0)) throw std::invalid_argument("exploration constants must be > 0");
  if (root_parallel < 1) throw std::invalid_argument("root_parallel must be >= 1");
}

nlohmann::json SearchParams::to_json() const {
  return {{"n_sims", n_sims},           {"gamma", gamma},
          {"epsilon", epsilon},         {"max_depth", max_depth},
          {"c_puct", c_puct},           {"c_uct", c_uct},
          {"goal_reward", goal_reward}, {"mode", std::string(to_string(mode))},
          {"cache_policy", cache_policy}, {"reuse_tree", reuse_tree},
          {"root_parallel", root_parallel}};
}

SearchParams SearchParams::from_json(const nlohmann::json& j) {
  SearchParams p;
  p.n_sims = j.value("n_sims", p.n_sims);
  p.gamma = j.value("gamma", p.gamma);
  p.epsilon = j.value("epsilon", p.epsilon);
  p.max_depth = j.value("max_depth", p.max_depth);
  p.c_puct = j.value("c_puct", p.c_puct);
  p.c_uct = j.value("c_uct", p.c_uct);
  p.goal_reward = j.value("goal_reward", p.goal_reward);
  p.mode = parse_selection_mode(j.value("mode", std::string(to_string(p.mode))));
  p.cache_policy = j.value("cache_policy", p.cache_policy);
  p.reuse_tree = j.value("reuse_tree", p.reuse_tree);
  p.root_parallel = j.value("root_parallel", p.root_parallel);
  p.validate();
  return p;
}

// --- tree -----------------------------------------------------------------------

TreeNode* SearchTree::find(const std::string& key) {
  auto it = nodes_.find(key);
  return it == nodes_.end() ? nullptr : &it->second;
}

const TreeNode* SearchTree::find(const std::string& key) const {
  auto it = nodes_.find(key);
  return it == nodes_.end() ? nullptr : &it->second;
}

TreeNode& SearchTree::insert(const std::string& key, TreeNode node) {
  return nodes_.insert_or_assign(key, std::move(node)).first->second;
}

void SearchTree::prune_to(const std::string& key) {
  std::erase_if(nodes_, [&](const auto& kv) { return !kv.first.starts_with(key); });
}

// --- selection ----------------------------------------------------------------------

double puct_score(const TreeNode& node, std::size_t i, double prior, double c) {
  return node.q[i] + c * prior * std::sqrt(static_cast<double>(node.visits)) /
                         (static_cast<double>(node.action_visits[i]) + 1.0);
}

double uct_score(const TreeNode& node, std::size_t i, double c) {
  return node.q[i] + c * std::sqrt(std::log(static_cast<double>(node.visits)) /
                                   static_cast<double>(node.action_visits[i]));
}

std::size_t select_puct(const TreeNode& node, std::span<const double> prior, double c) {
  std::size_t best = 0;
  double best_score = 0;
  for (std::size_t i = 0; i < node.actions.size(); ++i) {
    const double score = puct_score(node, i, prior[i], c);
    if (i == 0 || score > best_score || (score == best_score && prior[i] > prior[best])) {
      best = i;
      best_score = score;
    }
  }
  return best;
}

std::size_t select_uct(const TreeNode& node, double c) {
  for (std::size_t i = 0; i < node.actions.size(); ++i) {
    if (node.action_visits[i] == 0) return i;
  }
  std::size_t best = 0;
  double best_score = 0;
  for (std::size_t i = 0; i < node.actions.size(); ++i) {
    const double score = uct_score(node, i, c);
    if (i == 0 || score > best_score) {
      best = i;
      best_score = score;
    }
  }
  return best;
}

// --- simulation ---------------------------------------------------------------------

namespace {

bool cutoff(const SearchParams& p, int depth) {
  return depth >= p.max_depth || std::pow(p.gamma, depth) < p.epsilon;
}

TreeNode fresh_node(const SceneState& s) {
  TreeNode n;
  n.actions = admissible_actions(s);
  n.action_visits.assign(n.actions.size(), 0);
  n.q.assign(n.actions.size(), 0.0);
  return n;
}

std::vector<double> query_prior(const TreeNode& node, const SceneState& s, const History& h,
                                const SearchContext& ctx, Rng& rng) {
  PolicyQuery q;
  q.scene = s.scene.get();
  q.goal = ctx.goal_spec;
  q.instruction = ctx.instruction;
  q.history = &h;
  q.admissible = node.actions;
  q.examples = ctx.examples;
  auto d = ctx.policy(q, rng);
  if (d.probs.size() != node.actions.size()) {
    throw std::logic_error("policy returned a distribution over a different action set");
  }
  return std::move(d.probs);
}

}  // namespace

double rollout(SceneState& s, bool done, int depth, const SearchParams& params,
               const GoalTest& goal, Rng& rng) {
  thread_local std::vector<Action> buf;
  double total = 0;
  double discount = 1;
  while (!done && !cutoff(params, depth)) {
    admissible_actions(s, buf);
    apply(s, buf[uniform_index(rng, buf.size())]);
    if (goal.satisfied(s)) {
      total += discount * params.goal_reward;
      done = true;
    }
    discount *= params.gamma;
    ++depth;
  }
  return total;
}

double simulate(SceneState& s, History& h, bool done, int depth, SearchTree& tree,
                const SearchContext& ctx, Rng& rng, SimulationTrace* trace) {
  const SearchParams& p = *ctx.params;
  if (done || cutoff(p, depth)) return 0.0;

  TreeNode* node = tree.find(h.key());
  if (!node) {
    tree.insert(h.key(), fresh_node(s));
    const double v = rollout(s, false, depth, p, *ctx.goal, rng);
    if (trace) trace->rollout = v;
    return v;
  }

  std::size_t i;
  if (p.mode == SelectionMode::Uct) {
    i = select_uct(*node, p.c_uct);
  } else {
    if (!node->prior || !p.cache_policy) node->prior = query_prior(*node, s, h, ctx, rng);
    i = select_puct(*node, *node->prior, p.c_puct);
  }
  const Action a = node->actions[i];

  apply(s, a);  // throws PreconditionViolated if h and s disagree
  double r = 0;
  bool next_done = false;
  if (ctx.goal->satisfied(s)) {
    r = p.goal_reward;
    next_done = true;
  }
  if (trace) trace->path.push_back({key_digest(h.key()), action_label(*s.scene, a), r});

  h.push(a, observe(s));
  double ret;
  try {
    ret = r + p.gamma * simulate(s, h, next_done, depth + 1, tree, ctx, rng, trace);
  } catch (...) {
    h.pop();
    throw;
  }
  h.pop();

  // Node pointers stay valid across insertions into an unordered_map.
  node->action_visits[i] += 1;
  node->visits += 1;
  node->q[i] += (ret - node->q[i]) / static_cast<double>(node->action_visits[i]);
  return ret;
}

namespace {

SearchResult search_one(History& h, const Belief& belief, const SceneState& known,
                        SearchTree& tree, const SearchContext& ctx, int n_sims, Rng& rng,
                        std::vector<SimulationTrace>* trace) {
  SearchResult res;
  const std::size_t root_len = h.size();
  if (!tree.find(h.key())) tree.insert(h.key(), fresh_node(known));

  SceneState s;
  for (int k = 0; k < n_sims; ++k) {
    sample_state_into(belief, known, rng, s);
    SimulationTrace t;
    t.index = k;
    try {
      t.value = simulate(s, h, false, 0, tree, ctx, rng, trace ? &t : nullptr);
      ++res.completed;
    } catch (const ProviderOutage&) {
      throw;
    } catch (const std::exception& e) {
      while (h.size() > root_len) h.pop();
      ++res.aborted;
      res.last_error = e.what();
    }
    if (trace) trace->push_back(std::move(t));
  }

  const TreeNode& root = *tree.find(h.key());
  for (std::size_t i = 0; i < root.actions.size(); ++i) {
    res.root.push_back({root.actions[i], root.action_visits[i], root.q[i]});
  }
  return res;
}

void pick_action(SearchResult& res) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < res.root.size(); ++i) {
    const auto& r = res.root[i];
    if (r.visits == 0) continue;
    if (!best || r.q > res.root[*best].q ||
        (r.q == res.root[*best].q && r.visits > res.root[*best].visits)) {
      best = i;
    }
  }
  if (!best) {
    throw NoSimulationsCompleted("no simulation completed" +
                                 (res.last_error.empty() ? "" : ": " + res.last_error));
  }
  res.action = res.root[*best].action;
}

}  // namespace

SearchResult search(History& h, const Belief& belief, const SceneState& known, SearchTree& tree,
                    const SearchContext& ctx, Rng& rng, std::vector<SimulationTrace>* trace) {
  const SearchParams& p = *ctx.params;
  p.validate();
  if (p.mode == SelectionMode::Puct && !ctx.policy) {
    throw std::invalid_argument("puct search needs a policy source");
  }

  const int workers = std::min(p.root_parallel, p.n_sims);
  if (workers <= 1) {
    SearchResult res = search_one(h, belief, known, tree, ctx, p.n_sims, rng, trace);
    if (res.completed == 0) {
      throw NoSimulationsCompleted("every simulation aborted: " + res.last_error);
    }
    pick_action(res);
    return res;
  }

  // Root parallelism: independent trees and streams, root statistics merged.
  std::vector<SearchTree> trees(static_cast<std::size_t>(workers));
  std::vector<History> histories(static_cast<std::size_t>(workers), h);
  std::vector<Rng> streams;
  for (int w = 0; w < workers; ++w) streams.emplace_back(derive_seed(rng(), static_cast<std::uint64_t>(w)));
  std::vector<SearchResult> parts(static_cast<std::size_t>(workers));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    const int share = p.n_sims / workers + (w < p.n_sims % workers ? 1 : 0);
    pool.emplace_back([&, w, share] {
      try {
        parts[w] = search_one(histories[w], belief, known, trees[w], ctx, share, streams[w],
                              nullptr);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SearchResult merged = parts[0];
  for (int w = 1; w < workers; ++w) {
    merged.completed += parts[w].completed;
    merged.aborted += parts[w].aborted;
    if (!parts[w].last_error.empty()) merged.last_error = parts[w].last_error;
    for (std::size_t i = 0; i < merged.root.size(); ++i) {
      auto& m = merged.root[i];
      const auto& o = parts[w].root[i];
      const int n = m.visits + o.visits;
      if (n > 0) m.q = (m.q * m.visits + o.q * o.visits) / n;
      m.visits = n;
    }
  }
  tree = std::move(trees[0]);
  if (merged.completed == 0) {
    throw NoSimulationsCompleted("every simulation aborted: " + merged.last_error);
  }
  pick_action(merged);
  return merged;
}

nlohmann::json trace_to_json(const SimulationTrace& t) {
  nlohmann::json path = nlohmann::json::array();
  for (const auto& s : t.path) {
    path.push_back({{"h", s.history}, {"action", s.action}, {"reward", s.reward}});
  }
  return {{"sim", t.index}, {"path", path}, {"rollout", t.rollout}, {"value", t.value}};
}

}  // namespace llmmcts
