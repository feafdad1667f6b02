#include "llmmcts/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "llmmcts/catalog.hpp"
#include "llmmcts/errors.hpp"

namespace llmmcts {

std::size_t PolicyDistribution::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return best;
}

double PolicyDistribution::prob_of(const Action& a) const {
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i] == a) return probs[i];
  }
  return 0.0;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double hi = *std::max_element(logits.begin(), logits.end());
  double z = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - hi);
    z += out[i];
  }
  for (auto& x : out) x /= z;
  return out;
}

std::vector<double> empirical_policy_from_scores(std::span<const double> scores, double lambda) {
  if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("lambda must lie in [0, 1]");
  const auto n = static_cast<double>(scores.size());
  const double eta = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
  std::vector<double> centred(scores.begin(), scores.end());
  for (auto& s : centred) s -= eta;
  auto p = softmax(centred);
  for (auto& x : p) x = lambda / n + (1.0 - lambda) * x;
  return p;
}

PolicyDistribution empirical_policy(const Scene& scene, std::span<const Action> admissible,
                                    std::span<const std::string> samples, double lambda,
                                    const SimilarityProvider& sim, double threshold,
                                    EmpiricalPolicyStats* stats) {
  if (admissible.empty()) throw std::invalid_argument("empirical_policy: no admissible actions");
  std::vector<Embedding> rendered;
  rendered.reserve(admissible.size());
  for (const auto& a : admissible) rendered.push_back(sim.embed(render_action(scene, a)));

  std::vector<double> scores(admissible.size(), 0.0);
  std::vector<double> row(admissible.size());
  EmpiricalPolicyStats local;
  for (const auto& phrase : samples) {
    const Embedding e = sim.embed(phrase);
    double best = -2.0;
    for (std::size_t i = 0; i < rendered.size(); ++i) {
      row[i] = sim.score(e, rendered[i]);
      best = std::max(best, row[i]);
    }
    if (best < threshold) {
      ++local.dropped;
      continue;
    }
    ++local.kept;
    for (std::size_t i = 0; i < row.size(); ++i) scores[i] += row[i];
  }
  if (stats) *stats = local;

  PolicyDistribution d;
  d.actions.assign(admissible.begin(), admissible.end());
  d.probs = empirical_policy_from_scores(scores, lambda);
  return d;
}

std::vector<std::size_t> retrieve_prompt_indices(std::string_view instruction,
                                                 std::span<const PromptExample> dataset,
                                                 std::size_t K, const SimilarityProvider& sim) {
  const Embedding q = sim.embed(instruction);
  std::vector<double> score(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    score[i] = sim.score(q, sim.embed(dataset[i].instruction));
  }
  std::vector<std::size_t> idx(dataset.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  idx.resize(std::min(K, idx.size()));
  return idx;
}

std::vector<PromptExample> retrieve_prompts(std::string_view instruction,
                                            std::span<const PromptExample> dataset,
                                            std::size_t K, const SimilarityProvider& sim) {
  std::vector<PromptExample> out;
  for (auto i : retrieve_prompt_indices(instruction, dataset, K, sim)) out.push_back(dataset[i]);
  return out;
}

ProviderPolicy::ProviderPolicy(std::shared_ptr<CommonsenseProvider> provider,
                               std::shared_ptr<const SimilarityProvider> sim, PolicyParams params)
    : provider_(std::move(provider)), sim_(std::move(sim)), params_(params) {
  if (params_.M < 1) throw std::invalid_argument("policy M must be >= 1");
}

std::vector<std::string> ProviderPolicy::sample_phrases(const PolicyQuery& query, Rng& rng) const {
  std::vector<std::string> phrases;
  phrases.reserve(static_cast<std::size_t>(params_.M));
  for (int i = 0; i < params_.M; ++i) {
    try {
      auto plan = provider_->sample_next_actions(query, rng, i);
      if (!plan.empty()) phrases.push_back(std::move(plan.front()));
    } catch (const ProviderError&) {
      // A failed sample is simply absent.
    }
  }
  return phrases;
}

PolicyDistribution ProviderPolicy::operator()(const PolicyQuery& query, Rng& rng,
                                              EmpiricalPolicyStats* stats) const {
  const auto phrases = sample_phrases(query, rng);
  return empirical_policy(*query.scene, query.admissible, phrases, params_.lambda, *sim_,
                          params_.threshold, stats);
}

std::string PolicyQuery::goal_text() const {
  if (!instruction.empty()) return instruction;
  return goal ? render_goal(*goal, Catalog::household()) : std::string();
}

}  // namespace llmmcts
