#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "llmmcts/grounding.hpp"
#include "llmmcts/prompts.hpp"
#include "llmmcts/provider.hpp"
#include "llmmcts/similarity.hpp"

namespace llmmcts {

// pi-hat over an admissible set; probs[i] belongs to actions[i].
struct PolicyDistribution {
  std::vector<Action> actions;
  std::vector<double> probs;

  // Highest probability; ties go to the earlier (stable-order) action.
  std::size_t argmax() const;
  double prob_of(const Action& a) const;
};

// Numerically stable softmax (max subtracted).
std::vector<double> softmax(std::span<const double> logits);

// The mixture lambda/|A| + (1-lambda) softmax(score - eta), eta = mean score.
std::vector<double> empirical_policy_from_scores(std::span<const double> scores, double lambda);

struct EmpiricalPolicyStats {
  int kept = 0;     // samples that grounded above threshold
  int dropped = 0;  // samples discarded as ungroundable
};

// Sum-of-similarity scores of each sampled phrase against every rendered
// admissible action, fed through the mixture. Samples whose best match is
// below `threshold` are dropped first.
PolicyDistribution empirical_policy(const Scene& scene, std::span<const Action> admissible,
                                    std::span<const std::string> samples, double lambda,
                                    const SimilarityProvider& sim,
                                    double threshold = kGroundingThreshold,
                                    EmpiricalPolicyStats* stats = nullptr);

// Top-K dataset entries by instruction similarity (stable on ties).
std::vector<std::size_t> retrieve_prompt_indices(std::string_view instruction,
                                                 std::span<const PromptExample> dataset,
                                                 std::size_t K, const SimilarityProvider& sim);
std::vector<PromptExample> retrieve_prompts(std::string_view instruction,
                                            std::span<const PromptExample> dataset,
                                            std::size_t K, const SimilarityProvider& sim);

struct PolicyParams {
  int M = 10;           // provider samples per node
  std::size_t K = 1;    // retrieved in-context examples
  double lambda = 0.5;  // uniform mixture weight
  double threshold = kGroundingThreshold;
};

// Queries a provider M times and assembles pi-hat. Provider errors reduce
// the effective M; "done" and other ungroundable phrases are dropped.
class ProviderPolicy {
 public:
  ProviderPolicy(std::shared_ptr<CommonsenseProvider> provider,
                 std::shared_ptr<const SimilarityProvider> sim, PolicyParams params);

  PolicyDistribution operator()(const PolicyQuery& query, Rng& rng,
                                EmpiricalPolicyStats* stats = nullptr) const;
  // The raw first phrases of M samples (failed samples omitted).
  std::vector<std::string> sample_phrases(const PolicyQuery& query, Rng& rng) const;

  const PolicyParams& params() const { return params_; }
  CommonsenseProvider& provider() const { return *provider_; }
  const SimilarityProvider& similarity() const { return *sim_; }

 private:
  std::shared_ptr<CommonsenseProvider> provider_;
  std::shared_ptr<const SimilarityProvider> sim_;
  PolicyParams params_;
};

}  // namespace llmmcts
