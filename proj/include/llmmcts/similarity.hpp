#pragma once

#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace llmmcts {

// Standard cosine similarity. Throws DimensionMismatch / ZeroVector.
double cosine(std::span<const double> u, std::span<const double> v);

// Sparse vector of nominal dimension `dim`; entries sorted by index, no zeros.
struct Embedding {
  std::size_t dim = 0;
  std::vector<std::pair<std::uint32_t, double>> entries;

  double norm() const;
  std::vector<double> to_dense() const;
  Embedding scaled(double k) const;
};

double dot(const Embedding& a, const Embedding& b);
double cosine(const Embedding& a, const Embedding& b);

// Text -> vector map used for grounding (the sentence-encoder role). `score`
// defaults to cosine of the two embeddings; providers may refine it.
class SimilarityProvider {
 public:
  virtual ~SimilarityProvider() = default;

  virtual std::size_t dimension() const = 0;
  virtual Embedding embed(std::string_view text) const = 0;
  virtual double score(const Embedding& a, const Embedding& b) const { return cosine(a, b); }

  double similarity(std::string_view a, std::string_view b) const {
    return score(embed(a), embed(b));
  }
};

// Deterministic, dependency-free default. The vector has two blocks: word
// token counts and character-trigram counts (whitespace removed, '#'-padded).
// Scores compare token blocks when they overlap and otherwise back off to the
// trigram blocks.
class LexicalSimilarity : public SimilarityProvider {
 public:
  static constexpr std::uint32_t kBlock = 1u << 20;

  explicit LexicalSimilarity(bool trigram_backoff = true) : backoff_(trigram_backoff) {}

  std::size_t dimension() const override { return 2 * std::size_t{kBlock}; }
  Embedding embed(std::string_view text) const override;
  double score(const Embedding& a, const Embedding& b) const override;

  bool trigram_backoff() const { return backoff_; }

 private:
  bool backoff_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<std::string, Embedding> cache_;
};

std::shared_ptr<const SimilarityProvider> default_similarity();

// Lowercased word tokens ("Put the apple," -> put, the, apple).
std::vector<std::string> tokenize(std::string_view text);

}  // namespace llmmcts
