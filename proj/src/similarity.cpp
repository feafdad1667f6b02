#include "llmmcts/similarity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <mutex>

#include "llmmcts/errors.hpp"

namespace llmmcts {

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw DimensionMismatch("cosine of vectors with dimensions " + std::to_string(u.size()) +
                            " and " + std::to_string(v.size()));
  }
  double uv = 0, uu = 0, vv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0 || vv == 0) throw ZeroVector("cosine of a zero vector");
  return std::clamp(uv / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

double Embedding::norm() const {
  double s = 0;
  for (const auto& [i, x] : entries) s += x * x;
  return std::sqrt(s);
}

std::vector<double> Embedding::to_dense() const {
  std::vector<double> out(dim, 0.0);
  for (const auto& [i, x] : entries) out[i] = x;
  return out;
}

Embedding Embedding::scaled(double k) const {
  Embedding e = *this;
  for (auto& [i, x] : e.entries) x *= k;
  return e;
}

double dot(const Embedding& a, const Embedding& b) {
  if (a.dim != b.dim) {
    throw DimensionMismatch("dot of embeddings with dimensions " + std::to_string(a.dim) +
                            " and " + std::to_string(b.dim));
  }
  double s = 0;
  auto i = a.entries.begin();
  auto j = b.entries.begin();
  while (i != a.entries.end() && j != b.entries.end()) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      s += i->second * j->second;
      ++i;
      ++j;
    }
  }
  return s;
}

double cosine(const Embedding& a, const Embedding& b) {
  const double d = dot(a, b);
  const double na = a.norm(), nb = b.norm();
  if (na == 0 || nb == 0) throw ZeroVector("cosine of a zero embedding");
  return std::clamp(d / (na * nb), -1.0, 1.0);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

namespace {

std::uint32_t fnv1a(std::string_view s) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : s) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

using Entries = std::vector<std::pair<std::uint32_t, double>>;
using Range = std::pair<Entries::const_iterator, Entries::const_iterator>;

// Token block entries come first because they have the smaller indices.
std::pair<Range, Range> split(const Embedding& e) {
  const auto mid = std::partition_point(e.entries.begin(), e.entries.end(), [](const auto& x) {
    return x.first < LexicalSimilarity::kBlock;
  });
  return {{e.entries.begin(), mid}, {mid, e.entries.end()}};
}

double range_dot(Range a, Range b) {
  double s = 0;
  while (a.first != a.second && b.first != b.second) {
    if (a.first->first < b.first->first) {
      ++a.first;
    } else if (b.first->first < a.first->first) {
      ++b.first;
    } else {
      s += a.first->second * b.first->second;
      ++a.first;
      ++b.first;
    }
  }
  return s;
}

double range_norm(Range a) {
  double s = 0;
  for (auto it = a.first; it != a.second; ++it) s += it->second * it->second;
  return std::sqrt(s);
}

double range_cosine(Range a, Range b) {
  const double na = range_norm(a), nb = range_norm(b);
  if (na == 0 || nb == 0) throw ZeroVector("cosine of a zero embedding block");
  return std::clamp(range_dot(a, b) / (na * nb), -1.0, 1.0);
}

}  // namespace

Embedding LexicalSimilarity::embed(std::string_view text) const {
  const std::string key(text);
  {
    std::shared_lock lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }

  std::map<std::uint32_t, double> counts;
  for (const auto& tok : tokenize(text)) counts[fnv1a(tok) % kBlock] += 1.0;

  std::string squashed = "#";
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (!std::isspace(u)) squashed.push_back(static_cast<char>(std::tolower(u)));
  }
  squashed.push_back('#');
  if (squashed.size() < 3) {
    counts[kBlock] += 1.0;  // blank text still embeds to a non-zero vector
  } else {
    for (std::size_t i = 0; i + 3 <= squashed.size(); ++i) {
      counts[kBlock + fnv1a(std::string_view(squashed).substr(i, 3)) % kBlock] += 1.0;
    }
  }

  Embedding e;
  e.dim = dimension();
  e.entries.assign(counts.begin(), counts.end());

  std::unique_lock lock(mu_);
  cache_.emplace(key, e);
  return e;
}

double LexicalSimilarity::score(const Embedding& a, const Embedding& b) const {
  if (a.dim != b.dim) throw DimensionMismatch("embeddings from different providers");
  const auto [ta, ga] = split(a);
  const auto [tb, gb] = split(b);
  if (ta.first != ta.second && tb.first != tb.second) {
    const double d = range_dot(ta, tb);
    if (d > 0) return std::clamp(d / (range_norm(ta) * range_norm(tb)), -1.0, 1.0);
  }
  if (!backoff_) return 0.0;
  return range_cosine(ga, gb);
}

std::shared_ptr<const SimilarityProvider> default_similarity() {
  static const auto instance = std::make_shared<const LexicalSimilarity>();
  return instance;
}

}  // namespace llmmcts
