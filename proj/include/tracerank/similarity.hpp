#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tracerank/types.hpp"

namespace tracerank {

// Pairwise stack-trace similarity. fit() sees the training corpus once;
// afterwards the model is immutable and score() may be called from any
// number of threads. Scores are non-negative and deterministic.
class SimilarityModel {
 public:
  virtual ~SimilarityModel() = default;
  virtual std::string name() const = 0;
  virtual void fit(std::span<const Report> /*corpus*/) {}
  virtual double score(const Report& query, const Report& candidate) const = 0;
};

// --- frame-sequence primitives (whole frames act as symbols) ---------------

inline std::size_t frame_edit_distance(std::span<const Frame> a, std::span<const Frame> b) {
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diagonal = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t substitute = diagonal + (a[i - 1] == b[j - 1] ? 0 : 1);
      diagonal = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, substitute});
    }
  }
  return row[b.size()];
}

inline std::size_t frame_lcs_length(std::span<const Frame> a, std::span<const Frame> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::size_t frame_common_prefix(std::span<const Frame> a, std::span<const Frame> b) {
  const std::size_t limit = std::min(a.size(), b.size());
  std::size_t n = 0;
  while (n < limit && a[n] == b[n]) ++n;
  return n;
}

// --- TF-IDF (document-side term frequency, squared idf) ---------------------

// similarity(q, d) = sum over distinct tokens t of q of tf_d(t) * idf(t)^2
// with idf(t) = ln((N + 1) / (df(t) + 1)) + 1 over the fitted corpus.
class TfIdfModel final : public SimilarityModel {
 public:
  std::string name() const override { return "tfidf"; }

  void fit(std::span<const Report> corpus) override {
    doc_count_ = corpus.size();
    doc_freq_.clear();
    for (const Report& doc : corpus) {
      std::unordered_set<std::string> seen;
      for (const Frame& frame : doc.frames) {
        if (seen.insert(frame.token).second) ++doc_freq_[frame.token];
      }
    }
  }

  double idf(const std::string& token) const {
    const auto it = doc_freq_.find(token);
    const double df = it == doc_freq_.end() ? 0.0 : double(it->second);
    return std::log((double(doc_count_) + 1.0) / (df + 1.0)) + 1.0;
  }

  double score(const Report& query, const Report& candidate) const override {
    std::unordered_map<std::string, int> tf;
    for (const Frame& frame : candidate.frames) ++tf[frame.token];
    double total = 0.0;
    std::unordered_set<std::string> counted;
    for (const Frame& frame : query.frames) {
      if (!counted.insert(frame.token).second) continue;
      const auto it = tf.find(frame.token);
      if (it == tf.end()) continue;
      const double w = idf(frame.token);
      total += double(it->second) * w * w;
    }
    return total;
  }

  std::size_t doc_count() const { return doc_count_; }
  const std::unordered_map<std::string, std::size_t>& doc_freq() const { return doc_freq_; }

 private:
  std::size_t doc_count_ = 0;
  std::unordered_map<std::string, std::size_t> doc_freq_;
};

// --- string-measure models ---------------------------------------------------

class ModaniEditModel final : public SimilarityModel {
 public:
  std::string name() const override { return "modani-edit"; }
  double score(const Report& query, const Report& candidate) const override {
    const double longest = double(std::max(query.frames.size(), candidate.frames.size()));
    return 1.0 - double(frame_edit_distance(query.frames, candidate.frames)) / longest;
  }
};

class ModaniLcsModel final : public SimilarityModel {
 public:
  std::string name() const override { return "modani-lcs"; }
  double score(const Report& query, const Report& candidate) const override {
    const double longest = double(std::max(query.frames.size(), candidate.frames.size()));
    return double(frame_lcs_length(query.frames, candidate.frames)) / longest;
  }
};

class ModaniPrefixModel final : public SimilarityModel {
 public:
  std::string name() const override { return "modani-prefix"; }
  double score(const Report& query, const Report& candidate) const override {
    const double longest = double(std::max(query.frames.size(), candidate.frames.size()));
    return double(frame_common_prefix(query.frames, candidate.frames)) / longest;
  }
};

// --- package n-grams ---------------------------------------------------------

// Frames are reduced to their defining package (method and class stripped),
// consecutive duplicates collapsed, and compared as multisets of n-grams for
// n = 1..max_n via cosine similarity.
class DurfexModel final : public SimilarityModel {
 public:
  explicit DurfexModel(int max_n = 2) : max_n_(max_n) {
    if (max_n < 1) throw ConfigError("durfex n-gram length must be at least 1");
  }

  std::string name() const override { return "durfex"; }

  // "a.b.C.m" -> "a.b"; a token with no package part is its own package.
  static std::string package_of(const std::string& token) {
    std::size_t last = token.rfind('.');
    if (last == std::string::npos) return token;
    std::size_t second = token.rfind('.', last - 1);
    if (second == std::string::npos || second == 0) return token;
    return token.substr(0, second);
  }

  static std::vector<std::string> package_sequence(const Report& report) {
    std::vector<std::string> seq;
    seq.reserve(report.frames.size());
    for (const Frame& frame : report.frames) {
      std::string pkg = package_of(frame.token);
      if (seq.empty() || seq.back() != pkg) seq.push_back(std::move(pkg));
    }
    return seq;
  }

  double score(const Report& query, const Report& candidate) const override {
    const auto a = ngram_counts(package_sequence(query));
    const auto b = ngram_counts(package_sequence(candidate));
    double dot = 0.0;
    for (const auto& [gram, count] : a) {
      const auto it = b.find(gram);
      if (it != b.end()) dot += double(count) * double(it->second);
    }
    auto norm = [](const std::map<std::string, int>& counts) {
      double sum = 0.0;
      for (const auto& [gram, count] : counts) sum += double(count) * double(count);
      return std::sqrt(sum);
    };
    const double denom = norm(a) * norm(b);
    return denom == 0.0 ? 0.0 : dot / denom;
  }

 private:
  std::map<std::string, int> ngram_counts(const std::vector<std::string>& seq) const {
    std::map<std::string, int> counts;
    for (int n = 1; n <= max_n_; ++n) {
      if (seq.size() < static_cast<std::size_t>(n)) break;
      for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= seq.size(); ++i) {
        std::string key = seq[i];
        for (std::size_t j = 1; j < static_cast<std::size_t>(n); ++j) {
          key.push_back('\x1f');
          key += seq[i + j];
        }
        ++counts[key];
      }
    }
    return counts;
  }

  int max_n_;
};

// --- registry ----------------------------------------------------------------

inline const std::vector<std::string>& similarity_model_names() {
  static const std::vector<std::string> names = {
      "tfidf", "modani-edit", "modani-lcs", "modani-prefix", "durfex"};
  return names;
}

inline std::unique_ptr<SimilarityModel> make_similarity_model(const std::string& name) {
  if (name == "tfidf") return std::make_unique<TfIdfModel>();
  if (name == "modani-edit") return std::make_unique<ModaniEditModel>();
  if (name == "modani-lcs") return std::make_unique<ModaniLcsModel>();
  if (name == "modani-prefix") return std::make_unique<ModaniPrefixModel>();
  if (name == "durfex") return std::make_unique<DurfexModel>();
  throw ConfigError("unknown similarity model '" + name + "'");
}

}  // namespace tracerank
