#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tracerank/types.hpp"

namespace tracerank {

inline constexpr std::size_t kFeatureCount = 28;
inline constexpr std::size_t kWeightHistBins = 10;
inline constexpr std::size_t kSimHistBins = 12;

using FeatureVector = std::array<double, kFeatureCount>;

// Recency weight of a gap in seconds: 1 / (ln(|gap| + 1) + 1). Equal times
// give exactly 1; the weight decays towards 0 as the gap grows.
inline double time_weight_from_gap(double gap_seconds) {
  return 1.0 / (std::log(std::abs(gap_seconds) + 1.0) + 1.0);
}

inline double time_weight(Timestamp t_query, Timestamp t_member) {
  return time_weight_from_gap(double(t_query) - double(t_member));
}

// One group member as seen from a query: its similarity and occurrence time.
struct MemberSignal {
  double similarity = 0.0;
  Timestamp timestamp = 0;
};

// Min and max similarity over all candidate members of all candidate groups
// for one query; the shared normalization for the similarity histogram.
struct SimilarityRange {
  double lo = 0.0;
  double hi = 0.0;
};

// Uniform bins over [0, 1]; values on interior edges land in the higher bin
// and the final bin is upper-inclusive.
inline std::size_t histogram_bin(double value, std::size_t bins) {
  if (!(value < 1.0)) return bins - 1;
  if (value <= 0.0) return 0;
  return static_cast<std::size_t>(value * double(bins));
}

// Feature layout (0-based index -> meaning):
//   0      first maximum: similarity of the most similar member
//   1..4   max / min / mean / (max - min) of the member time weights
//   5..14  histogram of time weights, 10 bins over [0, 1], counts
//   15     time weight of the first-maximum member (similarity ties go to
//          the more recent member)
//   16..27 weighted similarity histogram: per-query min-max normalized
//          similarities in 12 bins, each member contributing its time weight
inline FeatureVector extract_features(Timestamp query_time,
                                      std::span<const MemberSignal> members,
                                      SimilarityRange range) {
  if (members.empty()) throw StoreError("cannot extract features for an empty group");

  FeatureVector f{};
  double best_similarity = -std::numeric_limits<double>::infinity();
  double best_weight = 0.0;
  double weight_max = -std::numeric_limits<double>::infinity();
  double weight_min = std::numeric_limits<double>::infinity();
  double weight_sum = 0.0;
  const double span = range.hi - range.lo;

  for (const MemberSignal& member : members) {
    const double w = time_weight(query_time, member.timestamp);
    if (member.similarity > best_similarity ||
        (member.similarity == best_similarity && w > best_weight)) {
      best_similarity = member.similarity;
      best_weight = w;
    }
    weight_max = std::max(weight_max, w);
    weight_min = std::min(weight_min, w);
    weight_sum += w;
    f[5 + histogram_bin(w, kWeightHistBins)] += 1.0;

    double normalized = 1.0;
    if (span > 0.0) {
      normalized = (member.similarity - range.lo) / span;
      normalized = std::clamp(normalized, 0.0, 1.0);
    }
    f[16 + histogram_bin(normalized, kSimHistBins)] += w;
  }

  f[0] = best_similarity;
  f[1] = weight_max;
  f[2] = weight_min;
  f[3] = weight_sum / double(members.size());
  f[4] = weight_max - weight_min;
  f[15] = best_weight;
  return f;
}

inline const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> names = [] {
    std::array<std::string, kFeatureCount> n;
    n[0] = "first_maximum";
    n[1] = "max_weight";
    n[2] = "min_weight";
    n[3] = "mean_weight";
    n[4] = "weight_range";
    for (std::size_t b = 0; b < kWeightHistBins; ++b)
      n[5 + b] = "weights_hist_bin_" + std::to_string(b + 1);
    n[15] = "first_maximum_weight";
    for (std::size_t b = 0; b < kSimHistBins; ++b)
      n[16 + b] = "weighted_sim_hist_bin_" + std::to_string(b + 1);
    return n;
  }();
  return names;
}

// Columnwise standard scaling fitted on a feature matrix. Zero-variance
// columns keep std 1 so they map to 0 rather than NaN.
class FeatureScaler {
 public:
  FeatureScaler() {
    mean_.fill(0.0);
    std_.fill(1.0);
  }

  static FeatureScaler identity() { return FeatureScaler{}; }

  static FeatureScaler from_moments(const FeatureVector& mean, const FeatureVector& stddev) {
    FeatureScaler s;
    s.mean_ = mean;
    s.std_ = stddev;
    for (double v : s.std_) {
      if (!(v > 0.0)) throw ModelError("scaler std entries must be strictly positive");
    }
    return s;
  }

  static FeatureScaler fit(std::span<const FeatureVector> matrix) {
    if (matrix.empty()) throw ConfigError("cannot fit a scaler on an empty feature matrix");
    FeatureScaler s;
    const double n = double(matrix.size());
    for (std::size_t d = 0; d < kFeatureCount; ++d) {
      double sum = 0.0;
      for (const FeatureVector& row : matrix) sum += row[d];
      const double mean = sum / n;
      double var = 0.0;
      for (const FeatureVector& row : matrix) {
        const double delta = row[d] - mean;
        var += delta * delta;
      }
      const double stddev = std::sqrt(var / n);
      s.mean_[d] = mean;
      s.std_[d] = stddev > 0.0 ? stddev : 1.0;
    }
    return s;
  }

  FeatureVector transform(const FeatureVector& x) const {
    FeatureVector out;
    for (std::size_t d = 0; d < kFeatureCount; ++d) out[d] = (x[d] - mean_[d]) / std_[d];
    return out;
  }

  const FeatureVector& mean() const { return mean_; }
  const FeatureVector& stddev() const { return std_; }

 private:
  FeatureVector mean_;
  FeatureVector std_;
};

}  // namespace tracerank
