#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "tracerank/types.hpp"

namespace tracerank {

enum class Kernel {
  Uniform,
  Triangle,
  Epanechnikov,
  Quartic,
  Triweight,
  Gaussian,
  Cosine,
  Tricube,
  Logistic,
  Sigmoid,
  Silverman,
};

inline const std::vector<Kernel>& all_kernels() {
  static const std::vector<Kernel> kernels = {
      Kernel::Uniform,  Kernel::Triangle, Kernel::Epanechnikov, Kernel::Quartic,
      Kernel::Triweight, Kernel::Gaussian, Kernel::Cosine,       Kernel::Tricube,
      Kernel::Logistic, Kernel::Sigmoid,  Kernel::Silverman,
  };
  return kernels;
}

inline std::string kernel_name(Kernel kernel) {
  switch (kernel) {
    case Kernel::Uniform: return "uniform";
    case Kernel::Triangle: return "triangle";
    case Kernel::Epanechnikov: return "epanechnikov";
    case Kernel::Quartic: return "quartic";
    case Kernel::Triweight: return "triweight";
    case Kernel::Gaussian: return "gaussian";
    case Kernel::Cosine: return "cosine";
    case Kernel::Tricube: return "tricube";
    case Kernel::Logistic: return "logistic";
    case Kernel::Sigmoid: return "sigmoid";
    case Kernel::Silverman: return "silverman";
  }
  throw ConfigError("unhandled kernel");
}

inline Kernel kernel_from_name(const std::string& name) {
  for (Kernel kernel : all_kernels()) {
    if (kernel_name(kernel) == name) return kernel;
  }
  throw ConfigError("unknown kernel '" + name + "'");
}

// Kernel profile over the normalized distance u >= 0. Constant prefactors are
// dropped since only relative votes matter. Bounded-support kernels vanish for
// u >= 1. Silverman is used unclamped: it oscillates, so votes can go negative
// for large u.
inline double kernel_weight(Kernel kernel, double u) {
  u = std::abs(u);
  const double u2 = u * u;
  switch (kernel) {
    case Kernel::Uniform: return u < 1.0 ? 1.0 : 0.0;
    case Kernel::Triangle: return u < 1.0 ? 1.0 - u : 0.0;
    case Kernel::Epanechnikov: return u < 1.0 ? 1.0 - u2 : 0.0;
    case Kernel::Quartic: return u < 1.0 ? (1.0 - u2) * (1.0 - u2) : 0.0;
    case Kernel::Triweight: return u < 1.0 ? (1.0 - u2) * (1.0 - u2) * (1.0 - u2) : 0.0;
    case Kernel::Gaussian: return std::exp(-0.5 * u2);
    case Kernel::Cosine: return u < 1.0 ? std::cos(std::numbers::pi * u / 2.0) : 0.0;
    case Kernel::Tricube: {
      if (u >= 1.0) return 0.0;
      const double t = 1.0 - u * u2;
      return t * t * t;
    }
    case Kernel::Logistic: return 1.0 / (std::exp(u) + 2.0 + std::exp(-u));
    case Kernel::Sigmoid: return 2.0 / (std::exp(u) + std::exp(-u));
    case Kernel::Silverman: {
      const double s = u / std::numbers::sqrt2;
      return 0.5 * std::exp(-s) * std::sin(s + std::numbers::pi / 4.0);
    }
  }
  throw ConfigError("unhandled kernel");
}

// One candidate member with its group, occurrence time, and similarity.
struct ScoredMember {
  std::string group_id;
  std::string member_id;
  Timestamp timestamp = 0;
  double similarity = 0.0;
};

struct DistanceEntry {
  std::string group_id;
  std::string member_id;
  Timestamp timestamp = 0;
  double similarity = 0.0;
  double distance = 0.0;
};

struct DistanceSet {
  std::vector<DistanceEntry> entries;
};

// d_i = max_j s_j - s_i: the most similar member sits at distance 0 and
// ordering by ascending distance equals ordering by descending similarity.
inline DistanceSet to_distances(std::span<const ScoredMember> members) {
  if (members.empty()) throw StoreError("cannot derive distances from an empty member list");
  double max_similarity = members[0].similarity;
  for (const ScoredMember& m : members) max_similarity = std::max(max_similarity, m.similarity);
  DistanceSet out;
  out.entries.reserve(members.size());
  for (const ScoredMember& m : members) {
    out.entries.push_back(
        DistanceEntry{m.group_id, m.member_id, m.timestamp, m.similarity,
                      max_similarity - m.similarity});
  }
  return out;
}

struct KnnConfig {
  enum class Method { KernelVote, AdjustedWeighting };
  Method method = Method::KernelVote;
  Kernel kernel = Kernel::Triweight;
  int k = 3;
  int gamma = 3;       // AdjustedWeighting: neighbors considered per group
  double decay = 0.5;  // AdjustedWeighting: geometric weight in (0, 1)
};

struct RankedGroup {
  std::string group_id;
  double score = 0.0;
  double max_similarity = 0.0;
};

namespace detail {

// Sort key for neighbor selection: closest first, distance ties broken by
// earlier occurrence, then member id.
inline bool neighbor_before(const DistanceEntry& a, const DistanceEntry& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  return a.member_id < b.member_id;
}

// Final ordering of groups: best score first, ties by the more similar
// nearest member, then by group id.
inline void sort_ranked_groups(std::vector<RankedGroup>& groups) {
  std::sort(groups.begin(), groups.end(), [](const RankedGroup& a, const RankedGroup& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.max_similarity != b.max_similarity) return a.max_similarity > b.max_similarity;
    return a.group_id < b.group_id;
  });
}

inline std::map<std::string, double> group_max_similarities(const DistanceSet& dists) {
  std::map<std::string, double> out;
  for (const DistanceEntry& e : dists.entries) {
    auto [it, inserted] = out.try_emplace(e.group_id, e.similarity);
    if (!inserted) it->second = std::max(it->second, e.similarity);
  }
  return out;
}

// Kernel-weighted voting over an already neighbor-sorted entry list; shared
// by knn_rank and the grid search, which sorts once per query.
inline std::vector<RankedGroup> knn_rank_sorted(
    std::span<const DistanceEntry> sorted, const std::map<std::string, double>& max_sims,
    Kernel kernel, int k) {
  if (k < 1) throw ConfigError("k must be at least 1");
  const std::size_t selected = std::min<std::size_t>(sorted.size(), static_cast<std::size_t>(k));
  // distances are normalized by the reach of the (k+1)-th neighbor
  double normalizer;
  if (sorted.size() > selected) {
    normalizer = sorted[selected].distance;
  } else {
    normalizer = sorted[selected - 1].distance + 1.0;
  }
  std::map<std::string, double> votes;
  for (const auto& [group_id, max_sim] : max_sims) votes.emplace(group_id, 0.0);
  for (std::size_t i = 0; i < selected; ++i) {
    const double u = normalizer == 0.0 ? 0.0 : sorted[i].distance / normalizer;
    votes[sorted[i].group_id] += kernel_weight(kernel, u);
  }
  std::vector<RankedGroup> out;
  out.reserve(votes.size());
  for (const auto& [group_id, vote] : votes)
    out.push_back(RankedGroup{group_id, vote, max_sims.at(group_id)});
  sort_ranked_groups(out);
  return out;
}

}  // namespace detail

inline std::vector<RankedGroup> knn_rank(const DistanceSet& dists, const KnnConfig& cfg) {
  if (dists.entries.empty()) throw StoreError("knn ranking needs at least one candidate member");
  std::vector<DistanceEntry> sorted = dists.entries;
  std::sort(sorted.begin(), sorted.end(), detail::neighbor_before);
  return detail::knn_rank_sorted(sorted, detail::group_max_similarities(dists), cfg.kernel,
                                 cfg.k);
}

// Adjusted weighting: per group, h = sum_{i=1..gamma} decay^i * d_i over its
// gamma nearest members (all of them when it has fewer). Smaller h is better;
// scores are reported as -h so that higher still means better.
inline std::vector<RankedGroup> adjusted_weighting_rank(const DistanceSet& dists, int gamma,
                                                        double decay) {
  if (gamma < 1) throw ConfigError("gamma must be at least 1");
  if (!(decay > 0.0 && decay < 1.0)) throw ConfigError("decay must lie in (0, 1)");
  if (dists.entries.empty()) throw StoreError("knn ranking needs at least one candidate member");

  std::map<std::string, std::vector<double>> per_group;
  for (const DistanceEntry& e : dists.entries) per_group[e.group_id].push_back(e.distance);
  const auto max_sims = detail::group_max_similarities(dists);

  std::vector<RankedGroup> out;
  out.reserve(per_group.size());
  for (auto& [group_id, distances] : per_group) {
    std::sort(distances.begin(), distances.end());
    const std::size_t take = std::min<std::size_t>(distances.size(), static_cast<std::size_t>(gamma));
    double h = 0.0;
    double factor = 1.0;
    for (std::size_t i = 0; i < take; ++i) {
      factor *= decay;
      h += factor * distances[i];
    }
    out.push_back(RankedGroup{group_id, -h, max_sims.at(group_id)});
  }
  detail::sort_ranked_groups(out);
  return out;
}

inline std::vector<RankedGroup> rank_with(const DistanceSet& dists, const KnnConfig& cfg) {
  if (cfg.method == KnnConfig::Method::AdjustedWeighting)
    return adjusted_weighting_rank(dists, cfg.gamma, cfg.decay);
  return knn_rank(dists, cfg);
}

}  // namespace tracerank
