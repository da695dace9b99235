#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tracerank/dataset.hpp"
#include "tracerank/group_store.hpp"
#include "tracerank/types.hpp"

namespace tracerank {

// Parameters of the synthetic crash stream.
//
// Groups come in succession chains ("families"): each chain member inherits
// most of its predecessor's frame skeleton and becomes active in a later,
// partially overlapping time window. While a predecessor is still open, its
// members look very similar to queries aimed at the successor, so recency is
// the reliable disambiguator — exactly the signal the timestamp features are
// meant to pick up.
//
// Within a group, a live "palette" of variant frames drifts over member
// arrivals at drift_rate; a report reveals the current palette only through
// positions hit by mutation_rate. With mutation_rate = 0 every member equals
// the skeleton; with drift_rate = 0 member similarity carries no time signal.
struct SyntheticConfig {
  int groups = 240;
  double reports_per_group_mean = 10.0;  // Poisson, floored at 1
  int vocabulary = 400;                  // distinct method tokens
  double mutation_rate = 0.10;           // per-frame deviation from the skeleton
  double drift_rate = 0.05;              // per-frame palette/skeleton churn
  int family_size = 3;                   // groups per succession chain
  int skeleton_min = 8;
  int skeleton_max = 16;
  double span_days = 120.0;
  double window_days = 30.0;   // active window per group
  double window_overlap = 0.3; // fraction shared by successive windows
  Timestamp start_timestamp = 1'600'000'000;
  std::string name = "synthetic";
};

namespace detail {

inline std::string padded_id(char prefix, std::size_t value, int width) {
  std::ostringstream out;
  out << prefix << std::setfill('0') << std::setw(width) << value;
  return out.str();
}

}  // namespace detail

inline Dataset generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed) {
  if (cfg.groups < 1) throw ConfigError("generator needs at least one group");
  if (cfg.vocabulary < 1) throw ConfigError("generator needs a non-empty vocabulary");
  if (cfg.family_size < 1) throw ConfigError("family size must be positive");
  if (cfg.skeleton_min < 1 || cfg.skeleton_max < cfg.skeleton_min)
    throw ConfigError("bad skeleton length range");
  if (cfg.mutation_rate < 0 || cfg.mutation_rate > 1 || cfg.drift_rate < 0 ||
      cfg.drift_rate > 1)
    throw ConfigError("mutation and drift rates must lie in [0, 1]");
  if (cfg.reports_per_group_mean <= 0)
    throw ConfigError("reports per group must be positive");
  if (cfg.span_days <= 0 || cfg.window_days <= 0)
    throw ConfigError("time span and window must be positive");
  if (cfg.window_overlap < 0 || cfg.window_overlap >= 1)
    throw ConfigError("window overlap must lie in [0, 1)");

  std::mt19937_64 rng(seed);

  // Fully qualified method names; roughly ten methods share a package so the
  // package-level models have something to chew on.
  const int package_count = std::max(4, cfg.vocabulary / 10);
  std::vector<std::string> vocab(static_cast<std::size_t>(cfg.vocabulary));
  for (std::size_t v = 0; v < vocab.size(); ++v) {
    vocab[v] = "app.pkg" + std::to_string(v % static_cast<std::size_t>(package_count)) +
               ".Class" + std::to_string(v) + ".method" + std::to_string(v);
  }

  auto pick_token = [&]() -> const std::string& {
    return vocab[std::uniform_int_distribution<std::size_t>(0, vocab.size() - 1)(rng)];
  };
  auto flip = [&](double p) {
    return p > 0.0 && std::bernoulli_distribution(p)(rng);
  };

  struct Pending {
    Timestamp timestamp;
    std::size_t sequence;
    std::vector<Frame> frames;
    std::string group;
  };
  std::vector<Pending> pending;

  const double window_s = cfg.window_days * double(kSecondsPerDay);
  const double span_s = cfg.span_days * double(kSecondsPerDay);
  const double stride_s = window_s * (1.0 - cfg.window_overlap);

  const int family_count = (cfg.groups + cfg.family_size - 1) / cfg.family_size;
  int group_index = 0;
  std::size_t sequence = 0;
  for (int f = 0; f < family_count; ++f) {
    const int chain = std::min(cfg.family_size, cfg.groups - group_index);
    const std::size_t skeleton_len = std::uniform_int_distribution<std::size_t>(
        static_cast<std::size_t>(cfg.skeleton_min),
        static_cast<std::size_t>(cfg.skeleton_max))(rng);
    std::vector<std::string> skeleton(skeleton_len);
    for (auto& slot : skeleton) slot = pick_token();

    const double footprint = window_s + stride_s * (chain - 1);
    const double offset =
        footprint >= span_s
            ? 0.0
            : std::uniform_real_distribution<double>(0.0, span_s - footprint)(rng);

    for (int j = 0; j < chain; ++j, ++group_index) {
      if (j > 0) {
        // successors keep most of the skeleton but never all of it
        bool changed = false;
        for (auto& slot : skeleton) {
          if (flip(cfg.drift_rate)) {
            slot = pick_token();
            changed = true;
          }
        }
        if (!changed) {
          skeleton[std::uniform_int_distribution<std::size_t>(0, skeleton_len - 1)(rng)] =
              pick_token();
        }
      }
      const std::string group_id = detail::padded_id('g', static_cast<std::size_t>(group_index), 4);

      const double window_start = double(cfg.start_timestamp) + offset + stride_s * j;
      const int n_reports =
          std::max(1, std::poisson_distribution<int>(cfg.reports_per_group_mean)(rng));
      std::vector<Timestamp> times(static_cast<std::size_t>(n_reports));
      for (auto& t : times) {
        t = static_cast<Timestamp>(std::llround(std::uniform_real_distribution<double>(
            window_start, window_start + window_s)(rng)));
      }
      std::sort(times.begin(), times.end());

      std::vector<std::string> palette = skeleton;
      for (int m = 0; m < n_reports; ++m) {
        // the group's live variant set churns between arrivals
        for (auto& slot : palette) {
          if (flip(cfg.drift_rate)) slot = pick_token();
        }
        std::vector<Frame> frames;
        frames.reserve(skeleton_len);
        for (std::size_t pos = 0; pos < skeleton_len; ++pos) {
          const std::string* token = &skeleton[pos];
          if (flip(cfg.mutation_rate)) token = flip(0.5) ? &palette[pos] : &pick_token();
          frames.push_back(Frame{*token});
        }
        pending.push_back(Pending{times[static_cast<std::size_t>(m)], sequence++,
                                  std::move(frames), group_id});
      }
    }
  }

  std::stable_sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.sequence < b.sequence;
  });

  Dataset out;
  out.name = cfg.name;
  out.reports.reserve(pending.size());
  for (std::size_t i = 0; i < pending.size(); ++i) {
    Report report;
    report.id = detail::padded_id('r', i, 6);
    report.timestamp = pending[i].timestamp;
    report.frames = std::move(pending[i].frames);
    report.group_label = pending[i].group;
    out.reports.push_back(std::move(report));
  }
  return out;
}

}  // namespace tracerank
