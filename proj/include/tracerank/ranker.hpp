#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tracerank/features.hpp"
#include "tracerank/types.hpp"

namespace tracerank {

struct TrainingConfig {
  double learning_rate = 1e-3;
  double weight_decay = 1e-3;
  int negatives_per_query = 10;
  int epochs = 20;
  std::uint64_t seed = 0;
};

// Pairwise logistic loss pushing the true group's score above a rival's:
// ln(1 + exp(-(s_pos - s_neg))), evaluated without overflow.
inline double ranknet_loss(double s_pos, double s_neg) {
  const double margin = s_pos - s_neg;
  if (margin >= 0.0) return std::log1p(std::exp(-margin));
  return -margin + std::log1p(std::exp(margin));
}

struct RankNetGradient {
  double d_pos;
  double d_neg;
};

inline RankNetGradient ranknet_gradient(double s_pos, double s_neg) {
  const double margin = s_pos - s_neg;
  // sigma(-margin), stable on both tails
  const double sig = margin >= 0.0 ? std::exp(-margin) / (1.0 + std::exp(-margin))
                                   : 1.0 / (1.0 + std::exp(margin));
  return RankNetGradient{-sig, sig};
}

// Per-pair training objective of the linear model on scaled features:
// ranknet(w.x_pos, w.x_neg) + (weight_decay / 2) * |w|^2.
inline double pair_loss(const std::array<double, kFeatureCount>& weights,
                        const FeatureVector& x_pos, const FeatureVector& x_neg,
                        double weight_decay) {
  double s_pos = 0.0;
  double s_neg = 0.0;
  double norm = 0.0;
  for (std::size_t d = 0; d < kFeatureCount; ++d) {
    s_pos += weights[d] * x_pos[d];
    s_neg += weights[d] * x_neg[d];
    norm += weights[d] * weights[d];
  }
  return ranknet_loss(s_pos, s_neg) + 0.5 * weight_decay * norm;
}

inline std::array<double, kFeatureCount> pair_loss_gradient(
    const std::array<double, kFeatureCount>& weights, const FeatureVector& x_pos,
    const FeatureVector& x_neg, double weight_decay) {
  double s_pos = 0.0;
  double s_neg = 0.0;
  for (std::size_t d = 0; d < kFeatureCount; ++d) {
    s_pos += weights[d] * x_pos[d];
    s_neg += weights[d] * x_neg[d];
  }
  const RankNetGradient g = ranknet_gradient(s_pos, s_neg);
  std::array<double, kFeatureCount> grad;
  for (std::size_t d = 0; d < kFeatureCount; ++d) {
    grad[d] = g.d_pos * x_pos[d] + g.d_neg * x_neg[d] + weight_decay * weights[d];
  }
  return grad;
}

// One ranking decision: the query's candidate features with the index of the
// ground-truth group among them.
struct TrainingQuery {
  std::string query_id;
  std::vector<FeatureVector> candidates;  // raw (unscaled) features
  std::size_t truth_index = 0;
};

// The linear aggregation ranker: 28 weights over standard-scaled features.
class LinearAggregator {
 public:
  LinearAggregator() { weights_.fill(0.0); }

  LinearAggregator(std::array<double, kFeatureCount> weights, FeatureScaler scaler,
                   TrainingConfig config)
      : weights_(weights), scaler_(std::move(scaler)), config_(config) {}

  // Scores equal the first-maximum feature directly, so the induced ranking
  // matches the nearest-trace baseline.
  static LinearAggregator first_maximum_only() {
    std::array<double, kFeatureCount> w{};
    w[0] = 1.0;
    return LinearAggregator(w, FeatureScaler::identity(), TrainingConfig{});
  }

  double score(const FeatureVector& x) const {
    const FeatureVector z = scaler_.transform(x);
    double s = 0.0;
    for (std::size_t d = 0; d < kFeatureCount; ++d) s += weights_[d] * z[d];
    return s;
  }

  // RankNet over sampled (truth, rival) pairs with per-pair Adam updates.
  // Queries whose candidate list has no rival contribute nothing. Fully
  // deterministic for a fixed seed, data, and config.
  static LinearAggregator train(std::span<const TrainingQuery> queries,
                                const TrainingConfig& config) {
    std::vector<const TrainingQuery*> usable;
    std::vector<FeatureVector> matrix;
    for (const TrainingQuery& q : queries) {
      if (q.truth_index >= q.candidates.size())
        throw ConfigError("training query '" + q.query_id + "' has no ground-truth candidate");
      for (const FeatureVector& x : q.candidates) matrix.push_back(x);
      if (q.candidates.size() >= 2) usable.push_back(&q);
    }
    if (usable.empty())
      throw ConfigError("no trainable query: every query lacks rival candidate groups");

    const FeatureScaler scaler = FeatureScaler::fit(matrix);
    std::vector<std::vector<FeatureVector>> scaled(usable.size());
    for (std::size_t i = 0; i < usable.size(); ++i) {
      scaled[i].reserve(usable[i]->candidates.size());
      for (const FeatureVector& x : usable[i]->candidates) scaled[i].push_back(scaler.transform(x));
    }

    std::mt19937_64 rng(config.seed);
    auto next_unit = [&rng] { return double(rng() >> 11) * 0x1.0p-53; };

    std::array<double, kFeatureCount> w;
    for (double& v : w) v = (next_unit() * 2.0 - 1.0) * 0.01;

    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double epsilon = 1e-8;
    std::array<double, kFeatureCount> m{};
    std::array<double, kFeatureCount> v{};
    std::uint64_t step = 0;

    std::vector<std::size_t> rivals;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      for (std::size_t qi = 0; qi < usable.size(); ++qi) {
        const TrainingQuery& q = *usable[qi];
        rivals.clear();
        for (std::size_t c = 0; c < q.candidates.size(); ++c) {
          if (c != q.truth_index) rivals.push_back(c);
        }
        const std::size_t sample = std::min<std::size_t>(
            rivals.size(), static_cast<std::size_t>(config.negatives_per_query));
        // partial Fisher-Yates: the first `sample` entries are drawn without
        // replacement
        for (std::size_t i = 0; i < sample; ++i) {
          const std::size_t j =
              i + std::uniform_int_distribution<std::size_t>(0, rivals.size() - 1 - i)(rng);
          std::swap(rivals[i], rivals[j]);
        }
        const FeatureVector& pos = scaled[qi][q.truth_index];
        for (std::size_t i = 0; i < sample; ++i) {
          const FeatureVector& neg = scaled[qi][rivals[i]];
          const auto grad = pair_loss_gradient(w, pos, neg, config.weight_decay);
          ++step;
          const double bias1 = 1.0 - std::pow(beta1, double(step));
          const double bias2 = 1.0 - std::pow(beta2, double(step));
          for (std::size_t d = 0; d < kFeatureCount; ++d) {
            m[d] = beta1 * m[d] + (1.0 - beta1) * grad[d];
            v[d] = beta2 * v[d] + (1.0 - beta2) * grad[d] * grad[d];
            const double m_hat = m[d] / bias1;
            const double v_hat = v[d] / bias2;
            w[d] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + epsilon);
          }
        }
      }
    }
    return LinearAggregator(w, scaler, config);
  }

  struct Coefficient {
    std::size_t index;  // 1-based, feature-table order
    std::string name;
    double weight;
  };

  std::vector<Coefficient> coefficients() const {
    std::vector<Coefficient> rows;
    rows.reserve(kFeatureCount);
    for (std::size_t d = 0; d < kFeatureCount; ++d)
      rows.push_back(Coefficient{d + 1, feature_names()[d], weights_[d]});
    return rows;
  }

  const std::array<double, kFeatureCount>& weights() const { return weights_; }
  const FeatureScaler& scaler() const { return scaler_; }
  const TrainingConfig& config() const { return config_; }

 private:
  std::array<double, kFeatureCount> weights_{};
  FeatureScaler scaler_;
  TrainingConfig config_;
};

// Mean RankNet loss over every (truth, rival) pair of every query, without
// sampling or the decay term. Used to watch training progress.
inline double mean_pairwise_loss(const LinearAggregator& model,
                                 std::span<const TrainingQuery> queries) {
  double total = 0.0;
  std::size_t pairs = 0;
  for (const TrainingQuery& q : queries) {
    if (q.candidates.size() < 2) continue;
    const double s_pos = model.score(q.candidates[q.truth_index]);
    for (std::size_t c = 0; c < q.candidates.size(); ++c) {
      if (c == q.truth_index) continue;
      total += ranknet_loss(s_pos, model.score(q.candidates[c]));
      ++pairs;
    }
  }
  return pairs == 0 ? 0.0 : total / double(pairs);
}

// --- model file --------------------------------------------------------------

inline constexpr int kModelSchemaVersion = 1;

struct LoadedModel {
  LinearAggregator aggregator;
  std::string similarity_model;
};

inline nlohmann::json aggregator_to_json(const LinearAggregator& model,
                                         const std::string& similarity_model) {
  nlohmann::json j;
  j["schema_version"] = kModelSchemaVersion;
  j["similarity_model"] = similarity_model;
  j["weights"] = model.weights();
  j["scaler"]["mean"] = model.scaler().mean();
  j["scaler"]["std"] = model.scaler().stddev();
  const TrainingConfig& cfg = model.config();
  j["config"]["learning_rate"] = cfg.learning_rate;
  j["config"]["weight_decay"] = cfg.weight_decay;
  j["config"]["negatives_per_query"] = cfg.negatives_per_query;
  j["config"]["epochs"] = cfg.epochs;
  j["config"]["seed"] = cfg.seed;
  return j;
}

inline LoadedModel aggregator_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("schema_version"))
    throw ModelError("model file is missing its schema version");
  if (j["schema_version"].get<int>() != kModelSchemaVersion)
    throw ModelError("unsupported model schema version " + j["schema_version"].dump());

  auto read_vector = [](const nlohmann::json& arr, const char* what) {
    if (!arr.is_array() || arr.size() != kFeatureCount)
      throw ModelError(std::string("model file field '") + what + "' must hold " +
                       std::to_string(kFeatureCount) + " numbers");
    FeatureVector out;
    for (std::size_t d = 0; d < kFeatureCount; ++d) out[d] = arr[d].get<double>();
    return out;
  };

  const FeatureVector weights = read_vector(j.at("weights"), "weights");
  const FeatureVector mean = read_vector(j.at("scaler").at("mean"), "scaler.mean");
  const FeatureVector stddev = read_vector(j.at("scaler").at("std"), "scaler.std");

  TrainingConfig cfg;
  const nlohmann::json& c = j.at("config");
  cfg.learning_rate = c.at("learning_rate").get<double>();
  cfg.weight_decay = c.at("weight_decay").get<double>();
  cfg.negatives_per_query = c.at("negatives_per_query").get<int>();
  cfg.epochs = c.at("epochs").get<int>();
  cfg.seed = c.at("seed").get<std::uint64_t>();

  std::array<double, kFeatureCount> w;
  std::copy(weights.begin(), weights.end(), w.begin());
  return LoadedModel{LinearAggregator(w, FeatureScaler::from_moments(mean, stddev), cfg),
                     j.at("similarity_model").get<std::string>()};
}

inline std::filesystem::path schema_path_for(const std::filesystem::path& model_path) {
  std::filesystem::path p = model_path;
  p.replace_extension(".schema.json");
  return p;
}

// Writes the model plus the feature schema (index -> name) next to it.
inline void save_model(const LinearAggregator& model, const std::string& similarity_model,
                       const std::filesystem::path& path) {
  {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model file: " + path.string());
    out << aggregator_to_json(model, similarity_model).dump(2) << '\n';
  }
  nlohmann::json schema = nlohmann::json::array();
  for (std::size_t d = 0; d < kFeatureCount; ++d) {
    schema.push_back({{"index", d + 1}, {"name", feature_names()[d]}});
  }
  std::ofstream out(schema_path_for(path));
  if (!out) throw IoError("cannot write feature schema next to: " + path.string());
  out << schema.dump(2) << '\n';
}

inline LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("invalid model file " + path.string() + ": " + e.what());
  }
  return aggregator_from_json(j);
}

}  // namespace tracerank
