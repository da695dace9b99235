#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "tracerank/types.hpp"

namespace tracerank {

// A time-ordered collection of reports. Either every report carries a group
// label or none does.
struct Dataset {
  std::string name;
  std::vector<Report> reports;  // timestamps non-decreasing
};

// One report per line: {"id": "...", "timestamp": 123, "frames": ["pkg.Cls.m", ...],
// "group_id": "..."} with group_id optional. Frames are innermost-first.
inline Report parse_report_line(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid report line: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("report line must be a JSON object");
  if (!j.contains("id") || !j["id"].is_string())
    throw ParseError("report line needs a string 'id'");
  if (!j.contains("timestamp") || !j["timestamp"].is_number_integer())
    throw ParseError("report line needs an integer 'timestamp'");
  if (!j.contains("frames") || !j["frames"].is_array())
    throw ParseError("report line needs a 'frames' array");

  Report report;
  report.id = j["id"].get<std::string>();
  report.timestamp = j["timestamp"].get<Timestamp>();
  for (const auto& item : j["frames"]) {
    if (!item.is_string()) throw ParseError("frame entries must be strings");
    std::string token = normalize_frame_token(item.get<std::string>());
    if (token.empty()) throw ParseError("frame token is empty after normalization");
    report.frames.push_back(Frame{std::move(token)});
  }
  if (j.contains("group_id")) {
    if (!j["group_id"].is_string()) throw ParseError("'group_id' must be a string");
    report.group_label = j["group_id"].get<std::string>();
  }
  validate_report(report);
  return report;
}

inline std::string report_to_line(const Report& report) {
  nlohmann::json j;
  j["id"] = report.id;
  j["timestamp"] = report.timestamp;
  nlohmann::json frames = nlohmann::json::array();
  for (const Frame& frame : report.frames) frames.push_back(frame.token);
  j["frames"] = std::move(frames);
  if (report.group_label) j["group_id"] = *report.group_label;
  return j.dump();
}

inline Dataset load_dataset(const std::filesystem::path& path, std::string name = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path.string());
  Dataset data;
  data.name = name.empty() ? path.stem().string() : std::move(name);

  std::string line;
  std::size_t line_no = 0;
  std::size_t labeled = 0;
  std::unordered_set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      data.reports.push_back(parse_report_line(line));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    const Report& report = data.reports.back();
    if (!ids.insert(report.id).second)
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": duplicate report id '" + report.id + "'");
    if (report.group_label) ++labeled;
  }
  if (labeled != 0 && labeled != data.reports.size())
    throw ParseError(path.string() + ": mixes labeled and unlabeled reports");

  // stable: file order is the tie-break for equal timestamps
  std::stable_sort(data.reports.begin(), data.reports.end(),
                   [](const Report& a, const Report& b) { return a.timestamp < b.timestamp; });
  return data;
}

inline void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset file: " + path.string());
  for (const Report& report : data.reports) out << report_to_line(report) << '\n';
  if (!out) throw IoError("failed while writing dataset file: " + path.string());
}

// Proportions of the timeline plus the sim:agg subdivision of the train span.
struct SplitSpec {
  double train_fraction = 0.8;
  double validation_fraction = 0.1;
  double test_fraction = 0.1;
  int sim_ratio = 20;
  int agg_ratio = 1;
};

struct TemporalSplit {
  Dataset train_sim;
  Dataset train_agg;
  Dataset validation;
  Dataset test;
};

// Cuts the time-sorted stream into four contiguous spans:
// Train_Sim | Train_Agg | Validation | Test. Counts, not wall-clock days,
// define the boundaries.
inline TemporalSplit temporal_split(const Dataset& data, const SplitSpec& spec) {
  if (spec.train_fraction < 0 || spec.validation_fraction < 0 || spec.test_fraction < 0)
    throw ConfigError("split fractions must be non-negative");
  const double total = spec.train_fraction + spec.validation_fraction + spec.test_fraction;
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
  if (spec.sim_ratio < 1 || spec.agg_ratio < 1)
    throw ConfigError("sim:agg ratio components must be positive integers");

  const std::size_t n = data.reports.size();
  const auto train_end = static_cast<std::size_t>(std::llround(double(n) * spec.train_fraction));
  const auto validation_end = static_cast<std::size_t>(
      std::llround(double(n) * (spec.train_fraction + spec.validation_fraction)));
  const std::size_t train_n = train_end;
  const auto sim_n = static_cast<std::size_t>(std::llround(
      double(train_n) * double(spec.sim_ratio) / double(spec.sim_ratio + spec.agg_ratio)));

  const std::size_t agg_n = train_n - sim_n;
  const std::size_t validation_n = validation_end - train_end;
  const std::size_t test_n = n - validation_end;
  if (sim_n == 0 || agg_n == 0 || validation_n == 0 || test_n == 0)
    throw ConfigError("temporal split produces an empty span");

  auto slice = [&](std::size_t begin, std::size_t end, const char* suffix) {
    Dataset span;
    span.name = data.name + suffix;
    span.reports.assign(data.reports.begin() + static_cast<std::ptrdiff_t>(begin),
                        data.reports.begin() + static_cast<std::ptrdiff_t>(end));
    return span;
  };
  return TemporalSplit{
      slice(0, sim_n, ".train_sim"),
      slice(sim_n, train_end, ".train_agg"),
      slice(train_end, validation_end, ".validation"),
      slice(validation_end, n, ".test"),
  };
}

}  // namespace tracerank
