#pragma once

#include <cctype>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tracerank {

using Timestamp = std::int64_t;  // Unix seconds

inline constexpr std::int64_t kSecondsPerDay = 86'400;

// Error taxonomy. The CLI maps each class to a distinct exit status.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StoreError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One stack frame: the fully qualified method name (package + class + method).
struct Frame {
  std::string token;

  friend bool operator==(const Frame&, const Frame&) = default;
};

// Strips all whitespace from a raw frame token.
inline std::string normalize_frame_token(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  for (unsigned char c : raw) {
    if (!std::isspace(c)) out.push_back(static_cast<char>(c));
  }
  return out;
}

// A single crash report: ordered frames, innermost call first.
struct Report {
  std::string id;
  Timestamp timestamp = 0;
  std::vector<Frame> frames;
  std::optional<std::string> group_label;  // ground truth, when known
};

inline void validate_report(const Report& report) {
  if (report.id.empty()) throw ParseError("report has an empty id");
  if (report.frames.empty()) throw ParseError("report '" + report.id + "' has no frames");
  for (const Frame& frame : report.frames) {
    if (frame.token.empty())
      throw ParseError("report '" + report.id + "' contains an empty frame token");
  }
}

}  // namespace tracerank
