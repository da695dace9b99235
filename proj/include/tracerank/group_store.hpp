#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tracerank/types.hpp"

namespace tracerank {

inline constexpr int kDefaultStalenessDays = 62;

// A group of reports believed to stem from the same underlying error.
struct Group {
  std::string id;
  std::vector<std::string> members;  // report ids in attachment order
  Timestamp created_at = 0;
  Timestamp updated_at = 0;
};

// The evolving collection of groups and their reports.
//
// Mutation is single-writer; a copy acts as an immutable snapshot that may
// be shared across concurrent scoring workers.
class GroupStore {
 public:
  GroupStore() = default;
  explicit GroupStore(int staleness_window_days)
      : staleness_window_days_(staleness_window_days) {}

  // Appends the report to the group, creating the group on first use.
  void attach(Report report, const std::string& group_id) {
    if (reports_.contains(report.id))
      throw StoreError("duplicate report id '" + report.id + "'");
    auto [it, created] = groups_.try_emplace(group_id);
    Group& group = it->second;
    if (created) {
      group.id = group_id;
      group.created_at = report.timestamp;
      group.updated_at = report.timestamp;
    } else {
      group.updated_at = std::max(group.updated_at, report.timestamp);
    }
    group.members.push_back(report.id);
    reports_.emplace(report.id, std::move(report));
  }

  // Groups still accepting reports at query_time. A group is closed only
  // once the gap since its last update strictly exceeds the staleness
  // window; a gap of exactly the window keeps it open.
  std::vector<std::string> open_groups(Timestamp query_time) const {
    const std::int64_t window =
        static_cast<std::int64_t>(staleness_window_days_) * kSecondsPerDay;
    std::vector<std::string> ids;
    for (const auto& [id, group] : groups_) {
      if (query_time - group.updated_at <= window) ids.push_back(id);
    }
    return ids;
  }

  bool has_group(const std::string& id) const { return groups_.contains(id); }
  bool has_report(const std::string& id) const { return reports_.contains(id); }

  const Group& group(const std::string& id) const {
    auto it = groups_.find(id);
    if (it == groups_.end()) throw StoreError("unknown group id '" + id + "'");
    return it->second;
  }

  const Report& report(const std::string& id) const {
    auto it = reports_.find(id);
    if (it == reports_.end()) throw StoreError("unknown report id '" + id + "'");
    return it->second;
  }

  const std::map<std::string, Group>& groups() const { return groups_; }
  std::size_t group_count() const { return groups_.size(); }
  std::size_t report_count() const { return reports_.size(); }
  int staleness_window_days() const { return staleness_window_days_; }

 private:
  std::map<std::string, Group> groups_;
  std::map<std::string, Report> reports_;
  int staleness_window_days_ = kDefaultStalenessDays;
};

}  // namespace tracerank
