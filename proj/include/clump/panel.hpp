#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace clump {

/// Smallest number of observations a trajectory needs for every feature
/// to be defined (the standard deviations divide by T - 2).
inline constexpr std::size_t kMinObservations = 3;

/// One object's time-ordered measurements.
///
/// `times` hold elapsed time since the first observation, so a trajectory
/// produced by the readers or the simulator has `times[0] == 0`. The struct
/// itself does not enforce its invariants; `validate` reports violations.
struct Trajectory {
  std::string id;
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  bool operator==(const Trajectory&) const = default;
};

/// A set of trajectories with optional ground-truth cluster labels.
struct MicroPanel {
  std::vector<Trajectory> trajectories;
  std::optional<std::map<std::string, int>> truth;

  std::size_t size() const noexcept { return trajectories.size(); }
  bool empty() const noexcept { return trajectories.empty(); }
  bool operator==(const MicroPanel&) const = default;
};

enum class RejectReason { TooShort, NonIncreasingTimes, DuplicateId, NonFiniteValue };

std::string_view to_string(RejectReason reason);

struct Rejection {
  std::string id;
  RejectReason reason;
  bool operator==(const Rejection&) const = default;
};

struct ValidationReport {
  std::size_t accepted = 0;
  std::vector<Rejection> rejected;

  std::size_t total() const noexcept { return accepted + rejected.size(); }
};

struct ParsedPanel {
  MicroPanel panel;
  ValidationReport report;
};

/// Reads long-format CSV with header `id,time,value`. Rows may come in any
/// order; they are grouped by id (in order of first appearance) and sorted by
/// time. Times are shifted so each trajectory starts at zero. Trajectories
/// that break an invariant are dropped and listed in the report.
///
/// Throws ParseError for an empty input, a wrong header, a row with the wrong
/// number of fields or a non-numeric time/value cell.
ParsedPanel parse_long_csv(std::istream& in);
ParsedPanel parse_long_csv(std::string text);

/// Checks every trajectory invariant without modifying the panel. At most one
/// reason is reported per trajectory, checked in the order duplicate id,
/// non-finite value, too short, non-increasing times.
ValidationReport validate(const MicroPanel& panel);

/// Rejection reason for a single trajectory, ignoring id uniqueness.
std::optional<RejectReason> check_trajectory(const Trajectory& traj);

/// Shifts times so the first observation is at zero.
void normalize_times(Trajectory& traj);

void write_long_csv(std::ostream& out, const MicroPanel& panel);

/// Truth sidecar with header `id,true_cluster`.
std::map<std::string, int> parse_truth_csv(std::istream& in);
void write_truth_csv(std::ostream& out, const MicroPanel& panel);

}  // namespace clump
