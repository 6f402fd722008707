#include "clump/panel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "clump/text.hpp"

namespace clump {

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::TooShort: return "too-short";
    case RejectReason::NonIncreasingTimes: return "non-increasing-times";
    case RejectReason::DuplicateId: return "duplicate-id";
    case RejectReason::NonFiniteValue: return "non-finite-value";
  }
  return "unknown";
}

std::optional<RejectReason> check_trajectory(const Trajectory& traj) {
  if (traj.times.size() != traj.values.size()) return RejectReason::NonIncreasingTimes;
  for (std::size_t t = 0; t < traj.size(); ++t) {
    if (!std::isfinite(traj.times[t]) || !std::isfinite(traj.values[t]))
      return RejectReason::NonFiniteValue;
  }
  if (traj.size() < kMinObservations) return RejectReason::TooShort;
  for (std::size_t t = 1; t < traj.size(); ++t) {
    if (!(traj.times[t] > traj.times[t - 1])) return RejectReason::NonIncreasingTimes;
  }
  return std::nullopt;
}

ValidationReport validate(const MicroPanel& panel) {
  ValidationReport report;
  std::unordered_map<std::string_view, std::size_t> seen;
  for (const auto& traj : panel.trajectories) ++seen[traj.id];
  for (const auto& traj : panel.trajectories) {
    if (seen[traj.id] > 1) {
      report.rejected.push_back({traj.id, RejectReason::DuplicateId});
    } else if (auto reason = check_trajectory(traj)) {
      report.rejected.push_back({traj.id, *reason});
    } else {
      ++report.accepted;
    }
  }
  return report;
}

void normalize_times(Trajectory& traj) {
  if (traj.times.empty()) return;
  const double origin = traj.times.front();
  for (auto& d : traj.times) d -= origin;
}

namespace {

struct Row {
  double time;
  double value;
};

std::string slurp(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void expect_header(LineReader& reader, std::string_view expected) {
  std::string_view line;
  if (!reader.next(line)) throw ParseError(0, "empty input");
  const auto fields = split_csv_line(line);
  const auto want = split_csv_line(expected);
  if (fields != want) {
    throw ParseError(reader.line_number(),
                     "expected header '" + std::string(expected) + "', got '" + std::string(line) + "'");
  }
}

}  // namespace

ParsedPanel parse_long_csv(std::string text) {
  LineReader reader(std::move(text));
  expect_header(reader, "id,time,value");

  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<Row>> groups;
  std::string_view line;
  std::size_t rows = 0;
  while (reader.next(line)) {
    const auto fields = split_csv_line(line);
    const auto lineno = reader.line_number();
    if (fields.size() != 3) {
      throw ParseError(lineno, "expected 3 fields, got " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw ParseError(lineno, "empty id");
    Row row{};
    if (!parse_double(fields[1], row.time)) {
      throw ParseError(lineno, "non-numeric time '" + std::string(fields[1]) + "'");
    }
    if (!parse_double(fields[2], row.value)) {
      throw ParseError(lineno, "non-numeric value '" + std::string(fields[2]) + "'");
    }
    std::string id(fields[0]);
    auto [it, inserted] = groups.try_emplace(id);
    if (inserted) order.push_back(id);
    it->second.push_back(row);
    ++rows;
  }
  if (rows == 0) throw ParseError(0, "empty input: no data rows");

  ParsedPanel out;
  for (const auto& id : order) {
    auto& group = groups[id];
    const bool finite = std::all_of(group.begin(), group.end(), [](const Row& r) {
      return std::isfinite(r.time) && std::isfinite(r.value);
    });
    if (!finite) {
      out.report.rejected.push_back({id, RejectReason::NonFiniteValue});
      continue;
    }
    std::stable_sort(group.begin(), group.end(),
                     [](const Row& a, const Row& b) { return a.time < b.time; });
    const bool dup = std::adjacent_find(group.begin(), group.end(), [](const Row& a, const Row& b) {
                       return a.time == b.time;
                     }) != group.end();
    if (dup) {
      out.report.rejected.push_back({id, RejectReason::DuplicateId});
      continue;
    }
    Trajectory traj;
    traj.id = id;
    traj.times.reserve(group.size());
    traj.values.reserve(group.size());
    for (const auto& r : group) {
      traj.times.push_back(r.time);
      traj.values.push_back(r.value);
    }
    normalize_times(traj);
    if (auto reason = check_trajectory(traj)) {
      out.report.rejected.push_back({id, *reason});
      continue;
    }
    out.panel.trajectories.push_back(std::move(traj));
    ++out.report.accepted;
  }
  return out;
}

ParsedPanel parse_long_csv(std::istream& in) { return parse_long_csv(slurp(in)); }

void write_long_csv(std::ostream& out, const MicroPanel& panel) {
  out << "id,time,value\n";
  for (const auto& traj : panel.trajectories) {
    for (std::size_t t = 0; t < traj.size(); ++t) {
      out << traj.id << ',' << format_double(traj.times[t]) << ',' << format_double(traj.values[t])
          << '\n';
    }
  }
}

std::map<std::string, int> parse_truth_csv(std::istream& in) {
  LineReader reader(slurp(in));
  expect_header(reader, "id,true_cluster");
  std::map<std::string, int> truth;
  std::string_view line;
  while (reader.next(line)) {
    const auto fields = split_csv_line(line);
    const auto lineno = reader.line_number();
    if (fields.size() != 2) {
      throw ParseError(lineno, "expected 2 fields, got " + std::to_string(fields.size()));
    }
    double label = 0;
    if (!parse_double(fields[1], label) || label != std::floor(label)) {
      throw ParseError(lineno, "non-integer cluster label '" + std::string(fields[1]) + "'");
    }
    if (!truth.emplace(std::string(fields[0]), static_cast<int>(label)).second) {
      throw ParseError(lineno, "duplicate id '" + std::string(fields[0]) + "'");
    }
  }
  return truth;
}

void write_truth_csv(std::ostream& out, const MicroPanel& panel) {
  out << "id,true_cluster\n";
  if (!panel.truth) return;
  for (const auto& traj : panel.trajectories) {
    auto it = panel.truth->find(traj.id);
    if (it != panel.truth->end()) out << traj.id << ',' << it->second << '\n';
  }
}

}  // namespace clump
