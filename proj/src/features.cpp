#include "clump/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "clump/parallel.hpp"
#include "clump/text.hpp"

namespace clump {

void FeatureVector::set_values(const std::array<double, kFeatureCount>& v) noexcept {
  mean_diff = v[0];
  sd_diff = v[1];
  mean_abs_diff = v[2];
  sd_abs_diff = v[3];
  mean_growth = v[4];
  pos_ratio = v[5];
  max_angle = v[6];
}

std::vector<double> FeatureMatrix::flat() const {
  std::vector<double> out;
  out.reserve(rows.size() * kFeatureCount);
  for (const auto& row : rows) {
    const auto v = row.values();
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

std::string_view to_string(Scaling mode) {
  return mode == Scaling::ZScore ? "zscore" : "none";
}

Scaling parse_scaling(std::string_view name) {
  if (name == "none") return Scaling::None;
  if (name == "zscore") return Scaling::ZScore;
  throw std::invalid_argument("unknown scaling '" + std::string(name) + "' (expected none or zscore)");
}

namespace {

double mean_of(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Divisor is count - 1, which for T - 1 differences is T - 2.
double sample_sd(const std::vector<double>& xs, double mean) {
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::vector<double> abs_all(std::vector<double> xs) {
  for (auto& x : xs) x = std::abs(x);
  return xs;
}

}  // namespace

std::vector<double> triangular_diffs(const Trajectory& traj) {
  std::vector<double> diffs;
  diffs.reserve(traj.size() - 1);
  for (std::size_t t = 1; t < traj.size(); ++t) {
    diffs.push_back(0.5 * (traj.values[t] - traj.values[t - 1]) / (traj.times[t] - traj.times[t - 1]));
  }
  return diffs;
}

double mean_diff(const Trajectory& traj) { return mean_of(triangular_diffs(traj)); }

double sd_diff(const Trajectory& traj) {
  const auto diffs = triangular_diffs(traj);
  return sample_sd(diffs, mean_of(diffs));
}

double mean_abs_diff(const Trajectory& traj) { return mean_of(abs_all(triangular_diffs(traj))); }

double sd_abs_diff(const Trajectory& traj) {
  const auto abs_diffs = abs_all(triangular_diffs(traj));
  return sample_sd(abs_diffs, mean_of(abs_diffs));
}

GrowthResult mean_growth(const Trajectory& traj) {
  const double first = traj.values.front();
  const double last = traj.values.back();
  if (first == 0.0 || !(last / first > 0.0)) return {0.0, true};
  const double periods = static_cast<double>(traj.size() - 1);
  return {std::pow(last / first, 1.0 / periods) - 1.0, false};
}

double pos_ratio(const Trajectory& traj) {
  std::size_t up = 0;
  std::size_t down = 0;
  for (std::size_t t = 1; t < traj.size(); ++t) {
    const double prev = traj.values[t - 1];
    if (prev == 0.0) continue;
    if (traj.values[t] / prev >= 1.0) {
      ++up;
    } else {
      ++down;
    }
  }
  const double denominator = down == 0 ? 0.1 : static_cast<double>(down);
  return static_cast<double>(up) / denominator;
}

double max_angle(const Trajectory& traj) {
  const std::size_t last = traj.size() - 1;
  const double chord_dt = traj.times[last] - traj.times[0];
  const double chord_dy = traj.values[last] - traj.values[0];

  double best = -1.0;
  std::size_t best_t = 1;
  for (std::size_t t = 1; t < last; ++t) {
    const double dt = traj.times[t] - traj.times[0];
    const double dy = traj.values[t] - traj.values[0];
    // arccos of the normalized dot product, evaluated as atan2(|cross|, dot)
    // so that collinear points give exactly zero.
    const double dot = chord_dt * dt + chord_dy * dy;
    const double cross = chord_dt * dy - chord_dy * dt;
    const double angle = std::atan2(std::abs(cross), dot);
    if (angle > best) {
      best = angle;
      best_t = t;
    }
  }

  const double chord_slope = chord_dy / chord_dt;
  const double inner_slope =
      (traj.values[best_t] - traj.values[0]) / (traj.times[best_t] - traj.times[0]);
  return chord_slope > inner_slope ? -best : best;
}

FeatureVector compute_features(const Trajectory& traj) {
  const auto diffs = triangular_diffs(traj);
  const auto abs_diffs = abs_all(diffs);
  FeatureVector f;
  f.mean_diff = mean_of(diffs);
  f.sd_diff = sample_sd(diffs, f.mean_diff);
  f.mean_abs_diff = mean_of(abs_diffs);
  f.sd_abs_diff = sample_sd(abs_diffs, f.mean_abs_diff);
  const auto growth = mean_growth(traj);
  f.mean_growth = growth.value;
  f.degenerate_growth = growth.degenerate;
  f.pos_ratio = pos_ratio(traj);
  f.max_angle = max_angle(traj);
  return f;
}

FeatureMatrix extract_features(const MicroPanel& panel, unsigned threads) {
  FeatureMatrix m;
  m.ids.reserve(panel.size());
  for (const auto& traj : panel.trajectories) m.ids.push_back(traj.id);
  m.rows.resize(panel.size());
  parallel_for(panel.size(), threads,
               [&](std::size_t i) { m.rows[i] = compute_features(panel.trajectories[i]); });
  return m;
}

FeatureMatrix standardize(const FeatureMatrix& matrix, Scaling mode) {
  if (mode == Scaling::None) return matrix;
  const std::size_t n = matrix.size();
  if (n < 2) throw std::invalid_argument("z-score scaling needs at least 2 rows");

  std::array<double, kFeatureCount> mean{};
  for (const auto& row : matrix.rows) {
    const auto v = row.values();
    for (std::size_t j = 0; j < kFeatureCount; ++j) mean[j] += v[j];
  }
  for (auto& m : mean) m /= static_cast<double>(n);

  std::array<double, kFeatureCount> sd{};
  for (const auto& row : matrix.rows) {
    const auto v = row.values();
    for (std::size_t j = 0; j < kFeatureCount; ++j) sd[j] += (v[j] - mean[j]) * (v[j] - mean[j]);
  }
  for (auto& s : sd) s = std::sqrt(s / static_cast<double>(n - 1));

  FeatureMatrix out = matrix;
  for (auto& row : out.rows) {
    auto v = row.values();
    for (std::size_t j = 0; j < kFeatureCount; ++j) v[j] = sd[j] > 0 ? (v[j] - mean[j]) / sd[j] : 0.0;
    row.set_values(v);
  }
  out.standardized = true;
  return out;
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& matrix) {
  out << "id";
  for (auto name : kFeatureNames) out << ',' << name;
  out << ",degenerate_growth\n";
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    out << matrix.ids[i];
    for (double v : matrix.rows[i].values()) out << ',' << format_double(v);
    out << ',' << (matrix.rows[i].degenerate_growth ? 1 : 0) << '\n';
  }
}

FeatureMatrix parse_feature_csv(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  LineReader reader(ss.str());
  std::string_view line;
  if (!reader.next(line)) throw ParseError(0, "empty input");
  std::vector<std::string_view> expected{"id"};
  expected.insert(expected.end(), kFeatureNames.begin(), kFeatureNames.end());
  expected.push_back("degenerate_growth");
  if (split_csv_line(line) != expected) {
    throw ParseError(reader.line_number(), "unexpected feature CSV header");
  }

  FeatureMatrix m;
  while (reader.next(line)) {
    const auto fields = split_csv_line(line);
    if (fields.size() != expected.size()) {
      throw ParseError(reader.line_number(), "expected " + std::to_string(expected.size()) +
                                                 " fields, got " + std::to_string(fields.size()));
    }
    std::array<double, kFeatureCount> v{};
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      if (!parse_double(fields[j + 1], v[j])) {
        throw ParseError(reader.line_number(), "non-numeric " + std::string(kFeatureNames[j]));
      }
    }
    FeatureVector row;
    row.set_values(v);
    const auto flag = fields.back();
    if (flag != "0" && flag != "1") {
      throw ParseError(reader.line_number(), "degenerate_growth must be 0 or 1");
    }
    row.degenerate_growth = flag == "1";
    m.ids.emplace_back(fields[0]);
    m.rows.push_back(row);
  }
  return m;
}

}  // namespace clump
