#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "clump/panel.hpp"

namespace clump {

inline constexpr std::size_t kFeatureCount = 7;

/// Column names in output order, also used as the feature CSV header.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "mean_diff", "sd_diff", "mean_abs_diff", "sd_abs_diff", "mean_growth", "pos_ratio", "max_angle"};

/// The seven dynamic characteristics of one trajectory.
struct FeatureVector {
  double mean_diff = 0;
  double sd_diff = 0;
  double mean_abs_diff = 0;
  double sd_abs_diff = 0;
  double mean_growth = 0;
  double pos_ratio = 0;
  double max_angle = 0;
  /// Set when the growth coefficient is undefined (first value zero or the
  /// end-to-start ratio non-positive); `mean_growth` is then 0.
  bool degenerate_growth = false;

  std::array<double, kFeatureCount> values() const noexcept {
    return {mean_diff, sd_diff, mean_abs_diff, sd_abs_diff, mean_growth, pos_ratio, max_angle};
  }
  void set_values(const std::array<double, kFeatureCount>& v) noexcept;

  bool operator==(const FeatureVector&) const = default;
};

struct FeatureMatrix {
  std::vector<std::string> ids;
  std::vector<FeatureVector> rows;
  bool standardized = false;

  std::size_t size() const noexcept { return rows.size(); }
  /// Row-major n x 7 copy of the numeric features.
  std::vector<double> flat() const;

  bool operator==(const FeatureMatrix&) const = default;
};

enum class Scaling { None, ZScore };

std::string_view to_string(Scaling mode);
/// Accepts "none" and "zscore"; throws std::invalid_argument otherwise.
Scaling parse_scaling(std::string_view name);

// Per-feature computations. All assume a trajectory that passes
// check_trajectory (at least kMinObservations strictly increasing times).

/// Half slopes between consecutive observations, T - 1 values.
std::vector<double> triangular_diffs(const Trajectory& traj);
double mean_diff(const Trajectory& traj);
/// Sample standard deviation (divisor T - 2) of the triangular differences.
double sd_diff(const Trajectory& traj);
double mean_abs_diff(const Trajectory& traj);
double sd_abs_diff(const Trajectory& traj);

struct GrowthResult {
  double value = 0;
  bool degenerate = false;
};
/// Geometric mean growth rate, (y_T / y_1)^(1/(T-1)) - 1.
GrowthResult mean_growth(const Trajectory& traj);

/// Count of growth coefficients >= 1 over the count below 1. A zero
/// denominator is replaced by 0.1; transitions from a zero value are skipped.
double pos_ratio(const Trajectory& traj);

/// Largest angle between the first-to-last chord and the first-to-inner
/// segments, negative when the chord is steeper than the winning segment.
double max_angle(const Trajectory& traj);

FeatureVector compute_features(const Trajectory& traj);

/// One row per trajectory in panel order. `threads` > 1 fans the work out;
/// results do not depend on the thread count.
FeatureMatrix extract_features(const MicroPanel& panel, unsigned threads = 1);

/// Column z-scores with the sample standard deviation; constant columns
/// become 0. Throws std::invalid_argument for z-scoring fewer than 2 rows.
FeatureMatrix standardize(const FeatureMatrix& matrix, Scaling mode);

void write_feature_csv(std::ostream& out, const FeatureMatrix& matrix);
/// Reads the format produced by write_feature_csv. Throws ParseError.
FeatureMatrix parse_feature_csv(std::istream& in);

}  // namespace clump
