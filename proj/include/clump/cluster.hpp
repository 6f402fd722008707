#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "clump/features.hpp"
#include "clump/panel.hpp"
#include "json.hpp"

namespace clump {

/// Symmetric pairwise distances in condensed upper-triangular storage.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n);

  /// Euclidean distances between the rows of an n x dim row-major array.
  static DistanceMatrix from_points(std::span<const double> points, std::size_t dim);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    if (i == j) return 0.0;
    return i < j ? entries_[index(i, j)] : entries_[index(j, i)];
  }
  void set(std::size_t i, std::size_t j, double d) noexcept {
    entries_[i < j ? index(i, j) : index(j, i)] = d;
  }
  const std::vector<double>& condensed() const noexcept { return entries_; }

 private:
  std::size_t index(std::size_t i, std::size_t j) const noexcept {
    // Row i holds pairs (i, i+1) .. (i, n-1).
    return i * n_ - i * (i + 1) / 2 + (j - i - 1);
  }

  std::size_t n_ = 0;
  std::vector<double> entries_;
};

/// Euclidean distances over the seven numeric features (the degeneracy flag
/// is ignored). Throws std::invalid_argument for fewer than 2 rows or a
/// non-finite feature, naming the offending id.
DistanceMatrix euclidean_distances(const FeatureMatrix& matrix);

/// One agglomeration step. Nodes 0..n-1 are leaves; the merge at position m
/// creates node n + m.
struct Merge {
  std::size_t left = 0;
  std::size_t right = 0;
  double height = 0;  // increase in within-cluster sum of squares
  std::size_t size = 0;

  bool operator==(const Merge&) const = default;
};

struct Dendrogram {
  std::vector<std::string> leaves;
  std::vector<Merge> merges;  // n - 1 entries, heights nondecreasing

  std::size_t size() const noexcept { return leaves.size(); }
  bool operator==(const Dendrogram&) const = default;
};

/// Ward agglomeration of n points of dimension `dim` (row-major) using the
/// nearest-neighbour chain over cluster centroids and sizes. Runs in O(n^2)
/// time with O(n * dim) working memory; no pairwise matrix is stored.
///
/// Nearest-neighbour ties prefer the previous chain element, then the
/// cluster with the smallest leaf index. `leaves` defaults to "0".."n-1".
Dendrogram ward_dendrogram(std::span<const double> points, std::size_t dim,
                           std::vector<std::string> leaves = {});
Dendrogram ward_dendrogram(const FeatureMatrix& matrix);

/// Sum of squared deviations of the rows about their grand centroid.
double total_sum_of_squares(std::span<const double> points, std::size_t dim);

/// Flat clustering with labels 1..k aligned to `ids`.
struct Assignment {
  std::vector<std::string> ids;
  std::vector<int> labels;
  int k = 0;

  std::size_t size() const noexcept { return ids.size(); }
  /// Throws std::out_of_range for an unknown id.
  int label_of(const std::string& id) const;
};

/// Undoes the last k - 1 merges. Clusters are numbered by the order in which
/// their first leaf appears. Throws std::invalid_argument unless 1 <= k <= n.
Assignment cut(const Dendrogram& dendrogram, int k);

struct ClusterProfile {
  int cluster = 0;
  std::size_t size = 0;
  std::array<double, kFeatureCount> feature_means{};
  /// Pooled least-squares fit of value on time over all member observations;
  /// empty when the members have fewer than two distinct times.
  std::optional<double> intercept;
  std::optional<double> slope;
};

/// One profile per cluster 1..k. Throws std::invalid_argument if the
/// assignment does not cover a panel id or the matrix rows do not line up.
std::vector<ClusterProfile> cluster_profiles(const MicroPanel& panel, const FeatureMatrix& matrix,
                                             const Assignment& assignment);

nlohmann::json to_json(const Dendrogram& dendrogram);
nlohmann::json to_json(const std::vector<ClusterProfile>& profiles);

/// CSV with header `id,cluster`.
void write_assignment_csv(std::ostream& out, const Assignment& assignment);
/// Throws ParseError.
Assignment parse_assignment_csv(std::istream& in);

}  // namespace clump
