#pragma once

#include <span>

#include "clump/cluster.hpp"
#include "json.hpp"

namespace clump {

// Partition comparisons take two equal-length label sequences over the same
// objects; label values are arbitrary. Both throw std::invalid_argument if
// the lengths differ or fewer than 2 objects are given.

/// Fraction of object pairs on which the two partitions agree.
double rand_index(std::span<const int> labels_a, std::span<const int> labels_b);

/// Hubert-Arabie chance-corrected Rand index. Returns 1 when the maximum and
/// expected index coincide (both partitions trivial and identical).
double adjusted_rand_index(std::span<const int> labels_a, std::span<const int> labels_b);

/// Mean silhouette width. Singletons score 0, and the mean is 0 whenever the
/// number of clusters is outside [2, n - 1].
double silhouette_mean(const DistanceMatrix& dist, std::span<const int> labels);

/// Smallest between-cluster distance over the largest cluster diameter;
/// +infinity when every cluster has zero diameter. Throws
/// std::invalid_argument for fewer than 2 clusters.
double dunn_index(const DistanceMatrix& dist, std::span<const int> labels);

struct IndexReport {
  double rand = 0;
  double adjusted_rand = 0;
  double silhouette = 0;
  double dunn = 0;  // may be +infinity
};

/// All four indices; `dist` is the space the clustering was done in.
/// Dunn is reported as NaN for a single cluster rather than throwing.
IndexReport evaluate(std::span<const int> truth, std::span<const int> predicted,
                     const DistanceMatrix& dist);

/// Dunn's infinity is written as the string "inf", NaN as null.
nlohmann::json to_json(const IndexReport& report);

}  // namespace clump
