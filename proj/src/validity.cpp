#include "clump/validity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

namespace clump {

namespace {

double choose2(double n) { return n * (n - 1) / 2; }

// Pair counts from the contingency table of two partitions.
struct PairCounts {
  double total = 0;  // C(n, 2)
  double both = 0;   // sum C(n_ij, 2)
  double rows = 0;   // sum C(a_i, 2)
  double cols = 0;   // sum C(b_j, 2)
};

PairCounts pair_counts(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw std::invalid_argument("partitions differ in length");
  if (a.size() < 2) throw std::invalid_argument("partition comparison needs at least 2 objects");
  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> row_sums, col_sums;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cells[{a[i], b[i]}] += 1;
    row_sums[a[i]] += 1;
    col_sums[b[i]] += 1;
  }
  PairCounts pc;
  pc.total = choose2(static_cast<double>(a.size()));
  for (const auto& [_, c] : cells) pc.both += choose2(c);
  for (const auto& [_, c] : row_sums) pc.rows += choose2(c);
  for (const auto& [_, c] : col_sums) pc.cols += choose2(c);
  return pc;
}

// Distinct labels mapped to 0..k-1 in order of first appearance.
std::vector<std::size_t> dense_labels(std::span<const int> labels, std::size_t& k) {
  std::map<int, std::size_t> index;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, _] = index.try_emplace(labels[i], index.size());
    out[i] = it->second;
  }
  k = index.size();
  return out;
}

void require_same_size(const DistanceMatrix& dist, std::span<const int> labels) {
  if (dist.size() != labels.size()) throw std::invalid_argument("labels do not match distance matrix size");
}

}  // namespace

double rand_index(std::span<const int> labels_a, std::span<const int> labels_b) {
  const auto pc = pair_counts(labels_a, labels_b);
  // Pairs together in both plus pairs apart in both.
  const double agree = pc.total + 2 * pc.both - pc.rows - pc.cols;
  return agree / pc.total;
}

double adjusted_rand_index(std::span<const int> labels_a, std::span<const int> labels_b) {
  const auto pc = pair_counts(labels_a, labels_b);
  const double expected = pc.rows * pc.cols / pc.total;
  const double max_index = 0.5 * (pc.rows + pc.cols);
  if (max_index == expected) return 1.0;
  return (pc.both - expected) / (max_index - expected);
}

double silhouette_mean(const DistanceMatrix& dist, std::span<const int> labels) {
  require_same_size(dist, labels);
  const std::size_t n = labels.size();
  std::size_t k = 0;
  const auto dense = dense_labels(labels, k);
  if (k < 2 || k + 1 > n) return 0.0;

  std::vector<std::size_t> cluster_size(k, 0);
  for (auto c : dense) ++cluster_size[c];

  std::vector<double> sums(k);
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto own = dense[i];
    if (cluster_size[own] == 1) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sums[dense[j]] += dist(i, j);
    }
    const double a = sums[own] / static_cast<double>(cluster_size[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c != own) b = std::min(b, sums[c] / static_cast<double>(cluster_size[c]));
    }
    const double denom = std::max(a, b);
    if (denom > 0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

double dunn_index(const DistanceMatrix& dist, std::span<const int> labels) {
  require_same_size(dist, labels);
  std::size_t k = 0;
  const auto dense = dense_labels(labels, k);
  if (k < 2) throw std::invalid_argument("Dunn index needs at least 2 clusters");
  double separation = std::numeric_limits<double>::infinity();
  double diameter = 0;
  const std::size_t n = labels.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = dist(i, j);
      if (dense[i] == dense[j]) {
        diameter = std::max(diameter, d);
      } else {
        separation = std::min(separation, d);
      }
    }
  }
  if (diameter == 0) return std::numeric_limits<double>::infinity();
  return separation / diameter;
}

IndexReport evaluate(std::span<const int> truth, std::span<const int> predicted, const DistanceMatrix& dist) {
  IndexReport r;
  r.rand = rand_index(truth, predicted);
  r.adjusted_rand = adjusted_rand_index(truth, predicted);
  r.silhouette = silhouette_mean(dist, predicted);
  std::size_t k = 0;
  dense_labels(predicted, k);
  r.dunn = k >= 2 ? dunn_index(dist, predicted) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

nlohmann::json to_json(const IndexReport& report) {
  nlohmann::json dunn;
  if (std::isinf(report.dunn)) {
    dunn = "inf";
  } else if (std::isnan(report.dunn)) {
    dunn = nullptr;
  } else {
    dunn = report.dunn;
  }
  return {{"rand", report.rand},
          {"adjusted_rand", report.adjusted_rand},
          {"silhouette", report.silhouette},
          {"dunn", std::move(dunn)}};
}

}  // namespace clump
