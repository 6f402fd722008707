#include "clump/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "clump/text.hpp"

namespace clump {

DistanceMatrix::DistanceMatrix(std::size_t n) : n_(n), entries_(n < 2 ? 0 : n * (n - 1) / 2, 0.0) {}

DistanceMatrix DistanceMatrix::from_points(std::span<const double> points, std::size_t dim) {
  const std::size_t n = dim == 0 ? 0 : points.size() / dim;
  DistanceMatrix d(n);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* a = points.data() + i * dim;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double* b = points.data() + j * dim;
      double ss = 0;
      for (std::size_t c = 0; c < dim; ++c) ss += (a[c] - b[c]) * (a[c] - b[c]);
      d.entries_[pos++] = std::sqrt(ss);
    }
  }
  return d;
}

namespace {

void require_finite(const FeatureMatrix& matrix) {
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    for (double v : matrix.rows[i].values()) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("non-finite feature value for id '" + matrix.ids[i] + "'");
      }
    }
  }
}

}  // namespace

DistanceMatrix euclidean_distances(const FeatureMatrix& matrix) {
  if (matrix.size() < 2) throw std::invalid_argument("distance matrix needs at least 2 rows");
  require_finite(matrix);
  const auto flat = matrix.flat();
  return DistanceMatrix::from_points(flat, kFeatureCount);
}

double total_sum_of_squares(std::span<const double> points, std::size_t dim) {
  const std::size_t n = points.size() / dim;
  std::vector<double> centroid(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < dim; ++c) centroid[c] += points[i * dim + c];
  for (auto& x : centroid) x /= static_cast<double>(n);
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < dim; ++c) {
      const double d = points[i * dim + c] - centroid[c];
      ss += d * d;
    }
  return ss;
}

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Working state of the chain: each live cluster sits in the slot of its
// smallest leaf.
class WardChain {
 public:
  WardChain(std::span<const double> points, std::size_t dim)
      : dim_(dim), n_(points.size() / dim), centroid_(points.begin(), points.end()), size_(n_, 1) {
    active_.resize(n_);
    std::iota(active_.begin(), active_.end(), std::size_t{0});
  }

  double cost(std::size_t a, std::size_t b) const noexcept {
    const double* ca = centroid_.data() + a * dim_;
    const double* cb = centroid_.data() + b * dim_;
    double ss = 0;
    for (std::size_t c = 0; c < dim_; ++c) ss += (ca[c] - cb[c]) * (ca[c] - cb[c]);
    const double na = static_cast<double>(size_[a]);
    const double nb = static_cast<double>(size_[b]);
    return na * nb / (na + nb) * ss;
  }

  struct Step {
    std::size_t a, b;
    double height;
  };

  std::vector<Step> run() {
    std::vector<Step> steps;
    steps.reserve(n_ > 0 ? n_ - 1 : 0);
    std::vector<std::size_t> chain;
    chain.reserve(n_);
    while (active_.size() > 1) {
      if (chain.empty()) chain.push_back(active_.front());
      const std::size_t a = chain.back();
      const std::size_t prev = chain.size() >= 2 ? chain[chain.size() - 2] : kNone;

      std::size_t best = prev;
      double best_cost = prev == kNone ? std::numeric_limits<double>::infinity() : cost(a, prev);
      for (std::size_t c : active_) {
        if (c == a) continue;
        const double d = cost(a, c);
        if (d < best_cost) {
          best_cost = d;
          best = c;
        }
      }

      if (best == prev) {
        chain.pop_back();
        chain.pop_back();
        steps.push_back({std::min(a, best), std::max(a, best), best_cost});
        merge(std::min(a, best), std::max(a, best));
      } else {
        chain.push_back(best);
      }
    }
    return steps;
  }

 private:
  void merge(std::size_t keep, std::size_t drop) {
    const double nk = static_cast<double>(size_[keep]);
    const double nd = static_cast<double>(size_[drop]);
    double* ck = centroid_.data() + keep * dim_;
    const double* cd = centroid_.data() + drop * dim_;
    for (std::size_t c = 0; c < dim_; ++c) ck[c] = (nk * ck[c] + nd * cd[c]) / (nk + nd);
    size_[keep] += size_[drop];
    active_.erase(std::lower_bound(active_.begin(), active_.end(), drop));
  }

  std::size_t dim_;
  std::size_t n_;
  std::vector<double> centroid_;
  std::vector<std::size_t> size_;
  std::vector<std::size_t> active_;  // sorted slot ids
};

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(b)] = find(a); }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

Dendrogram ward_dendrogram(std::span<const double> points, std::size_t dim,
                           std::vector<std::string> leaves) {
  if (dim == 0 || points.size() % dim != 0) throw std::invalid_argument("points size is not a multiple of dim");
  const std::size_t n = points.size() / dim;
  if (n < 2) throw std::invalid_argument("Ward clustering needs at least 2 points");
  if (leaves.empty()) {
    leaves.reserve(n);
    for (std::size_t i = 0; i < n; ++i) leaves.push_back(std::to_string(i));
  }
  if (leaves.size() != n) throw std::invalid_argument("leaf count does not match point count");

  auto steps = WardChain(points, dim).run();

  // Rounding in the centroid updates can leave a parent a hair below a child;
  // lift it so that sorting by height keeps every child before its parent.
  {
    std::vector<double> slot_height(n, 0.0);
    for (auto& s : steps) {
      s.height = std::max({s.height, slot_height[s.a], slot_height[s.b]});
      slot_height[s.a] = s.height;
    }
  }
  std::stable_sort(steps.begin(), steps.end(),
                   [](const auto& x, const auto& y) { return x.height < y.height; });

  Dendrogram out;
  out.leaves = std::move(leaves);
  out.merges.reserve(n - 1);
  UnionFind uf(n);
  std::vector<std::size_t> node_of_root(n);
  std::vector<std::size_t> size_of_root(n, 1);
  std::iota(node_of_root.begin(), node_of_root.end(), std::size_t{0});
  for (std::size_t m = 0; m < steps.size(); ++m) {
    const std::size_t ra = uf.find(steps[m].a);
    const std::size_t rb = uf.find(steps[m].b);
    const std::size_t size = size_of_root[ra] + size_of_root[rb];
    out.merges.push_back({node_of_root[ra], node_of_root[rb], steps[m].height, size});
    uf.unite(ra, rb);
    node_of_root[ra] = n + m;
    size_of_root[ra] = size;
  }
  return out;
}

Dendrogram ward_dendrogram(const FeatureMatrix& matrix) {
  require_finite(matrix);
  const auto flat = matrix.flat();
  return ward_dendrogram(flat, kFeatureCount, matrix.ids);
}

int Assignment::label_of(const std::string& id) const {
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (ids[i] == id) return labels[i];
  throw std::out_of_range("id '" + id + "' not in assignment");
}

Assignment cut(const Dendrogram& dendrogram, int k) {
  const std::size_t n = dendrogram.size();
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw std::invalid_argument("k must be between 1 and " + std::to_string(n) + ", got " +
                                std::to_string(k));
  }
  // Map every node id to a leaf it contains, then join leaves.
  UnionFind uf(n);
  std::vector<std::size_t> some_leaf(n + dendrogram.merges.size());
  std::iota(some_leaf.begin(), some_leaf.begin() + static_cast<std::ptrdiff_t>(n), std::size_t{0});
  const std::size_t applied = n - static_cast<std::size_t>(k);
  for (std::size_t m = 0; m < dendrogram.merges.size(); ++m) {
    const auto& merge = dendrogram.merges[m];
    some_leaf[n + m] = some_leaf[merge.left];
    if (m < applied) uf.unite(some_leaf[merge.left], some_leaf[merge.right]);
  }

  Assignment out;
  out.ids = dendrogram.leaves;
  out.labels.resize(n);
  out.k = k;
  std::unordered_map<std::size_t, int> label_of_root;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] = label_of_root.try_emplace(uf.find(i), static_cast<int>(label_of_root.size()) + 1);
    out.labels[i] = it->second;
  }
  return out;
}

std::vector<ClusterProfile> cluster_profiles(const MicroPanel& panel, const FeatureMatrix& matrix,
                                             const Assignment& assignment) {
  if (matrix.size() != panel.size()) throw std::invalid_argument("feature matrix does not match panel");
  std::unordered_map<std::string_view, int> label;
  for (std::size_t i = 0; i < assignment.size(); ++i) label[assignment.ids[i]] = assignment.labels[i];

  struct Acc {
    std::size_t size = 0;
    std::array<double, kFeatureCount> feature_sum{};
    std::vector<std::size_t> members;
  };
  std::vector<Acc> acc(static_cast<std::size_t>(assignment.k));
  for (std::size_t i = 0; i < panel.size(); ++i) {
    const auto& id = panel.trajectories[i].id;
    if (matrix.ids[i] != id) throw std::invalid_argument("feature row " + std::to_string(i) + " is not '" + id + "'");
    auto it = label.find(id);
    if (it == label.end()) throw std::invalid_argument("id '" + id + "' has no cluster");
    if (it->second < 1 || it->second > assignment.k) throw std::invalid_argument("label out of range for '" + id + "'");
    auto& a = acc[static_cast<std::size_t>(it->second - 1)];
    ++a.size;
    const auto v = matrix.rows[i].values();
    for (std::size_t j = 0; j < kFeatureCount; ++j) a.feature_sum[j] += v[j];
    a.members.push_back(i);
  }

  std::vector<ClusterProfile> out;
  out.reserve(acc.size());
  for (std::size_t c = 0; c < acc.size(); ++c) {
    ClusterProfile p;
    p.cluster = static_cast<int>(c + 1);
    p.size = acc[c].size;
    for (std::size_t j = 0; j < kFeatureCount; ++j)
      p.feature_means[j] = p.size > 0 ? acc[c].feature_sum[j] / static_cast<double>(p.size) : 0.0;

    double count = 0, mean_t = 0, mean_y = 0;
    for (auto i : acc[c].members) {
      const auto& traj = panel.trajectories[i];
      for (std::size_t t = 0; t < traj.size(); ++t) {
        count += 1;
        mean_t += (traj.times[t] - mean_t) / count;
        mean_y += (traj.values[t] - mean_y) / count;
      }
    }
    double sxx = 0, sxy = 0;
    for (auto i : acc[c].members) {
      const auto& traj = panel.trajectories[i];
      for (std::size_t t = 0; t < traj.size(); ++t) {
        sxx += (traj.times[t] - mean_t) * (traj.times[t] - mean_t);
        sxy += (traj.times[t] - mean_t) * (traj.values[t] - mean_y);
      }
    }
    if (sxx > 0) {
      p.slope = sxy / sxx;
      p.intercept = mean_y - *p.slope * mean_t;
    }
    out.push_back(p);
  }
  return out;
}

nlohmann::json to_json(const Dendrogram& dendrogram) {
  nlohmann::json merges = nlohmann::json::array();
  for (const auto& m : dendrogram.merges) {
    merges.push_back({{"left", m.left}, {"right", m.right}, {"height", m.height}, {"size", m.size}});
  }
  return {{"linkage", "ward"}, {"leaves", dendrogram.leaves}, {"merges", std::move(merges)}};
}

nlohmann::json to_json(const std::vector<ClusterProfile>& profiles) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : profiles) {
    nlohmann::json means = nlohmann::json::object();
    for (std::size_t j = 0; j < kFeatureCount; ++j) means[std::string(kFeatureNames[j])] = p.feature_means[j];
    out.push_back({{"cluster", p.cluster},
                   {"size", p.size},
                   {"feature_means", std::move(means)},
                   {"intercept", p.intercept ? nlohmann::json(*p.intercept) : nlohmann::json(nullptr)},
                   {"slope", p.slope ? nlohmann::json(*p.slope) : nlohmann::json(nullptr)}});
  }
  return out;
}

void write_assignment_csv(std::ostream& out, const Assignment& assignment) {
  out << "id,cluster\n";
  for (std::size_t i = 0; i < assignment.size(); ++i) out << assignment.ids[i] << ',' << assignment.labels[i] << '\n';
}

Assignment parse_assignment_csv(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  LineReader reader(ss.str());
  std::string_view line;
  if (!reader.next(line)) throw ParseError(0, "empty input");
  if (split_csv_line(line) != std::vector<std::string_view>{"id", "cluster"}) {
    throw ParseError(reader.line_number(), "expected header 'id,cluster'");
  }
  Assignment a;
  std::set<int> distinct;
  while (reader.next(line)) {
    const auto fields = split_csv_line(line);
    double label = 0;
    if (fields.size() != 2 || !parse_double(fields[1], label) || label != std::floor(label)) {
      throw ParseError(reader.line_number(), "expected 'id,<integer cluster>'");
    }
    a.ids.emplace_back(fields[0]);
    a.labels.push_back(static_cast<int>(label));
    distinct.insert(static_cast<int>(label));
  }
  a.k = static_cast<int>(distinct.size());
  return a;
}

}  // namespace clump
