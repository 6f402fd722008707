#include "clump/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "clump/cluster.hpp"
#include "clump/parallel.hpp"
#include "clump/text.hpp"

namespace clump {

void StudyConfig::check() const {
  if (replications < 1) throw std::invalid_argument("replications must be at least 1");
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  scenario.check();
  if (static_cast<std::size_t>(k) > scenario.n_subjects) {
    throw std::invalid_argument("k exceeds the number of subjects");
  }
}

namespace {

double quantile7(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double median_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  return quantile7(xs, 0.5);
}

}  // namespace

IndexSummary summarize(std::span<const double> values) {
  std::vector<double> xs;
  xs.reserve(values.size());
  for (double v : values)
    if (!std::isnan(v)) xs.push_back(v);
  IndexSummary s;
  s.count = xs.size();
  if (xs.empty()) {
    s.median = s.mean = s.sd = s.q1 = s.q3 = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  std::sort(xs.begin(), xs.end());
  s.median = quantile7(xs, 0.5);
  s.q1 = quantile7(xs, 0.25);
  s.q3 = quantile7(xs, 0.75);
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  } else {
    s.sd = 0;
  }
  return s;
}

StudySummary summarize(std::span<const ReplicationRecord> records) {
  std::vector<double> rand, ari, sil, dunn;
  for (const auto& r : records) {
    rand.push_back(r.indices.rand);
    ari.push_back(r.indices.adjusted_rand);
    sil.push_back(r.indices.silhouette);
    dunn.push_back(r.indices.dunn);
  }
  return {summarize(rand), summarize(ari), summarize(sil), summarize(dunn)};
}

ReplicationRecord run_replication(const StudyConfig& config, std::size_t r) {
  ReplicationRecord rec;
  rec.replication = r;
  rec.seed = split_seed(config.master_seed, r);

  ScenarioConfig scenario = config.scenario;
  scenario.seed = rec.seed;
  const auto panel = generate(scenario);
  const auto features = standardize(extract_features(panel), config.scaling);
  const auto assignment = cut(ward_dendrogram(features), config.k);

  std::vector<int> truth;
  truth.reserve(panel.size());
  for (const auto& traj : panel.trajectories) truth.push_back(panel.truth->at(traj.id));
  rec.indices = evaluate(truth, assignment.labels, euclidean_distances(features));
  return rec;
}

std::vector<ReplicationRecord> run_replications(const StudyConfig& config) {
  config.check();
  std::vector<ReplicationRecord> records(config.replications);
  parallel_for(config.replications, config.threads,
               [&](std::size_t r) { records[r] = run_replication(config, r); });
  return records;
}

StudySummary run_study(const StudyConfig& config, std::ostream* records) {
  const auto recs = run_replications(config);
  if (records != nullptr) {
    for (const auto& r : recs) *records << to_json(r).dump() << '\n';
  }
  return summarize(recs);
}

TimingReport run_timing(std::span<const std::size_t> sizes, std::size_t t, std::size_t repetitions,
                        std::uint64_t seed) {
  if (sizes.empty()) throw std::invalid_argument("no sizes given");
  if (t < kMinObservations) throw std::invalid_argument("need at least 3 visits");
  if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
  using clock = std::chrono::steady_clock;
  const auto seconds = [](clock::duration d) { return std::chrono::duration<double>(d).count(); };

  TimingReport report;
  report.t = t;
  report.repetitions = repetitions;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 2) throw std::invalid_argument("sizes must be at least 2");
    ScenarioConfig scenario = builtin_scenario("balanced-low", split_seed(seed, i));
    scenario.n_subjects = sizes[i];
    scenario.times.resize(t);
    std::iota(scenario.times.begin(), scenario.times.end(), 0.0);
    const auto panel = generate(scenario);

    std::vector<double> extract, clustering;
    TimingRow row;
    row.n = sizes[i];
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
      const auto t0 = clock::now();
      const auto features = extract_features(panel);
      const auto t1 = clock::now();
      const auto assignment = cut(ward_dendrogram(features), 2);
      const auto t2 = clock::now();
      extract.push_back(seconds(t1 - t0));
      clustering.push_back(seconds(t2 - t1));
      row.total_samples.push_back(seconds(t2 - t0));
      if (assignment.k != 2) throw std::logic_error("cut returned the wrong cluster count");
    }
    row.extract_seconds = median_of(extract);
    row.cluster_seconds = median_of(clustering);
    row.total_seconds = median_of(row.total_samples);
    report.rows.push_back(std::move(row));
  }
  return report;
}

double loglog_slope(std::span<const std::size_t> sizes, std::span<const double> seconds) {
  if (sizes.size() != seconds.size() || sizes.size() < 2) {
    throw std::invalid_argument("need at least two (size, time) pairs");
  }
  const double m = static_cast<double>(sizes.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    mx += std::log(static_cast<double>(sizes[i])) / m;
    my += std::log(seconds[i]) / m;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double dx = std::log(static_cast<double>(sizes[i])) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(seconds[i]) - my);
  }
  return sxy / sxx;
}

namespace {

nlohmann::json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

nlohmann::json to_json(const IndexSummary& s) {
  return {{"count", s.count}, {"median", number(s.median)}, {"mean", number(s.mean)},
          {"sd", number(s.sd)}, {"q1", number(s.q1)},         {"q3", number(s.q3)}};
}

nlohmann::json to_json(const StudySummary& s) {
  return {{"rand", to_json(s.rand)},
          {"adjusted_rand", to_json(s.adjusted_rand)},
          {"silhouette", to_json(s.silhouette)},
          {"dunn", to_json(s.dunn)}};
}

nlohmann::json to_json(const ReplicationRecord& r) {
  auto j = to_json(r.indices);
  j["replication"] = r.replication;
  j["seed"] = r.seed;
  return j;
}

nlohmann::json to_json(const TimingReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"n", r.n},
                    {"extract_seconds", r.extract_seconds},
                    {"cluster_seconds", r.cluster_seconds},
                    {"total_seconds", r.total_seconds},
                    {"total_samples", r.total_samples}});
  }
  return {{"t", report.t}, {"repetitions", report.repetitions}, {"rows", std::move(rows)}};
}

void write_summary_csv(std::ostream& out, const StudySummary& s) {
  const IndexSummary* cols[] = {&s.rand, &s.adjusted_rand, &s.silhouette, &s.dunn};
  out << "statistic,rand,adjusted_rand,silhouette,dunn\n";
  out << "No. of vals.";
  for (auto* c : cols) out << ',' << c->count;
  out << '\n';
  const std::pair<const char*, double IndexSummary::*> stats[] = {
      {"Median", &IndexSummary::median}, {"Mean", &IndexSummary::mean},
      {"Std. dev.", &IndexSummary::sd},  {"1st quartile", &IndexSummary::q1},
      {"3rd quartile", &IndexSummary::q3}};
  for (const auto& [label, field] : stats) {
    out << label;
    for (auto* c : cols) out << ',' << format_double(c->*field);
    out << '\n';
  }
}

}  // namespace clump
