#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "clump/features.hpp"
#include "clump/simulate.hpp"
#include "clump/validity.hpp"
#include "json.hpp"

namespace clump {

struct StudyConfig {
  ScenarioConfig scenario;  // its seed is replaced per replication
  std::size_t replications = 1;
  int k = 2;
  Scaling scaling = Scaling::None;
  std::uint64_t master_seed = 0;
  unsigned threads = 1;

  void check() const;
};

struct ReplicationRecord {
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  IndexReport indices;
};

/// Distribution summary of one index across replications. Quantiles use
/// linear interpolation between order statistics (R's default type 7); the
/// standard deviation uses the n - 1 divisor. NaN entries are skipped.
struct IndexSummary {
  std::size_t count = 0;
  double median = 0;
  double mean = 0;
  double sd = 0;
  double q1 = 0;
  double q3 = 0;
};

IndexSummary summarize(std::span<const double> values);

struct StudySummary {
  IndexSummary rand;
  IndexSummary adjusted_rand;
  IndexSummary silhouette;
  IndexSummary dunn;
};

StudySummary summarize(std::span<const ReplicationRecord> records);

/// Generate, extract, scale, cluster and score replication `r`.
/// Silhouette and Dunn use the distances of the (scaled) feature space.
ReplicationRecord run_replication(const StudyConfig& config, std::size_t r);

/// All replications (in parallel when config.threads > 1), in replication
/// order. The result does not depend on the thread count.
std::vector<ReplicationRecord> run_replications(const StudyConfig& config);

/// Runs the study and summarizes it; each record is also written as one JSON
/// line to `records` when given.
StudySummary run_study(const StudyConfig& config, std::ostream* records = nullptr);

struct TimingRow {
  std::size_t n = 0;
  double extract_seconds = 0;  // medians over repetitions
  double cluster_seconds = 0;
  double total_seconds = 0;
  std::vector<double> total_samples;
};

struct TimingReport {
  std::size_t t = 0;
  std::size_t repetitions = 0;
  std::vector<TimingRow> rows;
};

/// Times feature extraction and Ward clustering (plus a k = 2 cut) on
/// balanced low-noise panels of each size with `t` annual visits. Runs
/// serially on the calling thread. Throws std::invalid_argument for empty
/// `sizes`, a size below 2, `t` < 3 or zero repetitions.
TimingReport run_timing(std::span<const std::size_t> sizes, std::size_t t, std::size_t repetitions,
                        std::uint64_t seed);

/// Least-squares slope of log(seconds) against log(n).
double loglog_slope(std::span<const std::size_t> sizes, std::span<const double> seconds);

nlohmann::json to_json(const IndexSummary& summary);
nlohmann::json to_json(const StudySummary& summary);
nlohmann::json to_json(const ReplicationRecord& record);
nlohmann::json to_json(const TimingReport& report);

/// Statistics as rows (No. of vals., Median, Mean, Std. dev., 1st quartile,
/// 3rd quartile), indices as columns.
void write_summary_csv(std::ostream& out, const StudySummary& summary);

}  // namespace clump
