#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "clump/panel.hpp"
#include "json.hpp"

namespace clump {

/// Linear mixed-effects model for one cluster:
///   y_it = (b0 + u0_i) + (b1 + u1_i) * t + e_it
/// with (u0, u1) bivariate normal and e_it ~ N(0, var_e).
struct MixedModelParams {
  double b0 = 0;
  double b1 = 0;
  double var_u0 = 0;
  double var_u1 = 0;
  double corr = 0;  // correlation of u0 and u1
  double var_e = 0;

  bool operator==(const MixedModelParams&) const = default;
};

struct ScenarioConfig {
  std::string name;
  std::size_t n_subjects = 0;
  std::vector<double> proportions;
  std::vector<MixedModelParams> params;  // one per cluster
  std::vector<double> times{0, 1, 2, 3, 4};
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument describing the first broken invariant.
  void check() const;
  /// Deterministic per-cluster subject counts: rounded proportions, with
  /// the last cluster taking the remainder.
  std::vector<std::size_t> cluster_sizes() const;

  bool operator==(const ScenarioConfig&) const = default;
};

/// Names accepted by builtin_scenario.
const std::vector<std::string>& builtin_scenario_names();

/// Study presets: balanced designs have 200 subjects split 50/50, unbalanced
/// designs 800 subjects split 75/25; the noise level picks the parameter set.
/// Throws std::invalid_argument listing valid names for an unknown name.
ScenarioConfig builtin_scenario(std::string_view name, std::uint64_t seed);

/// Draws one panel with truth labels 1..G. Subjects are emitted cluster by
/// cluster with ids "1".."n". Fully determined by the config (and its seed).
MicroPanel generate(const ScenarioConfig& config);

/// Per-replication seed from a master seed by counter-based mixing.
/// Injective in `replication` for a fixed master.
std::uint64_t split_seed(std::uint64_t master_seed, std::uint64_t replication);

nlohmann::json to_json(const ScenarioConfig& config);
/// Throws std::invalid_argument (or a json exception) on malformed input.
ScenarioConfig scenario_from_json(const nlohmann::json& doc);

}  // namespace clump
