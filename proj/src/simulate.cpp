#include "clump/simulate.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace clump {

namespace {

// Regression parameters per noise level, cluster 1 (MS) then cluster 2 (HC).
const std::vector<MixedModelParams> kHighNoise = {
    {-0.0600, -0.7400, 0.9999, 0.1000, 0.0390, 2.1015},
    {-0.3361, -0.2000, 0.0703, 0.0586, -0.0040, 1.3677},
};
const std::vector<MixedModelParams> kLowNoise = {
    {-0.0600, -0.7400, 0.9999, 0.0100, 0.0120, 0.1000},
    {-0.3361, -0.2000, 0.0703, 0.0100, -0.0020, 0.1000},
};

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

void ScenarioConfig::check() const {
  if (n_subjects == 0) throw std::invalid_argument("n_subjects must be positive");
  if (proportions.empty()) throw std::invalid_argument("at least one cluster is required");
  if (proportions.size() != params.size()) {
    throw std::invalid_argument("proportions and params must have one entry per cluster");
  }
  for (double p : proportions) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("proportions must lie in [0, 1]");
  }
  const double sum = std::accumulate(proportions.begin(), proportions.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("proportions must sum to 1");
  for (const auto& p : params) {
    if (!(p.var_u0 >= 0 && p.var_u1 >= 0 && p.var_e >= 0)) {
      throw std::invalid_argument("variances must be non-negative");
    }
    if (!(p.corr >= -1 && p.corr <= 1)) throw std::invalid_argument("corr must lie in [-1, 1]");
  }
  if (times.size() < kMinObservations) throw std::invalid_argument("need at least 3 time points");
  for (std::size_t t = 1; t < times.size(); ++t) {
    if (!(times[t] > times[t - 1])) throw std::invalid_argument("times must be strictly increasing");
  }
}

std::vector<std::size_t> ScenarioConfig::cluster_sizes() const {
  std::vector<std::size_t> sizes(proportions.size(), 0);
  std::size_t assigned = 0;
  for (std::size_t g = 0; g + 1 < proportions.size(); ++g) {
    sizes[g] = static_cast<std::size_t>(std::llround(proportions[g] * static_cast<double>(n_subjects)));
    sizes[g] = std::min(sizes[g], n_subjects - assigned);
    assigned += sizes[g];
  }
  sizes.back() = n_subjects - assigned;
  return sizes;
}

const std::vector<std::string>& builtin_scenario_names() {
  static const std::vector<std::string> names = {"balanced-low", "balanced-high", "unbalanced-low",
                                                 "unbalanced-high"};
  return names;
}

ScenarioConfig builtin_scenario(std::string_view name, std::uint64_t seed) {
  ScenarioConfig c;
  c.name = std::string(name);
  c.seed = seed;
  if (name == "balanced-low" || name == "balanced-high") {
    c.n_subjects = 200;
    c.proportions = {0.5, 0.5};
  } else if (name == "unbalanced-low" || name == "unbalanced-high") {
    c.n_subjects = 800;
    c.proportions = {0.75, 0.25};
  } else {
    std::string valid;
    for (const auto& n : builtin_scenario_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown scenario '" + std::string(name) + "' (valid: " + valid + ")");
  }
  c.params = name.ends_with("-low") ? kLowNoise : kHighNoise;
  return c;
}

MicroPanel generate(const ScenarioConfig& config) {
  config.check();
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  MicroPanel panel;
  panel.truth.emplace();
  panel.trajectories.reserve(config.n_subjects);
  const auto sizes = config.cluster_sizes();
  std::size_t next_id = 1;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    const auto& p = config.params[g];
    const double sd_u0 = std::sqrt(p.var_u0);
    const double sd_u1 = std::sqrt(p.var_u1);
    const double sd_e = std::sqrt(p.var_e);
    // Cholesky factor of [[var_u0, c], [c, var_u1]] with c = corr * sd_u0 * sd_u1.
    const double residual = std::sqrt(std::max(0.0, 1.0 - p.corr * p.corr));
    for (std::size_t s = 0; s < sizes[g]; ++s) {
      const double z0 = normal(rng);
      const double z1 = normal(rng);
      const double u0 = sd_u0 * z0;
      const double u1 = sd_u1 * (p.corr * z0 + residual * z1);
      Trajectory traj;
      traj.id = std::to_string(next_id++);
      traj.times.reserve(config.times.size());
      traj.values.reserve(config.times.size());
      for (double t : config.times) {
        traj.times.push_back(t - config.times.front());
        traj.values.push_back((p.b0 + u0) + (p.b1 + u1) * t + sd_e * normal(rng));
      }
      panel.truth->emplace(traj.id, static_cast<int>(g + 1));
      panel.trajectories.push_back(std::move(traj));
    }
  }
  return panel;
}

std::uint64_t split_seed(std::uint64_t master_seed, std::uint64_t replication) {
  return mix64(master_seed + (replication + 1) * 0x9E3779B97F4A7C15ULL);
}

nlohmann::json to_json(const ScenarioConfig& config) {
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& p : config.params) {
    clusters.push_back({{"b0", p.b0},
                        {"b1", p.b1},
                        {"var_u0", p.var_u0},
                        {"var_u1", p.var_u1},
                        {"corr", p.corr},
                        {"var_e", p.var_e}});
  }
  return {{"name", config.name},
          {"n_subjects", config.n_subjects},
          {"proportions", config.proportions},
          {"clusters", std::move(clusters)},
          {"times", config.times},
          {"seed", config.seed}};
}

ScenarioConfig scenario_from_json(const nlohmann::json& doc) {
  ScenarioConfig c;
  // A bare name (optionally with overrides) starts from the preset.
  if (doc.contains("name") && !doc.contains("clusters")) {
    c = builtin_scenario(doc.at("name").get<std::string>(), doc.value("seed", std::uint64_t{0}));
  } else {
    c.name = doc.value("name", std::string("custom"));
    for (const auto& cl : doc.at("clusters")) {
      MixedModelParams p;
      p.b0 = cl.at("b0").get<double>();
      p.b1 = cl.at("b1").get<double>();
      p.var_u0 = cl.value("var_u0", 0.0);
      p.var_u1 = cl.value("var_u1", 0.0);
      p.corr = cl.value("corr", 0.0);
      p.var_e = cl.value("var_e", 0.0);
      c.params.push_back(p);
    }
    c.proportions = doc.at("proportions").get<std::vector<double>>();
    c.n_subjects = doc.at("n_subjects").get<std::size_t>();
  }
  if (doc.contains("n_subjects")) c.n_subjects = doc.at("n_subjects").get<std::size_t>();
  if (doc.contains("proportions")) c.proportions = doc.at("proportions").get<std::vector<double>>();
  if (doc.contains("times")) c.times = doc.at("times").get<std::vector<double>>();
  if (doc.contains("seed")) c.seed = doc.at("seed").get<std::uint64_t>();
  c.check();
  return c;
}

}  // namespace clump
