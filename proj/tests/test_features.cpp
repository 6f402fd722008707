#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "appendix_data.hpp"
#include "clump/features.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace clump;

namespace {

// Table values are rounded to two decimals.
constexpr double kTableTol = 0.005 + 1e-9;

MicroPanel appendix_panel() { return parse_long_csv(testdata::kAppendixCsv).panel; }

Trajectory make(std::vector<double> times, std::vector<double> values) {
  return {"t", std::move(times), std::move(values)};
}

Trajectory random_trajectory(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(3, 12);
  std::uniform_real_distribution<double> gap(0.05, 3.0);
  std::normal_distribution<double> val(0, 5);
  const int T = len(rng);
  Trajectory traj;
  traj.id = "r";
  double time = 0;
  for (int t = 0; t < T; ++t) {
    traj.times.push_back(time);
    traj.values.push_back(val(rng));
    time += gap(rng);
  }
  return traj;
}

}  // namespace

TEST_CASE("triangular differences of appendix trajectory 1") {
  const auto panel = appendix_panel();
  const auto diffs = triangular_diffs(panel.trajectories[0]);
  REQUIRE(diffs.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(diffs[i] - testdata::kTrajectory1Diffs[i]) <= kTableTol);
}

TEST_CASE("triangular differences: trivial cases") {
  for (double d : triangular_diffs(make({0, 1, 3, 4}, {7, 7, 7, 7}))) CHECK(d == 0.0);
  const auto diffs = triangular_diffs(make({0, 4, 5}, {0, 2, 2}));
  CHECK(diffs[0] == 0.25);
}

TEST_CASE("appendix table is reproduced cell by cell") {
  const auto m = extract_features(appendix_panel());
  REQUIRE(m.size() == 3);
  CHECK_FALSE(m.standardized);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto got = m.rows[i].values();
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      INFO("row ", i + 1, " feature ", kFeatureNames[j], " got ", got[j]);
      if (i == 0 && j == 6) {
        // see "individual feature functions match the appendix"
        CHECK(std::abs(got[j] - testdata::kAppendixFeatures[i][j]) <= 0.01);
      } else {
        CHECK(std::abs(got[j] - testdata::kAppendixFeatures[i][j]) <= kTableTol);
      }
    }
    CHECK_FALSE(m.rows[i].degenerate_growth);
  }
}

TEST_CASE("individual feature functions match the appendix") {
  const auto panel = appendix_panel();
  const auto& t1 = panel.trajectories[0];
  const auto& t2 = panel.trajectories[1];
  const auto& t3 = panel.trajectories[2];
  auto near = [](double got, double want) { return std::abs(got - want) <= kTableTol; };
  CHECK(near(mean_diff(t1), 0.38));
  CHECK(near(mean_diff(t3), -0.57));
  CHECK(near(sd_diff(t1), 0.62));
  CHECK(near(sd_diff(t2), 0.26));
  CHECK(near(mean_abs_diff(t1), 0.51));
  CHECK(near(mean_abs_diff(t3), 0.57));
  CHECK(near(sd_abs_diff(t1), 0.48));
  CHECK(near(sd_abs_diff(t3), 0.38));
  CHECK(near(mean_growth(t1).value, 0.05));
  CHECK(near(mean_growth(t3).value, -0.09));
  CHECK(near(pos_ratio(t1), 3.00));
  CHECK(near(pos_ratio(t3), 0.33));
  // The reference -1.13 comes from rounding the cosine to 0.43 first; the
  // unrounded angle is -acos(2.4445 / (sqrt(25.3025) * sqrt(1.2601))).
  CHECK(max_angle(t1) == doctest::Approx(-std::acos(2.4445 / (std::sqrt(25.3025) * std::sqrt(1.2601)))));
  CHECK(max_angle(t1) == doctest::Approx(-1.1231).epsilon(1e-4));
  CHECK(near(max_angle(t2), 0.30));
}

TEST_CASE("trivial feature cases") {
  const auto constant = make({0, 1, 2, 3, 4}, {2, 2, 2, 2, 2});
  SUBCASE("constant trajectory") {
    const auto f = compute_features(constant);
    CHECK(f.values() == std::array<double, 7>{0, 0, 0, 0, 0, 40, 0});
    CHECK_FALSE(f.degenerate_growth);
  }
  SUBCASE("linear with equal spacing has zero sd and angle") {
    const auto line = make({0, 1, 2, 3, 4}, {1, 3, 5, 7, 9});
    CHECK(sd_diff(line) == 0.0);
    CHECK(max_angle(line) == 0.0);
  }
  SUBCASE("monotone: mean |diff| equals |mean diff|") {
    const auto down = make({0, 1, 2.5, 3}, {9, 7, 2, 1});
    CHECK(mean_abs_diff(down) == doctest::Approx(std::abs(mean_diff(down))).epsilon(1e-15));
  }
  SUBCASE("strictly increasing positive, T = 5") {
    CHECK(pos_ratio(make({0, 1, 2, 3, 4}, {1, 2, 3, 4, 5})) == 40.0);
  }
  SUBCASE("equal endpoints") {
    const auto g = mean_growth(make({0, 1, 2}, {3, 5, 3}));
    CHECK(g.value == 0.0);
    CHECK_FALSE(g.degenerate);
  }
  SUBCASE("degenerate growth") {
    CHECK(mean_growth(make({0, 1, 2}, {0, 1, 2})).degenerate);
    CHECK(mean_growth(make({0, 1, 2}, {-1, 1, 2})).degenerate);
    CHECK(mean_growth(make({0, 1, 2}, {-1, -2, -4})).value == doctest::Approx(1.0));
  }
  SUBCASE("zero predecessor is skipped in pos_ratio") {
    // transitions: 0->1 skipped, 1->0.5 down, 0.5->1 up
    CHECK(pos_ratio(make({0, 1, 2, 3}, {0, 1, 0.5, 1})) == 1.0);
  }
  SUBCASE("max angle tie picks the first inner point") {
    // Inner points at the same angle on either side of the chord: the first
    // lies above it, so the sign is positive.
    const auto tie = make({0, 1, 2, 3, 4}, {0, 1, 2, 1, 0});
    CHECK(max_angle(tie) == doctest::Approx(std::numbers::pi / 4));
    // Chord steeper than the only inner segment: negative.
    const auto tie2 = make({0, 1, 2}, {0, -1, 0});
    CHECK(max_angle(tie2) == doctest::Approx(-std::numbers::pi / 4));
  }
}

TEST_CASE("features match the straight-from-formula oracle") {
  std::mt19937_64 rng(2024);
  for (int iter = 0; iter < 1000; ++iter) {
    const auto traj = random_trajectory(rng);
    const auto got = compute_features(traj);
    const auto want = oracle::features(traj.times, traj.values);
    const auto v = got.values();
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      INFO("iter ", iter, " feature ", kFeatureNames[j]);
      CHECK(std::abs(v[j] - want.v[j]) <= 1e-12 * std::max(1.0, std::abs(want.v[j])));
    }
    CHECK(got.degenerate_growth == want.degenerate);
  }
}

TEST_CASE("feature invariants on random trajectories") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> shift(-100, 100), scale(0.1, 10);
  for (int iter = 0; iter < 500; ++iter) {
    auto traj = random_trajectory(rng);
    const auto f = compute_features(traj);
    CHECK(f.mean_abs_diff >= std::abs(f.mean_diff) - 1e-12);
    CHECK(f.sd_diff >= 0);
    CHECK(f.sd_abs_diff >= 0);
    CHECK(f.pos_ratio >= 0);
    CHECK(f.pos_ratio <= static_cast<double>(traj.size() - 1) / 0.1);
    CHECK(std::abs(f.max_angle) <= std::numbers::pi);

    auto shifted = traj;
    const double s = shift(rng);
    for (auto& d : shifted.times) d += s;
    const auto fs = compute_features(shifted).values();
    const auto fv = f.values();
    for (std::size_t j = 0; j < kFeatureCount; ++j) CHECK(fs[j] == doctest::Approx(fv[j]).epsilon(1e-9));

    auto scaled = traj;
    const double c = scale(rng);
    for (auto& y : scaled.values) y *= c;
    const auto fc = compute_features(scaled);
    CHECK(fc.mean_diff == doctest::Approx(c * f.mean_diff).epsilon(1e-9));
    CHECK(fc.sd_diff == doctest::Approx(c * f.sd_diff).epsilon(1e-9));
    CHECK(fc.mean_abs_diff == doctest::Approx(c * f.mean_abs_diff).epsilon(1e-9));
    CHECK(fc.sd_abs_diff == doctest::Approx(c * f.sd_abs_diff).epsilon(1e-9));
    CHECK(fc.mean_growth == doctest::Approx(f.mean_growth).epsilon(1e-9));
    CHECK(fc.pos_ratio == f.pos_ratio);
  }
}

TEST_CASE("collinear trajectories have zero sd and angle") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> coef(-5, 5);
  for (int iter = 0; iter < 200; ++iter) {
    auto traj = random_trajectory(rng);
    const double a = coef(rng), b = coef(rng);
    for (std::size_t t = 0; t < traj.size(); ++t) traj.values[t] = a + b * traj.times[t];
    const auto f = compute_features(traj);
    CHECK(f.sd_diff == doctest::Approx(0).scale(1).epsilon(1e-9));
    CHECK(std::abs(f.max_angle) <= 1e-6);
  }
}

TEST_CASE("extraction is a pure per-row map") {
  std::mt19937_64 rng(9);
  MicroPanel panel;
  for (int i = 0; i < 300; ++i) {
    auto traj = random_trajectory(rng);
    traj.id = std::to_string(i);
    panel.trajectories.push_back(traj);
  }
  const auto serial = extract_features(panel, 1);
  CHECK(extract_features(panel, 4) == serial);
  MicroPanel tail;
  tail.trajectories.assign(panel.trajectories.begin() + 100, panel.trajectories.end());
  const auto part = extract_features(tail);
  for (std::size_t i = 0; i < part.size(); ++i) CHECK(part.rows[i] == serial.rows[i + 100]);
}

TEST_CASE("standardize") {
  const auto m = extract_features(appendix_panel());
  CHECK(standardize(m, Scaling::None) == m);

  SUBCASE("z-scores have mean 0 and sd 1") {
    std::mt19937_64 rng(10);
    MicroPanel panel;
    for (int i = 0; i < 50; ++i) panel.trajectories.push_back(random_trajectory(rng));
    const auto z = standardize(extract_features(panel), Scaling::ZScore);
    CHECK(z.standardized);
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      double mean = 0, ss = 0;
      for (const auto& row : z.rows) mean += row.values()[j] / 50.0;
      for (const auto& row : z.rows) ss += std::pow(row.values()[j] - mean, 2);
      CHECK(mean == doctest::Approx(0).scale(1).epsilon(1e-12));
      CHECK(std::sqrt(ss / 49) == doctest::Approx(1).epsilon(1e-12));
    }
  }
  SUBCASE("two rows become +-1/sqrt(2), constant columns 0") {
    FeatureMatrix two;
    two.ids = {"a", "b"};
    two.rows.resize(2);
    two.rows[0].set_values({1, 5, 0, 0, 0, 0, 3});
    two.rows[1].set_values({4, 2, 0, 0, 0, 0, 3});
    const auto z = standardize(two, Scaling::ZScore);
    const double h = 1 / std::sqrt(2.0);
    CHECK(z.rows[0].mean_diff == doctest::Approx(-h));
    CHECK(z.rows[1].mean_diff == doctest::Approx(h));
    CHECK(z.rows[0].sd_diff == doctest::Approx(h));
    CHECK(z.rows[0].max_angle == 0.0);
  }
  SUBCASE("fewer than two rows") {
    FeatureMatrix one;
    one.ids = {"a"};
    one.rows.resize(1);
    CHECK_THROWS_AS(standardize(one, Scaling::ZScore), std::invalid_argument);
  }
  CHECK(parse_scaling("zscore") == Scaling::ZScore);
  CHECK_THROWS_AS(parse_scaling("minmax"), std::invalid_argument);
}

TEST_CASE("feature CSV header and round trip") {
  const auto m = extract_features(appendix_panel());
  std::stringstream ss;
  write_feature_csv(ss, m);
  std::string header;
  std::getline(ss, header);
  CHECK(header ==
        "id,mean_diff,sd_diff,mean_abs_diff,sd_abs_diff,mean_growth,pos_ratio,max_angle,degenerate_growth");
  ss.seekg(0);
  CHECK(parse_feature_csv(ss) == m);
}
