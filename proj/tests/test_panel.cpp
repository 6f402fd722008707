#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "appendix_data.hpp"
#include "clump/panel.hpp"
#include "clump/text.hpp"
#include "doctest.h"

using namespace clump;

TEST_CASE("appendix CSV parses into three trajectories of five points") {
  const auto parsed = parse_long_csv(testdata::kAppendixCsv);
  CHECK(parsed.report.accepted == 3);
  CHECK(parsed.report.rejected.empty());
  REQUIRE(parsed.panel.size() == 3);
  for (const auto& traj : parsed.panel.trajectories) {
    CHECK(traj.size() == 5);
    CHECK(traj.times == std::vector<double>{0, 1, 2, 3, 4});
  }
  CHECK(parsed.panel.trajectories[0].id == "1");
  CHECK(parsed.panel.trajectories[2].values.back() == 9.94);
  CHECK_FALSE(parsed.panel.truth.has_value());
}

TEST_CASE("a two-point trajectory is rejected as too short") {
  const auto parsed = parse_long_csv(std::string("id,time,value\na,0,1\na,1,2\n"));
  CHECK(parsed.report.accepted == 0);
  REQUIRE(parsed.report.rejected.size() == 1);
  CHECK(parsed.report.rejected[0] == Rejection{"a", RejectReason::TooShort});
  CHECK(parsed.panel.empty());
}

TEST_CASE("duplicate (id, time) rejects only that id") {
  const auto parsed = parse_long_csv(std::string(
      "id,time,value\n"
      "a,0,1\na,1,2\na,1,3\na,2,4\n"
      "b,0,1\nb,1,2\nb,2,3\n"));
  CHECK(parsed.report.accepted == 1);
  REQUIRE(parsed.report.rejected.size() == 1);
  CHECK(parsed.report.rejected[0].id == "a");
  CHECK(parsed.report.rejected[0].reason == RejectReason::DuplicateId);
  REQUIRE(parsed.panel.size() == 1);
  CHECK(parsed.panel.trajectories[0].id == "b");
}

TEST_CASE("non-finite cells are reported, not thrown") {
  const auto parsed = parse_long_csv(std::string("id,time,value\na,0,1\na,1,nan\na,2,3\nb,0,1\nb,1,1\nb,2,1\n"));
  CHECK(parsed.report.accepted == 1);
  REQUIRE(parsed.report.rejected.size() == 1);
  CHECK(parsed.report.rejected[0].reason == RejectReason::NonFiniteValue);
}

TEST_CASE("times are shifted to start at zero and rows sorted") {
  const auto parsed = parse_long_csv(std::string("id,time,value\nx,2012.5,3\nx,2010.5,1\nx,2011.5,2\n"));
  REQUIRE(parsed.panel.size() == 1);
  CHECK(parsed.panel.trajectories[0].times == std::vector<double>{0, 1, 2});
  CHECK(parsed.panel.trajectories[0].values == std::vector<double>{1, 2, 3});
}

TEST_CASE("parse errors carry the line number") {
  CHECK_THROWS_WITH_AS(parse_long_csv(std::string("")), "empty input", ParseError);
  CHECK_THROWS_AS(parse_long_csv(std::string("id,time,value\n")), ParseError);
  CHECK_THROWS_AS(parse_long_csv(std::string("id,t,value\na,0,1\n")), ParseError);
  try {
    parse_long_csv(std::string("id,time,value\na,0,1\na,one,2\n"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_long_csv(std::string("id,time,value\na,0\n")), ParseError);
  CHECK_THROWS_AS(parse_long_csv(std::string("id,time,value\na,0,1x\n")), ParseError);
}

TEST_CASE("header tolerates BOM, CRLF and blank lines") {
  const auto parsed = parse_long_csv(std::string("\xEF\xBB\xBFid,time,value\r\n\r\na,0,1\r\na,1,2\r\na,2,4\r\n"));
  CHECK(parsed.report.accepted == 1);
  CHECK(parsed.panel.trajectories[0].values == std::vector<double>{1, 2, 4});
}

TEST_CASE("validate") {
  SUBCASE("appendix panel is clean") {
    const auto panel = parse_long_csv(testdata::kAppendixCsv).panel;
    const auto report = validate(panel);
    CHECK(report.accepted == 3);
    CHECK(report.rejected.empty());
  }
  SUBCASE("NaN value") {
    MicroPanel panel;
    panel.trajectories.push_back({"a", {0, 1, 2}, {1, std::numeric_limits<double>::quiet_NaN(), 3}});
    panel.trajectories.push_back({"b", {0, 1, 2}, {1, 2, 3}});
    const auto report = validate(panel);
    CHECK(report.accepted == 1);
    REQUIRE(report.rejected.size() == 1);
    CHECK(report.rejected[0] == Rejection{"a", RejectReason::NonFiniteValue});
  }
  SUBCASE("empty panel") {
    const auto report = validate(MicroPanel{});
    CHECK(report.accepted == 0);
    CHECK(report.rejected.empty());
  }
  SUBCASE("duplicate ids and unordered times") {
    MicroPanel panel;
    panel.trajectories.push_back({"a", {0, 1, 2}, {1, 2, 3}});
    panel.trajectories.push_back({"a", {0, 1, 2}, {1, 2, 3}});
    panel.trajectories.push_back({"c", {0, 2, 1}, {1, 2, 3}});
    panel.trajectories.push_back({"d", {0, 1}, {1, 2}});
    const auto report = validate(panel);
    CHECK(report.accepted == 0);
    CHECK(report.total() == 4);
    CHECK(report.rejected[0].reason == RejectReason::DuplicateId);
    CHECK(report.rejected[1].reason == RejectReason::DuplicateId);
    CHECK(report.rejected[2].reason == RejectReason::NonIncreasingTimes);
    CHECK(report.rejected[3].reason == RejectReason::TooShort);
  }
}

namespace {

std::string random_long_csv(std::mt19937_64& rng, std::vector<std::string>& rows) {
  std::uniform_int_distribution<int> n_ids(1, 6), n_obs(1, 6);
  std::normal_distribution<double> val(0, 10);
  rows.clear();
  const int ids = n_ids(rng);
  for (int i = 0; i < ids; ++i) {
    const int obs = n_obs(rng);
    double time = std::uniform_real_distribution<double>(-5, 5)(rng);
    for (int t = 0; t < obs; ++t) {
      time += std::uniform_real_distribution<double>(0.1, 2)(rng);
      rows.push_back("id" + std::to_string(i) + "," + format_double(time) + "," + format_double(val(rng)));
    }
  }
  std::string out = "id,time,value\n";
  for (const auto& r : rows) out += r + "\n";
  return out;
}

}  // namespace

TEST_CASE("parsing is insensitive to row order") {
  std::mt19937_64 rng(11);
  std::vector<std::string> rows;
  for (int iter = 0; iter < 200; ++iter) {
    const auto csv = random_long_csv(rng, rows);
    auto reference = parse_long_csv(csv);
    std::shuffle(rows.begin(), rows.end(), rng);
    std::string shuffled = "id,time,value\n";
    for (const auto& r : rows) shuffled += r + "\n";
    auto parsed = parse_long_csv(shuffled);
    // Group order follows first appearance; compare per id.
    auto by_id = [](MicroPanel p) {
      std::sort(p.trajectories.begin(), p.trajectories.end(),
                [](const auto& a, const auto& b) { return a.id < b.id; });
      return p;
    };
    CHECK(by_id(parsed.panel) == by_id(reference.panel));
    CHECK(parsed.report.accepted == reference.report.accepted);
    CHECK(parsed.report.rejected.size() == reference.report.rejected.size());
  }
}

TEST_CASE("parse -> write -> parse is identity on accepted trajectories") {
  std::mt19937_64 rng(12);
  std::vector<std::string> rows;
  for (int iter = 0; iter < 200; ++iter) {
    const auto first = parse_long_csv(random_long_csv(rng, rows));
    std::ostringstream out;
    write_long_csv(out, first.panel);
    if (first.panel.empty()) continue;
    const auto second = parse_long_csv(out.str());
    CHECK(second.panel == first.panel);
    CHECK(second.report.rejected.empty());
  }
}

TEST_CASE("truth sidecar round trip") {
  MicroPanel panel;
  panel.trajectories.push_back({"a", {0, 1, 2}, {1, 2, 3}});
  panel.trajectories.push_back({"b", {0, 1, 2}, {1, 2, 3}});
  panel.truth = std::map<std::string, int>{{"a", 1}, {"b", 2}};
  std::stringstream ss;
  write_truth_csv(ss, panel);
  CHECK(ss.str() == "id,true_cluster\na,1\nb,2\n");
  CHECK(parse_truth_csv(ss) == *panel.truth);
  std::istringstream bad("id,true_cluster\na,1.5\n");
  CHECK_THROWS_AS(parse_truth_csv(bad), ParseError);
}

TEST_CASE("format_double is shortest round-trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(15.54) == "15.54");
  CHECK(format_double(-2) == "-2");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  double back = 0;
  const double x = 1.0 / 3.0;
  REQUIRE(parse_double(format_double(x), back));
  CHECK(back == x);
}
