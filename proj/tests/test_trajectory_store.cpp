#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "mobitrace/error.hpp"
#include "mobitrace/synth_oracle.hpp"
#include "mobitrace/trajectory_store.hpp"

using namespace mobitrace;

namespace {

Instant ts(long s) { return Instant{std::chrono::seconds{s}}; }

CdrRecord rec(const char* user, long t, double x, double y) { return {user, ts(t), {x, y}}; }

}  // namespace

TEST_CASE("build_trajectories groups per user") {
  const std::vector<CdrRecord> records{rec("a", 1, 0, 0), rec("b", 2, 1, 1), rec("a", 3, 2, 2)};
  const auto map = build_trajectories(records);
  REQUIRE(map.size() == 2);
  CHECK(map.at("a").size() == 2);
  CHECK(map.at("b").size() == 1);
  CHECK(map.at("a").user_id == "a");
}

TEST_CASE("points are sorted by time") {
  const std::vector<CdrRecord> records{rec("a", 10, 1, 0), rec("a", 5, 2, 0)};
  const auto map = build_trajectories(records);
  CHECK(map.at("a").points[0].t == ts(5));
  CHECK(map.at("a").points[1].t == ts(10));
}

TEST_CASE("equal timestamps keep input order") {
  const std::vector<CdrRecord> records{rec("a", 7, 1, 1), rec("a", 3, 0, 0), rec("a", 7, 2, 2)};
  const auto& pts = build_trajectories(records).at("a").points;
  CHECK(pts[1].pos == Position{1, 1});
  CHECK(pts[2].pos == Position{2, 2});
}

TEST_CASE("empty input yields an empty map") { CHECK(build_trajectories({}).empty()); }

TEST_CASE("grouping conserves records and ignores input order") {
  synth::PopulationSpec spec;
  spec.n_users = 40;
  spec.master_seed = 99;
  auto records = synth::gen_population(spec);
  const auto reference = build_trajectories(records);

  std::size_t total = 0;
  for (const auto& [user, traj] : reference) total += traj.size();
  CHECK(total == records.size());

  // Distinct timestamps per user make the result independent of input order.
  for (auto& [user, traj] : reference) {
    for (std::size_t i = 1; i < traj.size(); ++i) {
      if (traj.points[i].t == traj.points[i - 1].t) {
        // Drop users with ties; stability, not order-insensitivity, governs them.
        std::erase_if(records, [&u = user](const CdrRecord& r) { return r.user_id == u; });
        break;
      }
    }
  }
  const auto expected = build_trajectories(records);
  std::mt19937_64 rng(4);
  for (int round = 0; round < 5; ++round) {
    std::shuffle(records.begin(), records.end(), rng);
    CHECK(build_trajectories(records) == expected);
  }
}

TEST_CASE("prefix") {
  Trajectory t{"a", {}};
  for (int i = 0; i < 5; ++i) t.points.push_back({ts(i), {double(i), 0.0}});
  CHECK(prefix(t, 5) == t);
  const auto first = prefix(t, 1);
  REQUIRE(first.size() == 1);
  CHECK(first.points[0].pos == Position{0, 0});
  CHECK(first.user_id == "a");
  try {
    prefix(t, 0);
    FAIL("expected BadPrefix");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BadPrefix);
  }
  CHECK_THROWS_AS(prefix(t, 6), Error);
}

TEST_CASE("trajectory dump re-reads bit for bit") {
  synth::PopulationSpec spec;
  spec.n_users = 25;
  spec.commuter_fraction = 0.5;
  const auto map = build_trajectories(synth::gen_population(spec));
  std::stringstream buf;
  write_trajectory_dump(buf, map);
  CHECK(read_trajectory_dump(buf) == map);

  std::istringstream bad("user_id,t,x_km,y_km\na,2024-06-01T08:00:00Z,1,zz\n");
  CHECK_THROWS_AS(read_trajectory_dump(bad), Error);
}
