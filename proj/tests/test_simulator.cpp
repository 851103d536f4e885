#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "lbpm/io.hpp"
#include "lbpm/simulator.hpp"
#include "support/oracles.hpp"

using namespace lbpm;

namespace {

ScenarioConfig base_config() {
  ScenarioConfig cfg;
  cfg.imu_rate = 200.0;
  cfg.lidar.rate = 20.0;
  cfg.seed = 99;
  cfg.markers = {{1, {10.0, 2.0, 1.0}}, {2, {12.0, -2.0, 1.0}}};
  cfg.segments = {SegmentStandstill{1.5}};
  return cfg;
}

std::string serialize(const SimulationOutput& out) {
  std::ostringstream s;
  write_marker_csv(s, out.surveyed_markers);
  write_imu_csv(s, out.imu);
  write_lidar_csv(s, out.lidar);
  write_truth_csv(s, out.truth);
  return s.str();
}

}  // namespace

TEST_CASE("standstill produces pure gravity readings and a static truth") {
  const auto out = simulate(base_config());
  REQUIRE(!out.imu.empty());
  for (const ImuSample& s : out.imu) {
    CHECK(s.accel.x == 0.0);
    CHECK(s.accel.y == 0.0);
    CHECK(s.accel.z == doctest::Approx(9.81));
    CHECK(s.gyro.x == 0.0);
    CHECK(s.gyro.y == 0.0);
    CHECK(s.gyro.z == 0.0);
  }
  for (const TruthSample& t : out.truth.samples) {
    CHECK(t.x == 0.0);
    CHECK(t.y == 0.0);
    CHECK(t.speed == 0.0);
  }
}

TEST_CASE("ranges of a marker dead ahead shrink by the per-sweep travel") {
  ScenarioConfig cfg = base_config();
  cfg.markers = {{1, {14.0, 0.0, 1.0}}};
  cfg.segments = {SegmentStandstill{1.0}, SegmentStraight{2.0, 3.0}};
  cfg.lidar.returns_per_marker = 1;
  const auto out = simulate(cfg);

  // one return per sweep; compare consecutive sweeps during the straight leg
  std::vector<double> ranges;
  std::vector<double> times;
  for (const LidarReturn& r : out.lidar) {
    if (r.t < 1.0 + 0.1 || r.t > 3.9) continue;
    ranges.push_back(std::hypot(r.position.x, r.position.y));
    times.push_back(r.t);
  }
  REQUIRE(ranges.size() > 10);
  for (size_t i = 1; i < ranges.size(); ++i) {
    CHECK(times[i] - times[i - 1] == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(ranges[i - 1] - ranges[i] == doctest::Approx(2.0 / 20.0).epsilon(1e-9));
  }
}

TEST_CASE("arc truth follows the closed-form circle") {
  ScenarioConfig cfg = base_config();
  cfg.markers = {{1, {30.0, 2.0, 1.0}}};
  const double speed = 3.0;
  const double yaw_rate = 0.4;
  cfg.segments = {SegmentStandstill{1.0}, SegmentArc{speed, yaw_rate, 6.0}};
  const auto out = simulate(cfg);

  const double radius = speed / yaw_rate;
  // arc starts at the origin heading +x: circle center sits at (0, radius)
  for (const TruthSample& t : out.truth.samples) {
    if (t.t <= 1.0 + 1e-12) continue;
    const double dt = t.t - 1.0;
    CHECK(wrap_pi(t.yaw - wrap_pi(yaw_rate * dt)) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::hypot(t.x - 0.0, t.y - radius) ==
          doctest::Approx(radius).epsilon(1e-12));
    CHECK(t.speed == doctest::Approx(speed));
    CHECK(t.yaw_rate == doctest::Approx(yaw_rate));
  }
}

TEST_CASE("slalom truth is kinematically consistent") {
  ScenarioConfig cfg = base_config();
  cfg.markers = {{1, {40.0, 5.0, 1.0}}};
  cfg.segments = {SegmentStandstill{1.0}, SegmentSlalom{2.0, 0.3, 20.0, 8.0}};
  const auto out = simulate(cfg);

  // finite differences of yaw match the held turn rate of each tick
  const auto& s = out.truth.samples;
  const double h = 1.0 / cfg.imu_rate;
  for (size_t i = 1; i < s.size(); ++i) {
    const double dyaw = wrap_pi(s[i].yaw - s[i - 1].yaw);
    CHECK(dyaw == doctest::Approx(s[i - 1].yaw_rate * h).epsilon(1e-9));
    const double step = std::hypot(s[i].x - s[i - 1].x, s[i].y - s[i - 1].y);
    CHECK(step <= s[i - 1].speed * h + 1e-12);
    CHECK(step >= s[i - 1].speed * h * 0.999 - 1e-12);
  }
}

TEST_CASE("simulation is deterministic for a fixed seed") {
  ScenarioConfig cfg = base_config();
  cfg.noise = {0.02, 0.002, 0.02, deg_to_rad(0.1), 0.02};
  cfg.segments = {SegmentStandstill{1.0}, SegmentStraight{2.0, 2.0}};
  const std::string a = serialize(simulate(cfg));
  const std::string b = serialize(simulate(cfg));
  CHECK(a == b);

  cfg.seed = 100;
  const std::string c = serialize(simulate(cfg));
  CHECK(a != c);
}

TEST_CASE("noiseless returns land on the emitting marker") {
  ScenarioConfig cfg = base_config();
  cfg.markers = {{1, {12.0, 2.0, 1.0}}, {2, {18.0, -1.0, 1.0}},
                 {3, {26.0, 3.0, 1.0}}};
  cfg.segments = {SegmentStandstill{1.0}, SegmentStraight{2.5, 8.0}};
  const auto out = simulate(cfg);
  REQUIRE(!out.lidar.empty());

  // constant-speed straight legs make the truth exactly linear between
  // samples, so interpolation at the return time is exact
  for (const LidarReturn& r : out.lidar) {
    const auto& ts = out.truth.samples;
    auto it = std::lower_bound(
        ts.begin(), ts.end(), r.t,
        [](const TruthSample& a, double v) { return a.t < v; });
    if (it == ts.begin()) ++it;  // return at the very first sample time
    if (it == ts.end()) continue;  // trailing block of the final sweep
    const TruthSample& b = *it;
    const TruthSample& a = *(it - 1);
    const double f = (r.t - a.t) / (b.t - a.t);
    const double x = a.x + f * (b.x - a.x);
    const double y = a.y + f * (b.y - a.y);
    const double yaw = a.yaw + f * wrap_pi(b.yaw - a.yaw);

    const Vec2 world =
        rotate2(yaw, Vec2{r.position.x, r.position.y}) + Vec2{x, y};
    double best = 1e18;
    for (const Marker& m : cfg.markers)
      best = std::min(best, std::hypot(world.x - m.position.x,
                                       world.y - m.position.y));
    CHECK(best < 1e-12);
  }
}

TEST_CASE("returns are time sorted and marker blocks stay contiguous") {
  ScenarioConfig cfg = base_config();
  cfg.markers = make_marker_grid(4, 2, 3.0, 4.0, 6.0, -2.0);
  cfg.segments = {SegmentStandstill{1.0}, SegmentStraight{1.5, 4.0}};
  const auto out = simulate(cfg);
  REQUIRE(!out.lidar.empty());

  for (size_t i = 1; i < out.lidar.size(); ++i)
    CHECK(out.lidar[i].t >= out.lidar[i - 1].t);

  // within one sweep, consecutive returns either sit on the same target
  // (sub-centimeter apart) or jump to the next block
  size_t close_pairs = 0, jumps = 0;
  for (size_t i = 1; i < out.lidar.size(); ++i) {
    if (out.lidar[i].t - out.lidar[i - 1].t > 0.01) continue;  // sweep gap
    const double d = std::hypot(
        out.lidar[i].position.x - out.lidar[i - 1].position.x,
        out.lidar[i].position.y - out.lidar[i - 1].position.y);
    if (d < 0.05)
      ++close_pairs;
    else
      ++jumps;
  }
  // three returns per block: two close pairs per block, one jump between
  // blocks; interleaving would flip that balance
  CHECK(close_pairs > jumps);
}

TEST_CASE("survey noise perturbs the shipped library, not the scene") {
  ScenarioConfig cfg = base_config();
  cfg.noise.survey = 0.02;
  const auto out = simulate(cfg);
  REQUIRE(out.surveyed_markers.size() == cfg.markers.size());
  double total_shift = 0.0;
  for (size_t i = 0; i < cfg.markers.size(); ++i) {
    CHECK(out.surveyed_markers[i].id == cfg.markers[i].id);
    total_shift += std::hypot(
        out.surveyed_markers[i].position.x - cfg.markers[i].position.x,
        out.surveyed_markers[i].position.y - cfg.markers[i].position.y);
  }
  CHECK(total_shift > 0.0);
  CHECK(total_shift / cfg.markers.size() < 0.1);
}

TEST_CASE("clutter stays below the reflectivity threshold") {
  ScenarioConfig cfg = base_config();
  cfg.lidar.clutter_per_sweep = 5;
  const auto out = simulate(cfg);
  size_t clutter = 0;
  for (const LidarReturn& r : out.lidar)
    if (r.reflectivity < 200) {
      ++clutter;
      CHECK(r.reflectivity >= 0);
    }
  CHECK(clutter > 0);
}

TEST_CASE("config validation names the offending field") {
  ScenarioConfig cfg = base_config();
  cfg.imu_rate = 0.0;
  CHECK_THROWS_WITH_AS(simulate(cfg), "imu_rate must be positive", InvalidConfig);

  cfg = base_config();
  cfg.segments = {SegmentStraight{2.0, 5.0}};
  CHECK_THROWS_AS(simulate(cfg), InvalidConfig);

  cfg = base_config();
  cfg.segments = {SegmentStandstill{1.0}, SegmentArc{2.0, 0.3, -1.0}};
  CHECK_THROWS_AS(simulate(cfg), InvalidConfig);

  cfg = base_config();
  cfg.markers = {{1, {10, 0, 1}}, {2, {10.2, 0, 1}}};
  CHECK_THROWS_AS(simulate(cfg), InvalidConfig);

  cfg = base_config();
  cfg.markers.clear();
  CHECK_THROWS_AS(simulate(cfg), InvalidConfig);
}

TEST_CASE("grid generator spaces markers on the requested lattice") {
  const auto grid = make_marker_grid(3, 2, 4.0, 5.0, 10.0, -2.0, 1.5, 7);
  REQUIRE(grid.size() == 6);
  CHECK(grid[0].id == 7);
  CHECK(grid[5].id == 12);
  CHECK(grid[0].position.x == 10.0);
  CHECK(grid[4].position.x == 14.0);
  CHECK(grid[4].position.y == 3.0);
  CHECK(grid[4].position.z == 1.5);
}

TEST_CASE("evaluation of exact estimates is all zeros") {
  ScenarioConfig cfg = base_config();
  cfg.segments = {SegmentStandstill{1.0}, SegmentStraight{2.0, 3.0}};
  const auto out = simulate(cfg);

  std::vector<VehicleStateEstimate> estimates;
  for (size_t i = 0; i < out.truth.samples.size(); i += 7) {
    const TruthSample& t = out.truth.samples[i];
    estimates.push_back({t.t, t.x, t.y, t.yaw, t.speed,
                         EstimateQuality::FullPose, 0.0});
  }
  const ErrorReport report = evaluate(estimates, out.truth);
  CHECK(report.position.mean == 0.0);
  CHECK(report.position.max == 0.0);
  CHECK(report.speed.mean == 0.0);
  CHECK(report.yaw_deg.mean == 0.0);
  CHECK(report.position.count == estimates.size());
}

TEST_CASE("a single offset estimate shows up as mean and max") {
  ScenarioConfig cfg = base_config();
  const auto out = simulate(cfg);
  const TruthSample& t = out.truth.samples[10];
  const std::vector<VehicleStateEstimate> estimates{
      {t.t, t.x + 0.03, t.y + 0.04, t.yaw, t.speed, EstimateQuality::FullPose,
       0.0}};
  const ErrorReport report = evaluate(estimates, out.truth);
  CHECK(report.position.mean == doctest::Approx(0.05));
  CHECK(report.position.max == doctest::Approx(0.05));
  CHECK(report.position.std_dev == doctest::Approx(0.0));
}

TEST_CASE("evaluation statistics agree with an independent pass") {
  ScenarioConfig cfg = base_config();
  cfg.segments = {SegmentStandstill{1.0}, SegmentStraight{2.0, 4.0}};
  const auto out = simulate(cfg);

  std::mt19937_64 rng(71);
  std::normal_distribution<double> n(0.0, 0.05);
  std::vector<VehicleStateEstimate> estimates;
  std::vector<double> pos_err, v_err, yaw_err;
  for (size_t i = 5; i < out.truth.samples.size(); i += 3) {
    const TruthSample& t = out.truth.samples[i];
    const double dx = n(rng), dy = n(rng), dv = n(rng), dyaw = 0.01 * n(rng);
    estimates.push_back({t.t, t.x + dx, t.y + dy, wrap_pi(t.yaw + dyaw),
                         std::abs(t.speed + dv), EstimateQuality::FullPose, 0.0});
    pos_err.push_back(std::hypot(dx, dy));
    v_err.push_back(std::abs(std::abs(t.speed + dv) - t.speed));
    yaw_err.push_back(std::abs(rad_to_deg(dyaw)));
  }
  const ErrorReport report = evaluate(estimates, out.truth);
  const auto pos = oracle::two_pass_stats(pos_err);
  const auto vel = oracle::two_pass_stats(v_err);
  const auto yaw = oracle::two_pass_stats(yaw_err);
  CHECK(report.position.mean == doctest::Approx(pos.mean).epsilon(1e-9));
  CHECK(report.position.std_dev == doctest::Approx(pos.std_dev).epsilon(1e-9));
  CHECK(report.position.max == doctest::Approx(pos.max).epsilon(1e-9));
  CHECK(report.speed.mean == doctest::Approx(vel.mean).epsilon(1e-9));
  CHECK(report.speed.std_dev == doctest::Approx(vel.std_dev).epsilon(1e-9));
  CHECK(report.yaw_deg.mean == doctest::Approx(yaw.mean).epsilon(1e-9));
  CHECK(report.yaw_deg.max == doctest::Approx(yaw.max).epsilon(1e-9));
}

TEST_CASE("evaluation rejects empty and out-of-range estimates") {
  const auto out = simulate(base_config());
  CHECK_THROWS_AS(evaluate({}, out.truth), EmptyEstimates);
  const std::vector<VehicleStateEstimate> late{
      {out.truth.samples.back().t + 1.0, 0, 0, 0, 0,
       EstimateQuality::FullPose, 0.0}};
  CHECK_THROWS_AS(evaluate(late, out.truth), TimeRangeMismatch);
}

TEST_CASE("report serialization carries the table structure") {
  ErrorReport report;
  report.speed = {0.08, 0.1, 0.57, 100};
  report.position = {0.03, 0.02, 0.10, 100};
  report.yaw_deg = {0.19, 0.2, 0.86, 100};
  const std::string csv = report_to_csv(report);
  CHECK(csv.find("quantity,unit,mean,std,max,count") == 0);
  CHECK(csv.find("velocity,m/s,0.080000,0.100000,0.570000,100") !=
        std::string::npos);
  CHECK(csv.find("position,m,0.030000") != std::string::npos);
  CHECK(csv.find("yaw,deg,0.190000") != std::string::npos);
  const std::string table = report_to_table(report);
  CHECK(table.find("mean") != std::string::npos);
  CHECK(table.find("velocity") != std::string::npos);
}
