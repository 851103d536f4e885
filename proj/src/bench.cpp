#include "lbpm/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "lbpm/estimator.hpp"

namespace lbpm {

namespace {

struct Scene {
  MarkerObservation velocity_first;
  MarkerObservation velocity_second;
  MarkerObservation pose_first;
  MarkerObservation pose_second;
  Marker pose_marker_first;
  Marker pose_marker_second;
  double speed = 0.0;
  double yaw_rate = 0.0;
};

MarkerObservation observe(double t, int id, const Vec2& vehicle, double yaw,
                          const Vec2& marker) {
  const Vec2 rel = rotate2(-yaw, marker - vehicle);
  MarkerObservation obs;
  obs.t = t;
  obs.marker_id = id;
  obs.range = rel.norm();
  obs.azimuth = wrap_two_pi(std::atan2(rel.y, rel.x));
  obs.position = rel;
  return obs;
}

std::vector<Scene> make_pool(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  std::vector<Scene> pool;
  pool.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Scene s;
    s.speed = 1.0 + 10.0 * u01(rng);
    s.yaw_rate = -0.4 + 0.8 * u01(rng);
    const double yaw1 = -kPi + kTwoPi * u01(rng);
    const double dt = 0.05;

    const Vec2 p1{10.0 * u01(rng), 10.0 * u01(rng)};
    const MotionDelta d = ctrv_delta(s.speed, s.yaw_rate, dt);
    const Vec2 p2 = p1 + rotate2(yaw1, Vec2{d.dx, d.dy});
    const double yaw2 = yaw1 + d.dyaw;

    const double bearing = kTwoPi * u01(rng);
    const double dist = 5.0 + 8.0 * u01(rng);
    const Vec2 m{p1.x + dist * std::cos(bearing), p1.y + dist * std::sin(bearing)};
    s.velocity_first = observe(0.0, 1, p1, yaw1, m);
    s.velocity_second = observe(dt, 1, p2, yaw2, m);

    const double bearing2 = kTwoPi * u01(rng);
    const Vec2 m2{p2.x + dist * std::cos(bearing2), p2.y + dist * std::sin(bearing2)};
    s.pose_first = observe(0.0, 1, p1, yaw1, m);
    s.pose_second = observe(dt, 2, p2, yaw2, m2);
    s.pose_marker_first = Marker{1, {m.x, m.y, 1.0}};
    s.pose_marker_second = Marker{2, {m2.x, m2.y, 1.0}};
    pool.push_back(s);
  }
  return pool;
}

volatile double g_sink = 0.0;

BenchRow summarize(const std::string& name, std::vector<double>& samples_us) {
  BenchRow row;
  row.name = name;
  row.iterations = samples_us.size();
  if (samples_us.empty()) return row;
  std::sort(samples_us.begin(), samples_us.end());
  row.median_us = samples_us[samples_us.size() / 2];
  row.max_us = samples_us.back();
  double mean = 0.0;
  for (double v : samples_us) mean += v;
  mean /= static_cast<double>(samples_us.size());
  double var = 0.0;
  for (double v : samples_us) var += (v - mean) * (v - mean);
  row.std_us = std::sqrt(var / static_cast<double>(samples_us.size()));
  return row;
}

}  // namespace

std::vector<BenchRow> run_bench(std::size_t iterations, std::uint64_t seed) {
  const std::size_t pool_size = std::min<std::size_t>(iterations, 4096);
  const std::vector<Scene> pool = make_pool(pool_size, seed);

  using Clock = std::chrono::steady_clock;
  std::vector<double> velocity_us(iterations), pose_us(iterations),
      combined_us(iterations);

  for (std::size_t i = 0; i < iterations; ++i) {
    const Scene& s = pool[i % pool.size()];

    auto t0 = Clock::now();
    const double v = estimate_velocity(s.velocity_first, s.velocity_second,
                                       s.yaw_rate);
    auto t1 = Clock::now();
    g_sink = g_sink + v;
    velocity_us[i] =
        std::chrono::duration<double, std::micro>(t1 - t0).count();

    t0 = Clock::now();
    const auto pose = estimate_pose(s.pose_first, s.pose_second,
                                    s.pose_marker_first, s.pose_marker_second,
                                    s.speed, s.yaw_rate);
    t1 = Clock::now();
    g_sink = g_sink + pose.second.x;
    pose_us[i] = std::chrono::duration<double, std::micro>(t1 - t0).count();

    t0 = Clock::now();
    const double v2 = estimate_velocity(s.velocity_first, s.velocity_second,
                                        s.yaw_rate);
    const auto pose2 = estimate_pose(s.pose_first, s.pose_second,
                                     s.pose_marker_first, s.pose_marker_second,
                                     v2, s.yaw_rate);
    t1 = Clock::now();
    g_sink = g_sink + pose2.second.y;
    combined_us[i] =
        std::chrono::duration<double, std::micro>(t1 - t0).count();
  }

  std::vector<BenchRow> rows;
  rows.push_back(summarize("Velocity", velocity_us));
  rows.push_back(summarize("Pose", pose_us));
  rows.push_back(summarize("Combined", combined_us));
  return rows;
}

std::string bench_to_table(const std::vector<BenchRow>& rows) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-10s %12s %12s %12s %10s\n", "estimation",
                "median (us)", "std (us)", "max (us)", "count");
  out += buf;
  for (const BenchRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-10s %12.3f %12.3f %12.3f %10zu\n",
                  r.name.c_str(), r.median_us, r.std_us, r.max_us,
                  r.iterations);
    out += buf;
  }
  return out;
}

}  // namespace lbpm
