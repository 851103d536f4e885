#include "lbpm/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace lbpm {

std::vector<Marker> make_marker_grid(int nx, int ny, double dx, double dy,
                                     double x0, double y0, double z,
                                     int first_id) {
  std::vector<Marker> markers;
  markers.reserve(static_cast<size_t>(nx) * ny);
  int id = first_id;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      markers.push_back({id++, {x0 + i * dx, y0 + j * dy, z}});
  return markers;
}

namespace {

struct SegmentProfile {
  double speed0 = 0.0;   // speed at segment start
  double accel = 0.0;    // linear speed slope (ramp only)
  double yaw_rate = 0.0; // constant within a tick
  bool slalom = false;
  double peak_yaw_rate = 0.0;
  double wavelength = 0.0;
};

struct SegmentSpan {
  double t_begin = 0.0;
  double t_end = 0.0;
  SegmentProfile profile;
};

double segment_duration(const Segment& s) {
  return std::visit([](const auto& seg) { return seg.duration; }, s);
}

SegmentProfile segment_profile(const Segment& s) {
  SegmentProfile p;
  if (const auto* st = std::get_if<SegmentStandstill>(&s)) {
    (void)st;
  } else if (const auto* str = std::get_if<SegmentStraight>(&s)) {
    p.speed0 = str->speed;
  } else if (const auto* ramp = std::get_if<SegmentRamp>(&s)) {
    p.speed0 = ramp->speed_from;
    p.accel = (ramp->speed_to - ramp->speed_from) / ramp->duration;
  } else if (const auto* arc = std::get_if<SegmentArc>(&s)) {
    p.speed0 = arc->speed;
    p.yaw_rate = arc->yaw_rate;
  } else if (const auto* sl = std::get_if<SegmentSlalom>(&s)) {
    p.speed0 = sl->speed;
    p.slalom = true;
    p.peak_yaw_rate = sl->peak_yaw_rate;
    p.wavelength = sl->wavelength;
  }
  return p;
}

// State captured at a tick boundary; motion within the following tick uses
// the held speed profile and turn rate.
struct TickState {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;      // unwrapped
  double speed = 0.0;    // at t
  double accel = 0.0;    // speed slope over the tick
  double yaw_rate = 0.0; // held over the tick
};

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  double speed = 0.0;
};

// Advances a tick state by dt <= tick length with its held profile.
Pose advance(const TickState& s, double dt) {
  Pose p;
  p.speed = s.speed + s.accel * dt;
  const double ds = s.speed * dt + 0.5 * s.accel * dt * dt;
  if (std::abs(s.yaw_rate) < 1e-12) {
    p.x = s.x + ds * std::cos(s.yaw);
    p.y = s.y + ds * std::sin(s.yaw);
    p.yaw = s.yaw;
  } else {
    const double r = s.speed / s.yaw_rate;
    const double yaw1 = s.yaw + s.yaw_rate * dt;
    p.x = s.x + r * (std::sin(yaw1) - std::sin(s.yaw));
    p.y = s.y - r * (std::cos(yaw1) - std::cos(s.yaw));
    p.yaw = yaw1;
  }
  return p;
}

void validate(const ScenarioConfig& cfg) {
  if (cfg.imu_rate <= 0.0) throw InvalidConfig("imu_rate must be positive");
  if (cfg.lidar.rate <= 0.0) throw InvalidConfig("lidar_rate must be positive");
  if (cfg.lidar.returns_per_marker < 1)
    throw InvalidConfig("lidar_returns_per_marker must be at least 1");
  if (cfg.lidar.jitter_dt < 0.0 || cfg.lidar.block_dt < 0.0)
    throw InvalidConfig("lidar timing offsets must be non-negative");
  if (cfg.gravity <= 0.0) throw InvalidConfig("gravity must be positive");
  if (cfg.segments.empty()) throw InvalidConfig("segments: at least one required");
  if (!std::holds_alternative<SegmentStandstill>(cfg.segments.front()))
    throw InvalidConfig("segments: first segment must be a standstill");
  for (size_t i = 0; i < cfg.segments.size(); ++i) {
    if (segment_duration(cfg.segments[i]) <= 0.0)
      throw InvalidConfig("segments[" + std::to_string(i) +
                          "]: duration must be positive");
    if (const auto* sl = std::get_if<SegmentSlalom>(&cfg.segments[i]))
      if (sl->wavelength <= 0.0)
        throw InvalidConfig("segments[" + std::to_string(i) +
                            "]: slalom wavelength must be positive");
    if (const auto* rp = std::get_if<SegmentRamp>(&cfg.segments[i]))
      if (rp->speed_from < 0.0 || rp->speed_to < 0.0)
        throw InvalidConfig("segments[" + std::to_string(i) +
                            "]: ramp speeds must be non-negative");
  }
  if (cfg.markers.empty()) throw InvalidConfig("markers: at least one required");
  const double min_sep = PipelineConfig{}.cluster_distance;
  for (size_t i = 0; i < cfg.markers.size(); ++i)
    for (size_t j = i + 1; j < cfg.markers.size(); ++j) {
      const double d = std::hypot(cfg.markers[i].position.x - cfg.markers[j].position.x,
                                  cfg.markers[i].position.y - cfg.markers[j].position.y);
      if (d < min_sep)
        throw InvalidConfig("markers " + std::to_string(cfg.markers[i].id) +
                            " and " + std::to_string(cfg.markers[j].id) +
                            " closer than " + std::to_string(min_sep) + " m");
    }
}

class Trajectory {
 public:
  Trajectory(const ScenarioConfig& cfg) {
    double t = 0.0;
    for (const Segment& seg : cfg.segments) {
      SegmentSpan span;
      span.t_begin = t;
      span.t_end = t + segment_duration(seg);
      span.profile = segment_profile(seg);
      spans_.push_back(span);
      t = span.t_end;
    }
    duration_ = t;

    const double h = 1.0 / cfg.imu_rate;
    TickState s;
    s.t = 0.0;
    s.x = cfg.start_x;
    s.y = cfg.start_y;
    s.yaw = cfg.start_yaw;
    configure_tick(s);
    ticks_.push_back(s);
    const auto n_ticks = static_cast<size_t>(std::llround(duration_ / h));
    for (size_t k = 1; k <= n_ticks; ++k) {
      const TickState& prev = ticks_.back();
      const Pose p = advance(prev, h);
      TickState next;
      next.t = static_cast<double>(k) * h;
      next.x = p.x;
      next.y = p.y;
      next.yaw = p.yaw;
      configure_tick(next);
      ticks_.push_back(next);
    }
  }

  double duration() const { return duration_; }
  const std::vector<TickState>& ticks() const { return ticks_; }

  Pose pose_at(double t) const {
    auto it = std::upper_bound(ticks_.begin(), ticks_.end(), t,
                               [](double v, const TickState& s) { return v < s.t; });
    if (it == ticks_.begin()) return advance(ticks_.front(), 0.0);
    const TickState& base = *(it - 1);
    return advance(base, t - base.t);
  }

 private:
  const SegmentSpan& span_at(double t) const {
    for (const SegmentSpan& s : spans_)
      if (t < s.t_end) return s;
    return spans_.back();
  }

  // Fills speed/accel/yaw_rate of a tick from the segment active at its time.
  void configure_tick(TickState& s) const {
    const SegmentSpan& span = span_at(s.t);
    const SegmentProfile& p = span.profile;
    const double t_seg = s.t - span.t_begin;
    s.accel = p.accel;
    s.speed = p.speed0 + p.accel * t_seg;
    if (p.slalom) {
      // cosine keeps the integrated heading symmetric about the entry heading
      const double path = p.speed0 * t_seg;
      s.yaw_rate = p.peak_yaw_rate * std::cos(kTwoPi * path / p.wavelength);
    } else {
      s.yaw_rate = p.yaw_rate;
    }
  }

  std::vector<SegmentSpan> spans_;
  std::vector<TickState> ticks_;
  double duration_ = 0.0;
};

}  // namespace

SimulationOutput simulate(const ScenarioConfig& cfg) {
  validate(cfg);

  SimulationOutput out;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  auto noise = [&](double sigma) {
    return sigma > 0.0 ? sigma * unit_normal(rng) : 0.0;
  };

  const Trajectory traj(cfg);

  out.truth.samples.reserve(traj.ticks().size());
  out.imu.reserve(traj.ticks().size());
  const auto& ticks = traj.ticks();
  for (size_t k = 0; k < ticks.size(); ++k) {
    const auto& tick = ticks[k];
    TruthSample ts;
    ts.t = tick.t;
    ts.x = tick.x;
    ts.y = tick.y;
    ts.yaw = wrap_pi(tick.yaw);
    ts.speed = tick.speed;
    ts.yaw_rate = tick.yaw_rate;
    ts.ax = tick.accel * std::cos(tick.yaw) -
            tick.speed * tick.yaw_rate * std::sin(tick.yaw);
    ts.ay = tick.accel * std::sin(tick.yaw) +
            tick.speed * tick.yaw_rate * std::cos(tick.yaw);
    out.truth.samples.push_back(ts);

    // A sample reports the rates that acted over the interval ending at its
    // timestamp, matching how strapdown integration consumes it. The first
    // sample reuses the opening tick (a standstill by construction).
    const auto& held = ticks[k > 0 ? k - 1 : 0];
    ImuSample imu;
    imu.t = tick.t;
    // Specific force in the body frame: longitudinal slope, lateral
    // centripetal term, gravity on z.
    imu.accel = {held.accel + noise(cfg.noise.accel),
                 tick.speed * held.yaw_rate + noise(cfg.noise.accel),
                 cfg.gravity + noise(cfg.noise.accel)};
    imu.gyro = {noise(cfg.noise.gyro), noise(cfg.noise.gyro),
                held.yaw_rate + noise(cfg.noise.gyro)};
    out.imu.push_back(imu);
  }

  // One sweep fires all visible markers, each as a short block of returns;
  // block times are spaced so returns of different markers never interleave.
  const double sweep_dt = 1.0 / cfg.lidar.rate;
  for (double t_sweep = 0.0; t_sweep <= traj.duration() + 1e-12;
       t_sweep += sweep_dt) {
    const Pose pose = traj.pose_at(t_sweep);

    struct Visible {
      const Marker* marker;
      double azimuth;
    };
    std::vector<Visible> visible;
    for (const Marker& m : cfg.markers) {
      const double dx = m.position.x - pose.x;
      const double dy = m.position.y - pose.y;
      if (std::hypot(dx, dy) > cfg.lidar.max_range) continue;
      const double az = wrap_two_pi(std::atan2(dy, dx) - pose.yaw);
      visible.push_back({&m, az});
    }
    std::sort(visible.begin(), visible.end(),
              [](const Visible& a, const Visible& b) { return a.azimuth < b.azimuth; });

    const double block_span =
        (cfg.lidar.returns_per_marker - 1) * cfg.lidar.jitter_dt;
    const double block_step = block_span + cfg.lidar.block_dt;
    for (size_t j = 0; j < visible.size(); ++j) {
      for (int i = 0; i < cfg.lidar.returns_per_marker; ++i) {
        const double t_ret = t_sweep + j * block_step + i * cfg.lidar.jitter_dt;
        const Pose p = traj.pose_at(t_ret);
        const Marker& m = *visible[j].marker;
        const Vec2 rel =
            rotate2(-p.yaw, Vec2{m.position.x - p.x, m.position.y - p.y});
        double range = std::hypot(rel.x, rel.y) + noise(cfg.noise.range);
        double az = std::atan2(rel.y, rel.x) + noise(cfg.noise.azimuth);
        LidarReturn r;
        r.t = t_ret;
        r.position = {range * std::cos(az), range * std::sin(az), m.position.z};
        r.reflectivity = cfg.lidar.marker_reflectivity;
        out.lidar.push_back(r);
      }
    }

    if (cfg.lidar.clutter_per_sweep > 0) {
      std::uniform_real_distribution<double> u01(0.0, 1.0);
      const double span = std::max(visible.size() * block_step, sweep_dt * 0.2);
      for (int i = 0; i < cfg.lidar.clutter_per_sweep; ++i) {
        LidarReturn r;
        r.t = t_sweep + u01(rng) * span;
        const double range = 1.0 + u01(rng) * (cfg.lidar.max_range - 1.0);
        const double az = u01(rng) * kTwoPi;
        r.position = {range * std::cos(az), range * std::sin(az), 2.0 * u01(rng)};
        r.reflectivity = static_cast<int>(u01(rng) * 199.0);
        out.lidar.push_back(r);
      }
    }
  }
  std::stable_sort(out.lidar.begin(), out.lidar.end(),
                   [](const LidarReturn& a, const LidarReturn& b) { return a.t < b.t; });

  out.surveyed_markers = cfg.markers;
  for (Marker& m : out.surveyed_markers) {
    m.position.x += noise(cfg.noise.survey);
    m.position.y += noise(cfg.noise.survey);
  }

  return out;
}

namespace {

TruthSample interpolate_truth(const GroundTruth& truth, double t) {
  const auto& s = truth.samples;
  auto it = std::lower_bound(s.begin(), s.end(), t,
                             [](const TruthSample& a, double v) { return a.t < v; });
  if (it == s.begin()) return s.front();
  if (it == s.end()) return s.back();
  const TruthSample& b = *it;
  const TruthSample& a = *(it - 1);
  const double f = (t - a.t) / (b.t - a.t);
  TruthSample r;
  r.t = t;
  r.x = a.x + f * (b.x - a.x);
  r.y = a.y + f * (b.y - a.y);
  r.speed = a.speed + f * (b.speed - a.speed);
  r.yaw = wrap_pi(a.yaw + f * wrap_pi(b.yaw - a.yaw));
  return r;
}

class StatsAccumulator {
 public:
  void add(double v) {
    sum_ += v;
    sum_sq_ += v * v;
    max_ = std::max(max_, v);
    ++n_;
  }
  ErrorStats finish() const {
    ErrorStats s;
    s.count = n_;
    if (n_ == 0) return s;
    s.mean = sum_ / static_cast<double>(n_);
    const double var = sum_sq_ / static_cast<double>(n_) - s.mean * s.mean;
    s.std_dev = std::sqrt(std::max(var, 0.0));
    s.max = max_;
    return s;
  }

 private:
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
  double max_ = 0.0;
  std::size_t n_ = 0;
};

}  // namespace

ErrorReport evaluate(const std::vector<VehicleStateEstimate>& estimates,
                     const GroundTruth& truth) {
  if (estimates.empty()) throw EmptyEstimates("no estimates to evaluate");
  if (truth.samples.size() < 2)
    throw TimeRangeMismatch("ground truth needs at least two samples");

  const double t0 = truth.samples.front().t - 1e-9;
  const double t1 = truth.samples.back().t + 1e-9;

  StatsAccumulator speed, position, yaw;
  for (const VehicleStateEstimate& e : estimates) {
    if (e.t < t0 || e.t > t1)
      throw TimeRangeMismatch("estimate at t=" + std::to_string(e.t) +
                              " outside truth range [" + std::to_string(t0) +
                              ", " + std::to_string(t1) + "]");
    const TruthSample ref = interpolate_truth(truth, e.t);
    speed.add(std::abs(e.speed - ref.speed));
    position.add(std::hypot(e.x - ref.x, e.y - ref.y));
    yaw.add(std::abs(rad_to_deg(wrap_pi(e.yaw - ref.yaw))));
  }

  ErrorReport report;
  report.speed = speed.finish();
  report.position = position.finish();
  report.yaw_deg = yaw.finish();
  return report;
}

}  // namespace lbpm
