#include "lbpm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>

namespace lbpm {

namespace {

// Gyro-integrated cumulative heading, piecewise linear between samples.
class YawHistory {
 public:
  void append(double t, double cumulative) { entries_.push_back({t, cumulative}); }

  double at(double t) const {
    if (entries_.empty()) return 0.0;
    if (t <= entries_.front().t) return entries_.front().yaw;
    if (t >= entries_.back().t) return entries_.back().yaw;
    const auto it = std::lower_bound(
        entries_.begin(), entries_.end(), t,
        [](const Entry& e, double v) { return e.t < v; });
    const Entry& b = *it;
    const Entry& a = *(it - 1);
    const double f = (t - a.t) / (b.t - a.t);
    return a.yaw + f * (b.yaw - a.yaw);
  }

  double delta(double t1, double t2) const { return at(t2) - at(t1); }

 private:
  struct Entry {
    double t;
    double yaw;
  };
  std::vector<Entry> entries_;
};

struct DrSample {
  double t;
  double x;
  double y;
  double yaw;
};

// Dead-reckoned pose track with a short interpolation history.
class DeadReckoner {
 public:
  DrSample state;

  void reset(double t, double x, double y, double yaw) {
    state = {t, x, y, wrap_pi(yaw)};
    history_.clear();
    history_.push_back(state);
  }

  void correct(double x, double y, double yaw) {
    state.x = x;
    state.y = y;
    state.yaw = wrap_pi(yaw);
    history_.push_back(state);
  }

  void advance(double t, double speed, const YawHistory& yaw_hist) {
    const double dt = t - state.t;
    if (dt <= 0.0) return;
    const double dyaw = yaw_hist.delta(state.t, t);
    const MotionDelta d = ctrv_delta(speed, dyaw / dt, dt);
    const Vec2 shift = rotate2(state.yaw, Vec2{d.dx, d.dy});
    state.t = t;
    state.x += shift.x;
    state.y += shift.y;
    state.yaw = wrap_pi(state.yaw + d.dyaw);
    history_.push_back(state);
    while (history_.size() > 2 && state.t - history_[1].t > kHistorySpan)
      history_.pop_front();
  }

  DrSample sample_at(double t) const {
    if (history_.empty()) return state;
    if (t <= history_.front().t) return history_.front();
    if (t >= history_.back().t) return history_.back();
    const auto it = std::upper_bound(
        history_.begin(), history_.end(), t,
        [](double v, const DrSample& s) { return v < s.t; });
    const DrSample& b = *it;
    const DrSample& a = *(it - 1);
    if (b.t <= a.t) return b;
    const double f = (t - a.t) / (b.t - a.t);
    DrSample r;
    r.t = t;
    r.x = a.x + f * (b.x - a.x);
    r.y = a.y + f * (b.y - a.y);
    r.yaw = wrap_pi(a.yaw + f * wrap_pi(b.yaw - a.yaw));
    return r;
  }

 private:
  static constexpr double kHistorySpan = 1.5;  // s kept for interpolation
  std::deque<DrSample> history_;
};

}  // namespace

RunResult run_estimate(const std::vector<ImuSample>& imu,
                       const std::vector<LidarReturn>& returns,
                       const MarkerLibrary& library, const RunOptions& options) {
  if (imu.empty()) throw NotAtStandstill("IMU stream is empty");

  // Initialization window: the leading standstill stretch of the stream.
  size_t init_end_idx = 0;
  while (init_end_idx + 1 < imu.size() &&
         imu[init_end_idx].t - imu.front().t < options.standstill.min_span)
    ++init_end_idx;
  const std::span<const ImuSample> window(imu.data(), init_end_idx + 1);
  OrientationTracker tracker =
      OrientationTracker::init_standstill(window, options.yaw0, options.standstill);
  const double t_init = tracker.last_time();

  RunResult result;

  const std::vector<LidarReturn> bright =
      filter_reflectivity(returns, options.pipeline);
  if (returns.empty())
    result.warnings.push_back("LiDAR log is empty; output is dead reckoning only");
  else if (bright.empty())
    result.warnings.push_back(
        "all LiDAR returns fall below the reflectivity threshold; output is "
        "dead reckoning only");

  std::vector<Cluster> clusters = cluster_by_time(bright, options.pipeline);
  std::erase_if(clusters, [&](const Cluster& c) { return c.t <= t_init; });
  result.stats.clusters = clusters.size();

  YawHistory yaw_hist;
  yaw_hist.append(t_init, 0.0);

  DeadReckoner dr;
  dr.reset(t_init, options.rough_x, options.rough_y, options.yaw0);

  PairScheduler scheduler(options.pairing);
  const auto yaw_delta = [&yaw_hist](double t1, double t2) {
    return yaw_hist.delta(t1, t2);
  };

  double cumulative_yaw = 0.0;
  double last_event_t = t_init;
  double last_row_t = -std::numeric_limits<double>::infinity();
  double anchor_time = std::numeric_limits<double>::infinity();
  size_t next_cluster = 0;

  auto emit_velocity_row = [&](const VelocityFix& fix) {
    const DrSample at_mid = dr.sample_at(fix.t_mid);
    VehicleStateEstimate row;
    row.t = fix.t_mid;
    row.x = at_mid.x;
    row.y = at_mid.y;
    row.yaw = at_mid.yaw;
    row.speed = fix.speed;
    row.quality = EstimateQuality::VelocityOnly;
    result.trajectory.push_back(row);
  };

  for (size_t i = init_end_idx + 1; i < imu.size(); ++i) {
    const ImuSample& sample = imu[i];
    const double yaw_before = tracker.yaw();
    tracker.gyro_update(sample);
    cumulative_yaw += wrap_pi(tracker.yaw() - yaw_before);
    yaw_hist.append(sample.t, cumulative_yaw);

    while (next_cluster < clusters.size() &&
           clusters[next_cluster].t <= sample.t) {
      const Cluster& cluster = clusters[next_cluster++];
      dr.advance(cluster.t, scheduler.current_speed(), yaw_hist);

      Marker marker;
      try {
        marker = identify(library,
                          RoughPose{dr.state.x, dr.state.y, dr.state.yaw},
                          cluster);
      } catch (const NoMarkerInRange&) {
        ++result.stats.no_match;
        continue;
      } catch (const AmbiguousMatch&) {
        ++result.stats.ambiguous;
        continue;
      }
      ++result.stats.identified;

      const MarkerObservation obs = make_observation(cluster, marker.id);
      const PairEvents events = scheduler.push(
          obs, Vec2{marker.position.x, marker.position.y}, yaw_delta);

      if (events.velocity) {
        ++result.stats.velocity_fixes;
        last_event_t = cluster.t;
        // Velocity rows carry a dead-reckoned pose; rows whose midpoint
        // precedes the first pose fix would read the unanchored prior.
        if (events.velocity->t_mid >= anchor_time)
          emit_velocity_row(*events.velocity);
      }
      if (events.pose) {
        ++result.stats.pose_fixes;
        last_event_t = cluster.t;
        const VehicleStateEstimate& fix = events.pose->at_second;
        dr.correct(fix.x, fix.y, fix.yaw);
        tracker.set_yaw(fix.yaw);
        VehicleStateEstimate row = fix;
        row.speed = scheduler.current_speed();
        result.trajectory.push_back(row);
        anchor_time = std::min(anchor_time, cluster.t);
      }
    }

    dr.advance(sample.t, scheduler.current_speed(), yaw_hist);

    if (sample.t - last_event_t >= options.dr_silence &&
        sample.t - last_row_t >= options.dr_row_period) {
      VehicleStateEstimate row;
      row.t = sample.t;
      row.x = dr.state.x;
      row.y = dr.state.y;
      row.yaw = dr.state.yaw;
      row.speed = scheduler.current_speed();
      row.quality = EstimateQuality::VelocityOnly;
      result.trajectory.push_back(row);
      last_row_t = sample.t;
    }
  }

  std::stable_sort(result.trajectory.begin(), result.trajectory.end(),
                   [](const VehicleStateEstimate& a, const VehicleStateEstimate& b) {
                     return a.t < b.t;
                   });
  return result;
}

}  // namespace lbpm
