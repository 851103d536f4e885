#include "lbpm/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lbpm {

MarkerObservation make_observation(const Cluster& cluster, int marker_id) {
  MarkerObservation obs;
  obs.t = cluster.t;
  obs.marker_id = marker_id;
  obs.range = cluster.range;
  obs.azimuth = cluster.azimuth;
  obs.position = {cluster.position.x, cluster.position.y};
  return obs;
}

std::pair<double, double> cone_angles(const MarkerObservation& first,
                                      const MarkerObservation& second,
                                      double dt, double yaw_rate) {
  const double half_turn = 0.5 * dt * yaw_rate;
  const double a1 = first.azimuth;
  const double a2 = second.azimuth;
  const double v1 = (a1 <= kPi) ? a1 - half_turn : kTwoPi - a1 + half_turn;
  const double v2 = (a2 <= kPi) ? kPi - a2 - half_turn : a2 - kPi + half_turn;
  return {v1, v2};
}

double estimate_velocity(const MarkerObservation& first,
                         const MarkerObservation& second, double yaw_rate) {
  const double dt = second.t - first.t;
  if (dt == 0.0)
    throw SameTimestamp("velocity needs two distinct observation times");

  const double apex = wrap_pi(second.azimuth - first.azimuth + dt * yaw_rate);
  const double d1 = first.range;
  const double d2 = second.range;
  double radicand = d1 * d1 + d2 * d2 - 2.0 * d1 * d2 * std::cos(apex);
  if (radicand < 0.0) {
    if (radicand < -1e-9)
      throw NegativeDiscriminant("cosine-law radicand " +
                                 std::to_string(radicand) + " below guard");
    radicand = 0.0;
  }
  return std::sqrt(radicand) / std::abs(dt);
}

MotionDelta ctrv_delta(double speed, double yaw_rate, double dt) {
  MotionDelta delta;
  delta.dyaw = yaw_rate * dt;
  if (std::abs(yaw_rate) < kMinTurnRate) {
    delta.dx = speed * dt;
    delta.dy = 0.0;
    return delta;
  }
  const double radius = speed / yaw_rate;
  const double turn = yaw_rate * dt;
  delta.dx = radius * std::sin(turn);
  const double half = std::sin(0.5 * turn);
  delta.dy = radius * 2.0 * half * half;  // radius * (1 - cos(turn)), stable
  return delta;
}

std::pair<VehicleStateEstimate, VehicleStateEstimate> estimate_pose(
    const MarkerObservation& first, const MarkerObservation& second,
    const Marker& first_marker, const Marker& second_marker, double speed,
    double yaw_rate) {
  if (first.marker_id == second.marker_id)
    throw SameMarker("pose needs two different markers, both are " +
                     std::to_string(first.marker_id));
  const double dt = second.t - first.t;
  if (dt == 0.0)
    throw SameTimestamp("pose needs two distinct observation times");

  const MotionDelta delta = ctrv_delta(speed, yaw_rate, dt);

  // Second measurement carried into the first body frame.
  const Vec2 m1 = first.position;
  const Vec2 m2 = rotate2(delta.dyaw, second.position) + Vec2{delta.dx, delta.dy};

  const Vec2 baseline = m2 - m1;
  if (baseline.norm() < kMinPairSeparation)
    throw DegeneratePair("measured marker separation " +
                         std::to_string(baseline.norm()) + " m is degenerate");

  const Vec2 n1{first_marker.position.x, first_marker.position.y};
  const Vec2 n2{second_marker.position.x, second_marker.position.y};

  const double bearing_body = std::atan2(m2.y - m1.y, m2.x - m1.x);
  const double bearing_world = std::atan2(n2.y - n1.y, n2.x - n1.x);

  const double yaw1 = wrap_pi(bearing_world - bearing_body);
  const double yaw2 = wrap_pi(yaw1 + delta.dyaw);

  const Vec2 q1 = rotate2(yaw1, m1);
  const Vec2 q2 = rotate2(yaw1, m2);
  const Vec2 offset1 = n1 - q1;
  const Vec2 offset2 = n2 - q2;
  const Vec2 p1 = (offset1 + offset2) * 0.5;
  const double disagreement = (offset1 - offset2).norm();

  // The inter-observation displacement lives in the first body frame; it
  // rotates by the first yaw before it moves a world position.
  const Vec2 p2 = p1 + rotate2(yaw1, Vec2{delta.dx, delta.dy});

  VehicleStateEstimate e1;
  e1.t = first.t;
  e1.x = p1.x;
  e1.y = p1.y;
  e1.yaw = yaw1;
  e1.speed = std::abs(speed);
  e1.quality = EstimateQuality::FullPose;
  e1.pair_disagreement = disagreement;

  VehicleStateEstimate e2 = e1;
  e2.t = second.t;
  e2.x = p2.x;
  e2.y = p2.y;
  e2.yaw = yaw2;
  return {e1, e2};
}

PairEvents PairScheduler::push(const MarkerObservation& obs,
                               const Vec2& marker_position,
                               const YawDeltaFn& yaw_delta) {
  PairEvents events;

  // Velocity first, so a pose fix in the same push sees the fresh speed.
  auto& sightings = history_[obs.marker_id];
  while (!sightings.empty() &&
         obs.t - sightings.front().t > cfg_.velocity_max_dt)
    sightings.pop_front();

  const MarkerObservation* partner = nullptr;
  for (auto it = sightings.rbegin(); it != sightings.rend(); ++it) {
    if (obs.t - it->t >= cfg_.velocity_min_dt) {
      partner = &*it;
      break;  // youngest sighting old enough; min_dt = 0 pairs consecutively
    }
  }
  if (partner && obs.t > partner->t) {
    const double dt = obs.t - partner->t;
    const double rate = yaw_delta(partner->t, obs.t) / dt;
    const double speed = estimate_velocity(*partner, obs, rate);
    speed_ = speed;
    speed_time_ = obs.t;
    has_speed_ = true;
    events.velocity = VelocityFix{partner->t, obs.t, 0.5 * (partner->t + obs.t),
                                  speed};
  }
  sightings.push_back(obs);

  if (previous_ && previous_->obs.marker_id != obs.marker_id) {
    const double dt = obs.t - previous_->obs.t;
    const bool speed_ok =
        !cfg_.pose_requires_speed ||
        (has_speed_ && obs.t - speed_time_ <= cfg_.speed_max_age);
    if (dt > 0.0 && dt <= cfg_.pose_max_dt && speed_ok) {
      const double rate = yaw_delta(previous_->obs.t, obs.t) / dt;
      events.pose = [&] {
        const Marker m1{previous_->obs.marker_id,
                        {previous_->marker_position.x, previous_->marker_position.y, 0.0}};
        const Marker m2{obs.marker_id, {marker_position.x, marker_position.y, 0.0}};
        auto [e1, e2] = estimate_pose(previous_->obs, obs, m1, m2, speed_, rate);
        return PoseFix{e1, e2};
      }();
    }
  }
  previous_ = Sighting{obs, marker_position};
  return events;
}

}  // namespace lbpm
