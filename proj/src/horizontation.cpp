#include "lbpm/horizontation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lbpm {

namespace {

struct WindowStats {
  Vec3 accel_mean;
  Vec3 gyro_mean;
  Vec3 accel_std;
  Vec3 gyro_std;
  double max_abs_gyro = 0.0;
};

WindowStats window_stats(std::span<const ImuSample> window) {
  WindowStats s;
  const double n = static_cast<double>(window.size());
  for (const ImuSample& smp : window) {
    s.accel_mean = s.accel_mean + smp.accel;
    s.gyro_mean = s.gyro_mean + smp.gyro;
    s.max_abs_gyro = std::max({s.max_abs_gyro, std::abs(smp.gyro.x),
                               std::abs(smp.gyro.y), std::abs(smp.gyro.z)});
  }
  s.accel_mean = s.accel_mean / n;
  s.gyro_mean = s.gyro_mean / n;

  Vec3 av, gv;
  for (const ImuSample& smp : window) {
    const Vec3 da = smp.accel - s.accel_mean;
    const Vec3 dg = smp.gyro - s.gyro_mean;
    av = av + Vec3{da.x * da.x, da.y * da.y, da.z * da.z};
    gv = gv + Vec3{dg.x * dg.x, dg.y * dg.y, dg.z * dg.z};
  }
  s.accel_std = {std::sqrt(av.x / n), std::sqrt(av.y / n), std::sqrt(av.z / n)};
  s.gyro_std = {std::sqrt(gv.x / n), std::sqrt(gv.y / n), std::sqrt(gv.z / n)};
  return s;
}

}  // namespace

OrientationTracker OrientationTracker::init_standstill(
    std::span<const ImuSample> window, double yaw0,
    const StandstillCriteria& crit) {
  if (window.size() < 2)
    throw NotAtStandstill("standstill window has fewer than 2 samples");
  const double span = window.back().t - window.front().t;
  if (span + 1e-9 < crit.min_span)
    throw NotAtStandstill("standstill window spans " + std::to_string(span) +
                          " s, need " + std::to_string(crit.min_span) + " s");

  const WindowStats s = window_stats(window);
  if (s.max_abs_gyro > crit.max_gyro)
    throw NotAtStandstill("rotation rate " + std::to_string(s.max_abs_gyro) +
                          " rad/s exceeds standstill bound");
  if (std::max({s.gyro_std.x, s.gyro_std.y, s.gyro_std.z}) > crit.max_gyro_std)
    throw NotAtStandstill("gyro spread exceeds standstill bound");
  if (std::max({s.accel_std.x, s.accel_std.y, s.accel_std.z}) > crit.max_accel_std)
    throw NotAtStandstill("accelerometer spread exceeds standstill bound");

  const Vec3 a = s.accel_mean;
  const double g = a.norm();
  if (g < crit.min_gravity || g > crit.max_gravity)
    throw BadGravity("gravity magnitude " + std::to_string(g) +
                     " m/s^2 outside [" + std::to_string(crit.min_gravity) +
                     ", " + std::to_string(crit.max_gravity) + "]");

  // Leveling rotation: angle between the measured gravity direction and the
  // body z axis, about their common normal.
  double cos_inc = a.z / g;
  cos_inc = std::clamp(cos_inc, -1.0, 1.0);
  const double incline = std::acos(cos_inc);
  const Vec3 axis{a.y, -a.x, 0.0};

  const Mat3 leveling = axis_angle_matrix(axis, incline);
  const Mat3 r = (yaw_matrix(yaw0) * leveling).transposed();

  // The leveled frame must see the averaged gravity straight up.
  const Vec3 up_check = r.transposed() * (a / g);
  if (std::abs(up_check.x) > 1e-9 || std::abs(up_check.y) > 1e-9 ||
      std::abs(up_check.z - 1.0) > 1e-9)
    throw NotAtStandstill("leveling self-check failed");

  OrientationTracker tracker;
  tracker.r_ = r;
  tracker.t_last_ = window.back().t;
  tracker.yaw_ = wrap_pi(yaw0);
  tracker.gravity_ = g;
  return tracker;
}

void OrientationTracker::gyro_update(const ImuSample& sample) {
  const double dt = sample.t - t_last_;
  if (dt <= 0.0)
    throw NonMonotonicTime("gyro sample at t=" + std::to_string(sample.t) +
                           " does not advance past t=" + std::to_string(t_last_));
  if (dt > kMaxGyroStep)
    throw StaleSample("gyro gap of " + std::to_string(dt) +
                      " s exceeds max step " + std::to_string(kMaxGyroStep));

  const Mat3 step = skew(sample.gyro).transposed() * dt + Mat3::identity();
  r_ = orthonormalize(step * r_);

  const Vec3 world_rate = r_.transposed() * sample.gyro;
  yaw_ = wrap_pi(yaw_ + dt * world_rate.z);
  t_last_ = sample.t;
}

HorizontalMotion OrientationTracker::project_motion(const ImuSample& sample) const {
  const Vec3 accel_world = r_.transposed() * sample.accel;
  const Vec3 rate_world = r_.transposed() * sample.gyro;

  // Static gravity sits in the world z component; remove it so the
  // over-ground magnitude is not contaminated.
  const Vec3 accel_dyn{accel_world.x, accel_world.y, accel_world.z - gravity_};

  const double accel_og = std::hypot(accel_dyn.x, accel_dyn.y);
  const double accel_dir = std::atan2(accel_dyn.y, accel_dyn.x);
  const double rate_og = std::hypot(rate_world.x, rate_world.y);
  const double rate_dir = std::atan2(rate_world.y, rate_world.x);

  const double d_accel = wrap_pi(accel_dir - yaw_);
  const double d_rate = wrap_pi(rate_dir - yaw_);

  HorizontalMotion motion;
  motion.longitudinal_accel = accel_og * std::cos(d_accel);
  motion.lateral_accel = accel_og * std::sin(d_accel);
  motion.roll_rate = rate_og * std::cos(d_rate);
  motion.pitch_rate = rate_og * std::sin(d_rate);
  motion.yaw_rate = rate_world.z;
  motion.vertical_accel = accel_dyn.z;
  return motion;
}

}  // namespace lbpm
