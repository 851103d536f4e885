#pragma once

#include <span>
#include <stdexcept>

#include "lbpm/geometry.hpp"

namespace lbpm {

/// One IMU reading: body-frame specific force (gravity included) and
/// body-frame rotation rates.
struct ImuSample {
  double t = 0.0;   // seconds, strictly increasing within a stream
  Vec3 accel;       // m/s^2, body frame
  Vec3 gyro;        // rad/s, body frame
};

/// Horizontal-plane motion quantities derived from one IMU sample.
/// longitudinal/lateral split the over-ground acceleration along the
/// current vehicle yaw; roll/pitch rates do the same for the projected
/// rotation rate. Magnitudes are preserved by the split:
/// longitudinal^2 + lateral^2 equals the over-ground magnitude squared.
struct HorizontalMotion {
  double longitudinal_accel = 0.0;  // m/s^2
  double lateral_accel = 0.0;       // m/s^2
  double roll_rate = 0.0;           // rad/s
  double pitch_rate = 0.0;          // rad/s
  double yaw_rate = 0.0;            // rad/s, about the world z axis
  double vertical_accel = 0.0;      // m/s^2, gravity removed
};

class NotAtStandstill : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BadGravity : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonMonotonicTime : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StaleSample : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gates for accepting an initialization window as true standstill, plus
/// the sanity band for the measured gravity magnitude.
struct StandstillCriteria {
  double min_span = 1.0;        // s, required window length
  double max_gyro = 0.02;       // rad/s, per-sample absolute bound
  double max_gyro_std = 0.004;  // rad/s, per-axis standard deviation
  double max_accel_std = 0.05;  // m/s^2, per-axis standard deviation
  double min_gravity = 9.5;     // m/s^2
  double max_gravity = 10.1;    // m/s^2
};

// Maximum step the first-order gyro integration will accept.
inline constexpr double kMaxGyroStep = 0.1;  // s

/// Tracks the world (LTP) axes in vehicle body coordinates from IMU data.
///
/// The internal rotation matrix holds the world axes as columns, expressed
/// in the body frame, so world coordinates of a body vector are obtained
/// with the transpose. Initialization levels the frame from the averaged
/// standstill gravity vector; afterwards only the gyroscopes drive the
/// update, one first-order step per sample followed by re-orthonormalization.
class OrientationTracker {
 public:
  /// Builds a tracker from a standstill window. `yaw0` is the initial
  /// heading (rad, within +-45 deg of truth by caller contract).
  /// Throws NotAtStandstill or BadGravity when the window does not qualify.
  static OrientationTracker init_standstill(std::span<const ImuSample> window,
                                            double yaw0,
                                            const StandstillCriteria& crit = {});

  /// Advances the orientation by one gyro step. Throws NonMonotonicTime if
  /// the sample does not move time forward and StaleSample when the gap
  /// exceeds kMaxGyroStep (dropped data; re-initialize or flag degraded).
  void gyro_update(const ImuSample& sample);

  /// Projects one sample onto the horizontal plane. Gravity is removed from
  /// the world z component before the over-ground magnitudes are formed.
  HorizontalMotion project_motion(const ImuSample& sample) const;

  const Mat3& rotation() const { return r_; }
  double last_time() const { return t_last_; }
  double yaw() const { return yaw_; }
  double gravity() const { return gravity_; }

  Vec3 world_x_axis() const { return r_.col(0); }
  Vec3 world_y_axis() const { return r_.col(1); }
  Vec3 world_z_axis() const { return r_.col(2); }

  /// Replaces the dead-reckoned yaw with an external fix.
  void set_yaw(double yaw) { yaw_ = wrap_pi(yaw); }

 private:
  Mat3 r_;              // world axes in body coordinates (columns)
  double t_last_ = 0.0;
  double yaw_ = 0.0;
  double gravity_ = 9.81;
};

}  // namespace lbpm
