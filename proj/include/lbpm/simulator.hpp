#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lbpm/estimator.hpp"
#include "lbpm/horizontation.hpp"
#include "lbpm/marker_map.hpp"
#include "lbpm/pointcloud.hpp"

namespace lbpm {

struct SegmentStandstill {
  double duration = 0.0;
};

struct SegmentStraight {
  double speed = 0.0;
  double duration = 0.0;
};

/// Straight segment with linearly changing speed.
struct SegmentRamp {
  double speed_from = 0.0;
  double speed_to = 0.0;
  double duration = 0.0;
};

struct SegmentArc {
  double speed = 0.0;
  double yaw_rate = 0.0;  // rad/s, CCW positive
  double duration = 0.0;
};

/// Constant speed with the turn rate modulated sinusoidally along the path:
/// yaw_rate(s) = peak_yaw_rate * cos(2*pi*s / wavelength), held constant
/// within each IMU tick. The heading swings symmetrically about the entry
/// heading with amplitude peak_yaw_rate * wavelength / (2*pi*speed).
struct SegmentSlalom {
  double speed = 0.0;
  double peak_yaw_rate = 0.0;  // rad/s
  double wavelength = 0.0;     // m along the path
  double duration = 0.0;
};

using Segment = std::variant<SegmentStandstill, SegmentStraight, SegmentRamp,
                             SegmentArc, SegmentSlalom>;

struct NoiseConfig {
  double accel = 0.0;    // m/s^2, per-sample
  double gyro = 0.0;     // rad/s, per-sample
  double range = 0.0;    // m, per-return
  double azimuth = 0.0;  // rad, per-return
  double survey = 0.0;   // m, per marker library entry
};

struct LidarModel {
  double rate = 20.0;           // Hz, sweep rate
  double max_range = 16.0;      // m, horizontal visibility
  int returns_per_marker = 3;
  double block_dt = 1e-4;       // s between marker blocks within a sweep
  double jitter_dt = 5e-5;      // s between returns of one marker
  int clutter_per_sweep = 0;    // low-reflectivity noise points
  int marker_reflectivity = 255;
};

struct ScenarioConfig {
  std::vector<Marker> markers;    // true surveyed positions
  std::vector<Segment> segments;  // first must be a standstill
  double imu_rate = 500.0;        // Hz
  LidarModel lidar;
  NoiseConfig noise;
  double gravity = 9.81;          // m/s^2
  std::uint64_t seed = 1;
  double start_x = 0.0;           // m, world frame
  double start_y = 0.0;           // m, world frame
  double start_yaw = 0.0;         // rad
};

/// Convenience grid layout, row-major ids starting at first_id.
std::vector<Marker> make_marker_grid(int nx, int ny, double dx, double dy,
                                     double x0, double y0, double z = 1.0,
                                     int first_id = 1);

struct TruthSample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;       // rad, wrapped
  double speed = 0.0;     // m/s
  double yaw_rate = 0.0;  // rad/s
  double ax = 0.0;        // m/s^2, world frame
  double ay = 0.0;        // m/s^2, world frame
};

struct GroundTruth {
  std::vector<TruthSample> samples;
};

struct SimulationOutput {
  GroundTruth truth;
  std::vector<ImuSample> imu;
  std::vector<LidarReturn> lidar;
  std::vector<Marker> surveyed_markers;  // perturbed copies for the library
};

class InvalidConfig : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyEstimates : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TimeRangeMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Generates ground truth and synthetic sensor streams. Deterministic for a
/// fixed config and seed. Throws InvalidConfig with field-level messages.
SimulationOutput simulate(const ScenarioConfig& config);

struct ErrorStats {
  double mean = 0.0;
  double std_dev = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

/// Absolute-error statistics of estimates against linearly interpolated
/// ground truth: speed in m/s, horizontal position in m (Euclidean), yaw in
/// degrees (wrapped difference).
struct ErrorReport {
  ErrorStats speed;
  ErrorStats position;
  ErrorStats yaw_deg;
};

ErrorReport evaluate(const std::vector<VehicleStateEstimate>& estimates,
                     const GroundTruth& truth);

}  // namespace lbpm
