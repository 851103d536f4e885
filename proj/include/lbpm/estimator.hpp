#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lbpm/geometry.hpp"
#include "lbpm/marker_map.hpp"
#include "lbpm/pointcloud.hpp"

namespace lbpm {

// Below this turn rate the motion update uses the straight-line limit.
inline constexpr double kMinTurnRate = 1e-6;  // rad/s
// Marker pairs whose measured horizontal separation falls below this are
// rejected as ill-conditioned for orientation recovery.
inline constexpr double kMinPairSeparation = 1e-6;  // m

/// One identified marker sighting in the body frame at time t.
/// azimuth is measured CCW from the body x axis, in [0, 2*pi).
struct MarkerObservation {
  double t = 0.0;
  int marker_id = 0;
  double range = 0.0;    // m, horizontal
  double azimuth = 0.0;  // rad
  Vec2 position;         // m, body frame, consistent with (range, azimuth)
};

/// Builds an observation from an identified cluster.
MarkerObservation make_observation(const Cluster& cluster, int marker_id);

enum class EstimateQuality { VelocityOnly, FullPose };

struct VehicleStateEstimate {
  double t = 0.0;
  double x = 0.0;        // m, world frame
  double y = 0.0;        // m, world frame
  double yaw = 0.0;      // rad, wrapped to (-pi, pi]
  double speed = 0.0;    // m/s, over ground, >= 0
  EstimateQuality quality = EstimateQuality::VelocityOnly;
  // Disagreement (m) between the two per-marker position offsets of a full
  // pose fix; 0 for velocity-only estimates. Diagnostic, not a gate.
  double pair_disagreement = 0.0;
};

/// Planar displacement over one interval under constant speed and turn
/// rate, expressed in the body frame at the interval start.
struct MotionDelta {
  double dx = 0.0;    // m
  double dy = 0.0;    // m
  double dyaw = 0.0;  // rad
};

class SameTimestamp : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NegativeDiscriminant : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SameMarker : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegeneratePair : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Interior angles of the triangle formed by two sightings of one marker
/// and the chord driven between them. The chord of a constant-turn arc
/// bisects the heading change, hence the half-turn corrections. Signs
/// follow the right-hand rule with CCW positive.
std::pair<double, double> cone_angles(const MarkerObservation& first,
                                      const MarkerObservation& second,
                                      double dt, double yaw_rate);

/// Speed over ground from two sightings of the same marker. The apex angle
/// at the marker equals the change in world bearing,
/// wrap(azimuth2 - azimuth1 + dt * yaw_rate), and the cosine law gives the
/// chord length; speed is chord over elapsed time. Throws SameTimestamp
/// when the observations coincide in time and NegativeDiscriminant when the
/// cosine-law radicand is more negative than the floating-point guard.
double estimate_velocity(const MarkerObservation& first,
                         const MarkerObservation& second, double yaw_rate);

/// Constant-turn displacement over dt. Below kMinTurnRate the straight-line
/// limit (speed*dt, 0, yaw_rate*dt) applies; the two branches are continuous
/// at the switch. dt may be negative (backward extrapolation).
MotionDelta ctrv_delta(double speed, double yaw_rate, double dt);

/// Full pose from two sightings of two different markers. The second
/// measurement is carried into the first body frame with the constant-turn
/// displacement, the marker-pair bearing mismatch between frames gives the
/// yaw, and the surveyed positions anchor the translation (averaged over
/// both markers). Returns the estimates at the first and second observation
/// times. Throws SameMarker, SameTimestamp or DegeneratePair.
std::pair<VehicleStateEstimate, VehicleStateEstimate> estimate_pose(
    const MarkerObservation& first, const MarkerObservation& second,
    const Marker& first_marker, const Marker& second_marker, double speed,
    double yaw_rate);

/// Heading change lookup: yaw_delta(t1, t2) returns the gyro-integrated
/// heading change from t1 to t2 (unwrapped).
using YawDeltaFn = std::function<double(double, double)>;

struct PairingConfig {
  double velocity_min_dt = 0.0;   // s, youngest usable same-marker pair
  double velocity_max_dt = 0.3;   // s, oldest usable same-marker pair
  double pose_max_dt = 0.25;      // s, oldest usable distinct-marker pair
  double speed_max_age = 0.5;     // s, freshness required of the speed fix
  bool pose_requires_speed = true;
};

struct VelocityFix {
  double t_first = 0.0;
  double t_second = 0.0;
  double t_mid = 0.0;
  double speed = 0.0;
};

struct PoseFix {
  VehicleStateEstimate at_first;
  VehicleStateEstimate at_second;
};

struct PairEvents {
  std::optional<VelocityFix> velocity;
  std::optional<PoseFix> pose;
};

/// Sliding-window pairing of identified observations. Each new sighting is
/// paired with the previous sighting of the same marker for a velocity fix
/// and with the immediately preceding sighting of a different marker for a
/// pose fix. The most recent velocity fix feeds the pose translation.
class PairScheduler {
 public:
  explicit PairScheduler(PairingConfig cfg = {}) : cfg_(cfg) {}

  PairEvents push(const MarkerObservation& obs, const Vec2& marker_position,
                  const YawDeltaFn& yaw_delta);

  double current_speed() const { return speed_; }
  bool has_speed_fix() const { return has_speed_; }

 private:
  struct Sighting {
    MarkerObservation obs;
    Vec2 marker_position;
  };

  PairingConfig cfg_;
  std::unordered_map<int, std::deque<MarkerObservation>> history_;
  std::optional<Sighting> previous_;
  double speed_ = 0.0;
  double speed_time_ = 0.0;
  bool has_speed_ = false;
};

}  // namespace lbpm
