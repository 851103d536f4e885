#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lbpm/geometry.hpp"

namespace lbpm {

/// One reflectivity-tagged range return, position in the body frame.
struct LidarReturn {
  double t = 0.0;
  Vec3 position;            // m, body frame
  int reflectivity = 0;     // 0..255, NIST-calibrated scale
};

/// Aggregate of returns that belong to one physical target. Position and
/// time are the per-axis mid-range (max+min)/2 of the member returns.
struct Cluster {
  double t = 0.0;
  Vec3 position;            // m, body frame
  int point_count = 0;
  double range = 0.0;       // m, horizontal: sqrt(x^2 + y^2)
  double azimuth = 0.0;     // rad, CCW from body x, in [0, 2*pi)
};

struct PipelineConfig {
  int reflectivity_threshold = 200;   // keep returns at or above
  double cluster_window = 5e-4;       // s, max age of a cluster member
  double max_range = 16.0;            // m, horizontal visibility limit
  double cluster_distance = 0.5789;   // m, operational marker separation
  int min_points = 2;                 // smaller clusters are dropped
  double max_rotation_rpm = 1200.0;   // sensor rotation rate bound
};

class UnsortedInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Keeps exactly the returns with reflectivity >= threshold, preserving order.
std::vector<LidarReturn> filter_reflectivity(const std::vector<LidarReturn>& returns,
                                             const PipelineConfig& cfg);

/// Greedy sequential clustering over a time-sorted stream. A return joins the
/// open cluster iff it is within the time window of the cluster's first
/// member and within cluster_distance/2 of the running mid-range center;
/// otherwise the open cluster is closed and a new one opened. Returns beyond
/// max_range are dropped up front, clusters below min_points at the end.
/// Throws UnsortedInput when timestamps decrease.
std::vector<Cluster> cluster_by_time(const std::vector<LidarReturn>& returns,
                                     const PipelineConfig& cfg);

/// Marker-separation bound. `formula` evaluates
/// max_range * sin(max_rotation_rpm * 6 * cluster_window) with the rotation
/// rate read in rpm, the factor 6 converting to deg/s and the angle taken in
/// degrees; `configured` is the cluster_distance actually used operationally.
struct SeparationBound {
  double formula = 0.0;     // m
  double configured = 0.0;  // m
};

SeparationBound min_marker_separation(const PipelineConfig& cfg);

}  // namespace lbpm
