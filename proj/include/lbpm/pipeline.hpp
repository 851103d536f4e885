#pragma once

#include <string>
#include <vector>

#include "lbpm/estimator.hpp"
#include "lbpm/horizontation.hpp"
#include "lbpm/marker_map.hpp"
#include "lbpm/pointcloud.hpp"

namespace lbpm {

struct RunOptions {
  double yaw0 = 0.0;     // rad, initial heading
  double rough_x = 0.0;  // m, initial position prior
  double rough_y = 0.0;  // m
  PipelineConfig pipeline;
  PairingConfig pairing;
  StandstillCriteria standstill;
  // Dead-reckoned rows are emitted at dr_row_period once no estimator event
  // has happened for dr_silence seconds.
  double dr_row_period = 0.1;  // s
  double dr_silence = 1.0;     // s
};

struct RunStats {
  std::size_t clusters = 0;
  std::size_t identified = 0;
  std::size_t no_match = 0;
  std::size_t ambiguous = 0;
  std::size_t velocity_fixes = 0;
  std::size_t pose_fixes = 0;
};

struct RunResult {
  std::vector<VehicleStateEstimate> trajectory;
  std::vector<std::string> warnings;
  RunStats stats;
};

/// Runs the full estimation chain over batch logs: standstill initialization,
/// per-sample orientation tracking, reflectivity filtering and clustering,
/// marker identification against a dead-reckoned rough pose, and velocity /
/// pose fixes from the pair scheduler.
///
/// Trajectory rows: one FullPose row per pose fix (at the second observation
/// time), one VelocityOnly row per velocity fix (at the pair midpoint, pose
/// dead-reckoned) once a pose fix has anchored the track, and dead-reckoned
/// VelocityOnly rows at dr_row_period during estimator silence.
RunResult run_estimate(const std::vector<ImuSample>& imu,
                       const std::vector<LidarReturn>& returns,
                       const MarkerLibrary& library, const RunOptions& options);

}  // namespace lbpm
