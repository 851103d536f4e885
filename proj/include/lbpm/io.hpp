#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lbpm/estimator.hpp"
#include "lbpm/horizontation.hpp"
#include "lbpm/marker_map.hpp"
#include "lbpm/pointcloud.hpp"
#include "lbpm/simulator.hpp"

namespace lbpm {

// All CSV formats use a fixed header, '.' decimal separator, LF line
// endings and fixed 6-decimal formatting on output.

std::vector<ImuSample> read_imu_csv(std::istream& in, const std::string& name);
std::vector<ImuSample> read_imu_csv_file(const std::string& path);
void write_imu_csv(std::ostream& out, const std::vector<ImuSample>& samples);

std::vector<LidarReturn> read_lidar_csv(std::istream& in, const std::string& name);
std::vector<LidarReturn> read_lidar_csv_file(const std::string& path);
void write_lidar_csv(std::ostream& out, const std::vector<LidarReturn>& returns);

void write_marker_csv(std::ostream& out, const std::vector<Marker>& markers);

std::vector<VehicleStateEstimate> read_trajectory_csv(std::istream& in,
                                                      const std::string& name);
std::vector<VehicleStateEstimate> read_trajectory_csv_file(const std::string& path);
void write_trajectory_csv(std::ostream& out,
                          const std::vector<VehicleStateEstimate>& estimates);

GroundTruth read_truth_csv(std::istream& in, const std::string& name);
GroundTruth read_truth_csv_file(const std::string& path);
void write_truth_csv(std::ostream& out, const GroundTruth& truth);

std::string report_to_csv(const ErrorReport& report);
std::string report_to_table(const ErrorReport& report);

/// Key-value config file: one `key = value` per line, '#' starts a comment,
/// keys may repeat (order preserved).
using KeyValues = std::vector<std::pair<std::string, std::string>>;
KeyValues read_key_values(std::istream& in, const std::string& name);
KeyValues read_key_values_file(const std::string& path);

/// Scenario description for the simulator. Relative understanding of the
/// keys is documented in the README.
ScenarioConfig parse_scenario_config(const KeyValues& kv, const std::string& name);
ScenarioConfig read_scenario_config_file(const std::string& path);

/// Estimation run setup: input paths plus pipeline and pairing parameters.
struct RunSetup {
  std::string marker_library;
  std::string imu_log;
  std::string lidar_log;
  double yaw0 = 0.0;      // rad (config key is in degrees)
  double rough_x = 0.0;   // m
  double rough_y = 0.0;   // m
  PipelineConfig pipeline;
  PairingConfig pairing;
};

RunSetup parse_run_setup(const KeyValues& kv, const std::string& name);
RunSetup read_run_setup_file(const std::string& path);

std::string format_fixed(double value, int decimals = 6);

}  // namespace lbpm
