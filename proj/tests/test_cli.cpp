#include <doctest.h>

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "lbpm/bench.hpp"
#include "lbpm/io.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LBPM_CLI_PATH) + " " + args +
                          " > /dev/null 2> /dev/null";
  const int status = std::system(cmd.c_str());
  return (status >> 8) & 0xff;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t hash = 1469598103934665603ull;
  for (const unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

const std::string kScenarioDir = LBPM_SCENARIO_DIR;

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_cli("") == 2);
  CHECK(run_cli("estimate") == 2);
  CHECK(run_cli("nonsense") == 2);
  CHECK(run_cli("simulate --config /nonexistent/missing.cfg") == 2);
  CHECK(run_cli("evaluate --estimates only.csv") == 2);
}

TEST_CASE("invalid scenario fields exit with code 2") {
  const fs::path dir = fresh_dir("lbpm_cli_badcfg");
  {
    std::ofstream cfg(dir / "bad.cfg");
    cfg << "imu_rate = 0\n"
        << "markers = grid 2 1 4 4 10 4\n"
        << "segment = standstill 1.5\n";
  }
  CHECK(run_cli("simulate --config " + (dir / "bad.cfg").string() + " --out " +
                (dir / "out").string()) == 2);
}

TEST_CASE("runtime data errors exit with code 1") {
  const fs::path dir = fresh_dir("lbpm_cli_badrun");
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "marker_library = missing.csv\n"
        << "imu_log = missing.csv\n"
        << "lidar_log = missing.csv\n";
  }
  CHECK(run_cli("estimate --config " + (dir / "run.cfg").string()) == 1);
  CHECK(run_cli("evaluate --estimates " + (dir / "none.csv").string() +
                " --truth " + (dir / "none.csv").string()) == 1);
}

TEST_CASE("simulate, estimate and evaluate chain through files") {
  const fs::path dir = fresh_dir("lbpm_cli_chain");
  const std::string scenario = kScenarioDir + "/driveby_10kmh.cfg";

  const fs::path out_a = dir / "a";
  const fs::path out_b = dir / "b";
  REQUIRE(run_cli("simulate --config " + scenario + " --out " + out_a.string()) == 0);
  REQUIRE(run_cli("simulate --config " + scenario + " --out " + out_b.string()) == 0);

  // identical seeds give byte-identical logs
  for (const char* name : {"markers.csv", "imu.csv", "lidar.csv", "truth.csv"})
    CHECK(slurp(out_a / name) == slurp(out_b / name));

  // frozen fingerprint of the bundled scenario's output
  const std::string bundle = slurp(out_a / "markers.csv") +
                             slurp(out_a / "imu.csv") +
                             slurp(out_a / "lidar.csv") +
                             slurp(out_a / "truth.csv");
  CHECK(fnv1a(bundle) == 2470419229667034676ull);

  // estimation setup mirroring the bundled run config
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "marker_library = a/markers.csv\n"
        << "imu_log = a/imu.csv\n"
        << "lidar_log = a/lidar.csv\n"
        << "yaw0_deg = 0\n"
        << "rough_x = 5.21\n"
        << "rough_y = 0\n"
        << "pose_pair_max_dt = 0.01\n";
  }
  REQUIRE(run_cli("estimate --config " + (dir / "run.cfg").string() + " --out " +
                  (dir / "est1").string()) == 0);
  REQUIRE(run_cli("estimate --config " + (dir / "run.cfg").string() + " --out " +
                  (dir / "est2").string()) == 0);
  CHECK(slurp(dir / "est1" / "trajectory.csv") ==
        slurp(dir / "est2" / "trajectory.csv"));

  const auto trajectory =
      lbpm::read_trajectory_csv_file((dir / "est1" / "trajectory.csv").string());
  size_t full_pose = 0;
  for (const auto& row : trajectory)
    if (row.quality == lbpm::EstimateQuality::FullPose) ++full_pose;
  CHECK(full_pose > 100);

  REQUIRE(run_cli("evaluate --estimates " +
                  (dir / "est1" / "trajectory.csv").string() + " --truth " +
                  (out_a / "truth.csv").string() + " --out " +
                  (dir / "eval").string()) == 0);
  CHECK(fs::exists(dir / "eval" / "report.csv"));
  CHECK(fs::exists(dir / "eval" / "report.txt"));

  // file-quantized end-to-end errors stay far below a millimeter
  const std::string report = slurp(dir / "eval" / "report.csv");
  std::istringstream in(report);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string quantity, unit, mean;
    std::getline(row, quantity, ',');
    std::getline(row, unit, ',');
    std::getline(row, mean, ',');
    CHECK(std::stod(mean) < 1e-3);
  }
}

TEST_CASE("estimate honors CLI overrides") {
  const fs::path dir = fresh_dir("lbpm_cli_override");
  const std::string scenario = kScenarioDir + "/driveby_10kmh.cfg";
  REQUIRE(run_cli("simulate --config " + scenario + " --out " +
                  (dir / "sim").string()) == 0);
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "marker_library = sim/markers.csv\n"
        << "imu_log = sim/imu.csv\n"
        << "lidar_log = sim/lidar.csv\n"
        << "rough_x = 5.21\n";
  }
  // an absurd reflectivity threshold blanks the point stream: the run still
  // succeeds but produces no pose fixes
  REQUIRE(run_cli("estimate --config " + (dir / "run.cfg").string() +
                  " --reflectivity-threshold 256 --out " +
                  (dir / "dark").string()) == 0);
  const auto rows =
      lbpm::read_trajectory_csv_file((dir / "dark" / "trajectory.csv").string());
  for (const auto& row : rows)
    CHECK(row.quality == lbpm::EstimateQuality::VelocityOnly);
}

TEST_CASE("bench runs its smoke iterations quickly") {
  const auto t0 = std::chrono::steady_clock::now();
  CHECK(run_cli("bench --iterations 1000") == 0);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(elapsed < 5.0);
  CHECK(run_cli("bench --iterations 500") == 2);  // below the minimum

  const auto rows = lbpm::run_bench(1000, 3);
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) {
    CHECK(row.median_us >= 0.0);
    CHECK(row.max_us >= row.median_us);
    CHECK(row.iterations == 1000);
  }
}
