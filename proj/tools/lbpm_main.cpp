#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "lbpm/bench.hpp"
#include "lbpm/io.hpp"
#include "lbpm/pipeline.hpp"
#include "lbpm/simulator.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

template <typename WriteFn>
void write_csv(const fs::path& path, WriteFn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  fn(out);
}

// Paths inside a config file resolve against the config's directory.
std::string resolve(const std::string& base_config, const std::string& path) {
  const fs::path p(path);
  if (p.is_absolute()) return path;
  return (fs::path(base_config).parent_path() / p).string();
}

struct SimulateArgs {
  std::string config;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs& args) {
  lbpm::ScenarioConfig cfg;
  try {
    cfg = lbpm::read_scenario_config_file(args.config);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (args.seed) cfg.seed = *args.seed;

  try {
    const lbpm::SimulationOutput out = lbpm::simulate(cfg);
    fs::create_directories(args.out_dir);
    const fs::path dir(args.out_dir);
    write_csv(dir / "markers.csv", [&](std::ostream& s) {
      lbpm::write_marker_csv(s, out.surveyed_markers);
    });
    write_csv(dir / "imu.csv",
              [&](std::ostream& s) { lbpm::write_imu_csv(s, out.imu); });
    write_csv(dir / "lidar.csv",
              [&](std::ostream& s) { lbpm::write_lidar_csv(s, out.lidar); });
    write_csv(dir / "truth.csv",
              [&](std::ostream& s) { lbpm::write_truth_csv(s, out.truth); });
    std::cout << "simulate: wrote markers.csv, imu.csv, lidar.csv, truth.csv to "
              << args.out_dir << " (" << out.imu.size() << " imu samples, "
              << out.lidar.size() << " returns, " << out.surveyed_markers.size()
              << " markers, seed " << cfg.seed << ")\n";
    return kExitOk;
  } catch (const lbpm::InvalidConfig& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

struct EstimateArgs {
  std::string config;
  std::string out_dir = ".";
  std::optional<double> yaw0_deg;
  std::optional<int> reflectivity_threshold;
  std::optional<double> cluster_ms;
};

int cmd_estimate(const EstimateArgs& args) {
  lbpm::RunSetup setup;
  try {
    setup = lbpm::read_run_setup_file(args.config);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (args.yaw0_deg) setup.yaw0 = lbpm::deg_to_rad(*args.yaw0_deg);
  if (args.reflectivity_threshold)
    setup.pipeline.reflectivity_threshold = *args.reflectivity_threshold;
  if (args.cluster_ms) setup.pipeline.cluster_window = *args.cluster_ms * 1e-3;

  try {
    const auto library = lbpm::MarkerLibrary::load_file(
        resolve(args.config, setup.marker_library),
        setup.pipeline.cluster_distance);
    const auto imu =
        lbpm::read_imu_csv_file(resolve(args.config, setup.imu_log));
    const auto returns =
        lbpm::read_lidar_csv_file(resolve(args.config, setup.lidar_log));

    lbpm::RunOptions options;
    options.yaw0 = setup.yaw0;
    options.rough_x = setup.rough_x;
    options.rough_y = setup.rough_y;
    options.pipeline = setup.pipeline;
    options.pairing = setup.pairing;

    const lbpm::RunResult result =
        lbpm::run_estimate(imu, returns, library, options);
    for (const std::string& w : result.warnings)
      std::cerr << "warning: " << w << "\n";

    fs::create_directories(args.out_dir);
    write_csv(fs::path(args.out_dir) / "trajectory.csv", [&](std::ostream& s) {
      lbpm::write_trajectory_csv(s, result.trajectory);
    });
    std::cout << "estimate: wrote trajectory.csv to " << args.out_dir << " ("
              << result.trajectory.size() << " rows, "
              << result.stats.pose_fixes << " pose fixes, "
              << result.stats.velocity_fixes << " velocity fixes, "
              << result.stats.no_match + result.stats.ambiguous
              << " unmatched clusters)\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

struct EvaluateArgs {
  std::string estimates;
  std::string truth;
  std::string out_dir = ".";
};

int cmd_evaluate(const EvaluateArgs& args) {
  try {
    const auto estimates = lbpm::read_trajectory_csv_file(args.estimates);
    const auto truth = lbpm::read_truth_csv_file(args.truth);
    const lbpm::ErrorReport report = lbpm::evaluate(estimates, truth);

    fs::create_directories(args.out_dir);
    write_file(fs::path(args.out_dir) / "report.csv",
               lbpm::report_to_csv(report));
    write_file(fs::path(args.out_dir) / "report.txt",
               lbpm::report_to_table(report));
    std::cout << lbpm::report_to_table(report);
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

struct BenchArgs {
  std::size_t iterations = 141600;
};

int cmd_bench(const BenchArgs& args) {
  try {
    const auto rows = lbpm::run_bench(args.iterations);
    std::cout << lbpm::bench_to_table(rows);
    std::cout << "reference implementation (MATLAB profiler, i7-6820HQ): "
                 "median 40.77 us combined\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Marker-based vehicle localization toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  CLI::App* sim = app.add_subcommand("simulate", "Generate a synthetic scenario");
  sim->add_option("--config", sim_args.config, "scenario config file")->required();
  sim->add_option("--out", sim_args.out_dir, "output directory");
  std::uint64_t seed_value = 0;
  CLI::Option* seed_opt =
      sim->add_option("--seed", seed_value, "override the scenario seed");

  EstimateArgs est_args;
  CLI::App* est = app.add_subcommand("estimate", "Run the estimator over logs");
  est->add_option("--config", est_args.config, "run config file")->required();
  est->add_option("--out", est_args.out_dir, "output directory");
  double yaw0_deg = 0.0;
  CLI::Option* yaw_opt =
      est->add_option("--yaw0", yaw0_deg, "initial heading override (degrees)");
  int refl = 0;
  CLI::Option* refl_opt = est->add_option("--reflectivity-threshold", refl,
                                          "reflectivity threshold override");
  double cluster_ms = 0.0;
  CLI::Option* cluster_opt =
      est->add_option("--cluster-ms", cluster_ms, "cluster window override (ms)");

  EvaluateArgs eval_args;
  CLI::App* eval = app.add_subcommand("evaluate", "Compare a trajectory to truth");
  eval->add_option("--estimates", eval_args.estimates, "trajectory CSV")->required();
  eval->add_option("--truth", eval_args.truth, "ground-truth CSV")->required();
  eval->add_option("--out", eval_args.out_dir, "output directory");

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "Time the estimators");
  bench->add_option("--iterations", bench_args.iterations, "timed iterations")
      ->check(CLI::Range(std::size_t{1000}, std::size_t{100000000}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (sim->parsed()) {
    if (seed_opt->count() > 0) sim_args.seed = seed_value;
    return cmd_simulate(sim_args);
  }
  if (est->parsed()) {
    if (yaw_opt->count() > 0) est_args.yaw0_deg = yaw0_deg;
    if (refl_opt->count() > 0) est_args.reflectivity_threshold = refl;
    if (cluster_opt->count() > 0) est_args.cluster_ms = cluster_ms;
    return cmd_estimate(est_args);
  }
  if (eval->parsed()) return cmd_evaluate(eval_args);
  if (bench->parsed()) return cmd_bench(bench_args);
  return kExitUsage;
}
