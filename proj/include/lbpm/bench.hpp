#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lbpm {

struct BenchRow {
  std::string name;       // Velocity, Pose, Combined
  double median_us = 0.0;
  double std_us = 0.0;
  double max_us = 0.0;
  std::size_t iterations = 0;
};

/// Times the velocity and pose estimators over pre-generated observation
/// pairs, one timed call per iteration. Deterministic pool for a fixed seed.
std::vector<BenchRow> run_bench(std::size_t iterations, std::uint64_t seed = 7);

std::string bench_to_table(const std::vector<BenchRow>& rows);

}  // namespace lbpm
