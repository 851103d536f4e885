#include "lbpm/pointcloud.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lbpm {

std::vector<LidarReturn> filter_reflectivity(const std::vector<LidarReturn>& returns,
                                             const PipelineConfig& cfg) {
  std::vector<LidarReturn> kept;
  kept.reserve(returns.size());
  for (const LidarReturn& r : returns)
    if (r.reflectivity >= cfg.reflectivity_threshold) kept.push_back(r);
  return kept;
}

namespace {

struct OpenCluster {
  double t_first = 0.0;
  double t_min = 0.0, t_max = 0.0;
  Vec3 min{}, max{};
  int count = 0;

  void start(const LidarReturn& r) {
    t_first = t_min = t_max = r.t;
    min = max = r.position;
    count = 1;
  }

  void add(const LidarReturn& r) {
    t_min = std::min(t_min, r.t);
    t_max = std::max(t_max, r.t);
    min = {std::min(min.x, r.position.x), std::min(min.y, r.position.y),
           std::min(min.z, r.position.z)};
    max = {std::max(max.x, r.position.x), std::max(max.y, r.position.y),
           std::max(max.z, r.position.z)};
    ++count;
  }

  Vec3 center() const { return (min + max) * 0.5; }
  double mid_time() const { return 0.5 * (t_min + t_max); }
};

Cluster finish(const OpenCluster& oc) {
  Cluster c;
  c.t = oc.mid_time();
  c.position = oc.center();
  c.point_count = oc.count;
  c.range = std::hypot(c.position.x, c.position.y);
  c.azimuth = wrap_two_pi(std::atan2(c.position.y, c.position.x));
  return c;
}

}  // namespace

std::vector<Cluster> cluster_by_time(const std::vector<LidarReturn>& returns,
                                     const PipelineConfig& cfg) {
  std::vector<Cluster> clusters;
  OpenCluster open;
  bool active = false;
  double t_prev = -std::numeric_limits<double>::infinity();

  auto close_open = [&] {
    if (active && open.count >= cfg.min_points) clusters.push_back(finish(open));
    active = false;
  };

  for (const LidarReturn& r : returns) {
    if (r.t < t_prev)
      throw UnsortedInput("returns not sorted by time at t=" + std::to_string(r.t));
    t_prev = r.t;

    if (std::hypot(r.position.x, r.position.y) > cfg.max_range) continue;

    if (active) {
      const Vec3 c = open.center();
      const double dist = std::hypot(r.position.x - c.x, r.position.y - c.y);
      if (r.t - open.t_first <= cfg.cluster_window &&
          dist <= 0.5 * cfg.cluster_distance) {
        open.add(r);
        continue;
      }
      close_open();
    }
    open.start(r);
    active = true;
  }
  close_open();
  return clusters;
}

SeparationBound min_marker_separation(const PipelineConfig& cfg) {
  const double angle_deg = cfg.max_rotation_rpm * 6.0 * cfg.cluster_window;
  SeparationBound b;
  b.formula = cfg.max_range * std::sin(deg_to_rad(angle_deg));
  b.configured = cfg.cluster_distance;
  return b;
}

}  // namespace lbpm
