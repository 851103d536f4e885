#pragma once

#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "lbpm/geometry.hpp"
#include "lbpm/pointcloud.hpp"

namespace lbpm {

/// Surveyed retro-reflective marker, position in the world frame.
struct Marker {
  int id = 0;
  Vec3 position;  // m, world frame
};

/// Coarse vehicle pose used to anchor marker identification. Valid matching
/// requires the position within half the cluster distance of truth and the
/// heading within 0.78 rad.
struct RoughPose {
  double x = 0.0;       // m, world frame
  double y = 0.0;       // m, world frame
  double heading = 0.0; // rad
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DuplicateId : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MarkersTooClose : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoMarkerInRange : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AmbiguousMatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable marker library with a grid index for nearest-marker queries.
/// Matching is horizontal-only; z coordinates are stored but ignored.
class MarkerLibrary {
 public:
  /// Builds from markers already in memory. Validates unique ids and the
  /// pairwise horizontal separation >= min_separation.
  static MarkerLibrary from_markers(std::vector<Marker> markers,
                                    double min_separation = PipelineConfig{}.cluster_distance);

  /// Loads the CSV format `id,x,y,z` (header required). Error messages name
  /// the offending line or marker ids.
  static MarkerLibrary load(std::istream& in, const std::string& source_name,
                            double min_separation = PipelineConfig{}.cluster_distance);
  static MarkerLibrary load_file(const std::string& path,
                                 double min_separation = PipelineConfig{}.cluster_distance);

  const std::vector<Marker>& markers() const { return markers_; }
  const Marker* find(int id) const;

  /// Nearest marker by horizontal distance to a query point, or nullptr when
  /// nothing lies within `radius`. `second_distance` (optional) receives the
  /// distance of the runner-up within the indexed neighborhood.
  const Marker* nearest(const Vec2& query, double radius,
                        double* second_distance = nullptr) const;

  double match_radius() const { return match_radius_; }
  double tie_margin() const { return tie_margin_; }

 private:
  std::vector<Marker> markers_;
  std::unordered_map<int, size_t> by_id_;
  std::unordered_map<int64_t, std::vector<size_t>> grid_;
  double cell_size_ = 1.0;
  double match_radius_ = 0.5 * PipelineConfig{}.cluster_distance;
  double tie_margin_ = 0.05;

  void build_index();
  int64_t cell_key(double x, double y) const;
};

/// Resolves a cluster to a marker identity. The cluster position is rotated
/// by the rough heading and shifted by the rough position to form an
/// apparent world position; the nearest library marker within the match
/// radius is returned. Throws NoMarkerInRange when nothing is close enough
/// and AmbiguousMatch when the two nearest candidates are within the tie
/// margin of each other.
Marker identify(const MarkerLibrary& library, const RoughPose& rough,
                const Cluster& cluster);

}  // namespace lbpm
