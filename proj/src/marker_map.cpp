#include "lbpm/marker_map.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace lbpm {

namespace {

double horizontal_distance(const Vec3& a, const Vec3& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  return fields;
}

double parse_double(const std::string& s, const std::string& where) {
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  double value = 0.0;
  auto [p, ec] = std::from_chars(b, e, value);
  if (ec != std::errc{}) throw ParseError(where + ": bad number '" + s + "'");
  return value;
}

int parse_int(const std::string& s, const std::string& where) {
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  int value = 0;
  auto [p, ec] = std::from_chars(b, e, value);
  if (ec != std::errc{}) throw ParseError(where + ": bad integer '" + s + "'");
  return value;
}

}  // namespace

MarkerLibrary MarkerLibrary::from_markers(std::vector<Marker> markers,
                                          double min_separation) {
  if (markers.empty()) throw ParseError("marker library is empty");

  MarkerLibrary lib;
  lib.markers_ = std::move(markers);
  lib.match_radius_ = 0.5 * min_separation;

  for (size_t i = 0; i < lib.markers_.size(); ++i) {
    const auto [it, inserted] = lib.by_id_.emplace(lib.markers_[i].id, i);
    if (!inserted)
      throw DuplicateId("duplicate marker id " + std::to_string(lib.markers_[i].id));
  }
  for (size_t i = 0; i < lib.markers_.size(); ++i)
    for (size_t j = i + 1; j < lib.markers_.size(); ++j) {
      const double d =
          horizontal_distance(lib.markers_[i].position, lib.markers_[j].position);
      if (d < min_separation)
        throw MarkersTooClose("markers " + std::to_string(lib.markers_[i].id) +
                              " and " + std::to_string(lib.markers_[j].id) +
                              " are " + std::to_string(d) + " m apart, need " +
                              std::to_string(min_separation));
    }

  lib.build_index();
  return lib;
}

MarkerLibrary MarkerLibrary::load(std::istream& in, const std::string& source_name,
                                  double min_separation) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source_name + ": empty library");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "id,x,y,z")
    throw ParseError(source_name + ":1: expected header 'id,x,y,z', got '" + line + "'");

  std::vector<Marker> markers;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = source_name + ":" + std::to_string(line_no);
    const auto fields = split_csv(line);
    if (fields.size() != 4)
      throw ParseError(where + ": expected 4 fields, got " +
                       std::to_string(fields.size()));
    Marker m;
    m.id = parse_int(fields[0], where);
    m.position = {parse_double(fields[1], where), parse_double(fields[2], where),
                  parse_double(fields[3], where)};
    markers.push_back(m);
  }
  if (markers.empty()) throw ParseError(source_name + ": empty library");
  return from_markers(std::move(markers), min_separation);
}

MarkerLibrary MarkerLibrary::load_file(const std::string& path,
                                       double min_separation) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  return load(in, path, min_separation);
}

const Marker* MarkerLibrary::find(int id) const {
  const auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &markers_[it->second];
}

namespace {
int64_t pack_cells(int64_t cx, int64_t cy) {
  return cx * 0x100000000LL + (cy & 0xffffffffLL);
}
}  // namespace

int64_t MarkerLibrary::cell_key(double x, double y) const {
  return pack_cells(static_cast<int64_t>(std::floor(x / cell_size_)),
                    static_cast<int64_t>(std::floor(y / cell_size_)));
}

void MarkerLibrary::build_index() {
  // Cell size covers the match radius plus the tie margin, so scanning the
  // 3x3 neighborhood of the query cell sees every candidate that matters.
  cell_size_ = std::max(match_radius_ + tie_margin_, 0.25);
  for (size_t i = 0; i < markers_.size(); ++i)
    grid_[cell_key(markers_[i].position.x, markers_[i].position.y)].push_back(i);
}

const Marker* MarkerLibrary::nearest(const Vec2& query, double radius,
                                     double* second_distance) const {
  const auto qx = static_cast<int64_t>(std::floor(query.x / cell_size_));
  const auto qy = static_cast<int64_t>(std::floor(query.y / cell_size_));

  const Marker* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  double second_d = std::numeric_limits<double>::infinity();

  for (int64_t cx = qx - 1; cx <= qx + 1; ++cx)
    for (int64_t cy = qy - 1; cy <= qy + 1; ++cy) {
      const auto it = grid_.find(pack_cells(cx, cy));
      if (it == grid_.end()) continue;
      for (const size_t idx : it->second) {
        const Marker& m = markers_[idx];
        const double d = std::hypot(m.position.x - query.x, m.position.y - query.y);
        if (d < best_d) {
          second_d = best_d;
          best_d = d;
          best = &m;
        } else if (d < second_d) {
          second_d = d;
        }
      }
    }

  if (second_distance) *second_distance = second_d;
  if (!best || best_d > radius) return nullptr;
  return best;
}

Marker identify(const MarkerLibrary& library, const RoughPose& rough,
                const Cluster& cluster) {
  const Vec2 measured{cluster.position.x, cluster.position.y};
  const Vec2 oriented = rotate2(rough.heading, measured);
  const Vec2 apparent{rough.x + oriented.x, rough.y + oriented.y};

  double second = std::numeric_limits<double>::infinity();
  const Marker* best = library.nearest(apparent, library.match_radius(), &second);
  if (!best)
    throw NoMarkerInRange("no marker within " +
                          std::to_string(library.match_radius()) + " m of (" +
                          std::to_string(apparent.x) + ", " +
                          std::to_string(apparent.y) + ")");

  const double best_d =
      std::hypot(best->position.x - apparent.x, best->position.y - apparent.y);
  if (second - best_d < library.tie_margin())
    throw AmbiguousMatch("markers nearly equidistant from apparent position (" +
                         std::to_string(best_d) + " m vs " +
                         std::to_string(second) + " m)");
  return *best;
}

}  // namespace lbpm
