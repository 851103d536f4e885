#include "lbpm/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace lbpm {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) fields.push_back(field);
  return fields;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& s, const std::string& where) {
  const std::string t = trim(s);
  double v = 0.0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || p != t.data() + t.size())
    throw ParseError(where + ": bad number '" + s + "'");
  return v;
}

int to_int(const std::string& s, const std::string& where) {
  const std::string t = trim(s);
  int v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || p != t.data() + t.size())
    throw ParseError(where + ": bad integer '" + s + "'");
  return v;
}

struct CsvReader {
  std::istream& in;
  std::string name;
  int line_no = 0;

  // Reads and checks the header line.
  void expect_header(const std::string& header) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(name + ": empty file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header)
      throw ParseError(name + ":1: expected header '" + header + "', got '" +
                       line + "'");
  }

  // Returns the fields of the next non-empty row, or false at EOF.
  bool next_row(std::vector<std::string>& fields, size_t expected) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      fields = split(line, ',');
      if (fields.size() != expected)
        throw ParseError(where() + ": expected " + std::to_string(expected) +
                         " fields, got " + std::to_string(fields.size()));
      return true;
    }
    return false;
  }

  std::string where() const { return name + ":" + std::to_string(line_no); }
};

template <typename T>
T open_and_read(const std::string& path,
                T (*reader)(std::istream&, const std::string&)) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  return reader(in, path);
}

}  // namespace

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

std::vector<ImuSample> read_imu_csv(std::istream& in, const std::string& name) {
  CsvReader r{in, name};
  r.expect_header("t,ax,ay,az,wx,wy,wz");
  std::vector<ImuSample> samples;
  std::vector<std::string> f;
  while (r.next_row(f, 7)) {
    ImuSample s;
    s.t = to_double(f[0], r.where());
    s.accel = {to_double(f[1], r.where()), to_double(f[2], r.where()),
               to_double(f[3], r.where())};
    s.gyro = {to_double(f[4], r.where()), to_double(f[5], r.where()),
              to_double(f[6], r.where())};
    if (!samples.empty() && s.t <= samples.back().t)
      throw ParseError(r.where() + ": timestamps must increase");
    samples.push_back(s);
  }
  return samples;
}

std::vector<ImuSample> read_imu_csv_file(const std::string& path) {
  return open_and_read(path, read_imu_csv);
}

void write_imu_csv(std::ostream& out, const std::vector<ImuSample>& samples) {
  out << "t,ax,ay,az,wx,wy,wz\n";
  for (const ImuSample& s : samples)
    out << format_fixed(s.t) << ',' << format_fixed(s.accel.x) << ','
        << format_fixed(s.accel.y) << ',' << format_fixed(s.accel.z) << ','
        << format_fixed(s.gyro.x) << ',' << format_fixed(s.gyro.y) << ','
        << format_fixed(s.gyro.z) << '\n';
}

std::vector<LidarReturn> read_lidar_csv(std::istream& in, const std::string& name) {
  CsvReader r{in, name};
  r.expect_header("t,x,y,z,reflectivity");
  std::vector<LidarReturn> returns;
  std::vector<std::string> f;
  while (r.next_row(f, 5)) {
    LidarReturn ret;
    ret.t = to_double(f[0], r.where());
    ret.position = {to_double(f[1], r.where()), to_double(f[2], r.where()),
                    to_double(f[3], r.where())};
    ret.reflectivity = to_int(f[4], r.where());
    if (ret.reflectivity < 0 || ret.reflectivity > 255)
      throw ParseError(r.where() + ": reflectivity outside [0, 255]");
    returns.push_back(ret);
  }
  return returns;
}

std::vector<LidarReturn> read_lidar_csv_file(const std::string& path) {
  return open_and_read(path, read_lidar_csv);
}

void write_lidar_csv(std::ostream& out, const std::vector<LidarReturn>& returns) {
  out << "t,x,y,z,reflectivity\n";
  for (const LidarReturn& r : returns)
    out << format_fixed(r.t) << ',' << format_fixed(r.position.x) << ','
        << format_fixed(r.position.y) << ',' << format_fixed(r.position.z)
        << ',' << r.reflectivity << '\n';
}

void write_marker_csv(std::ostream& out, const std::vector<Marker>& markers) {
  out << "id,x,y,z\n";
  for (const Marker& m : markers)
    out << m.id << ',' << format_fixed(m.position.x) << ','
        << format_fixed(m.position.y) << ',' << format_fixed(m.position.z)
        << '\n';
}

namespace {

const char* quality_name(EstimateQuality q) {
  return q == EstimateQuality::FullPose ? "FullPose" : "VelocityOnly";
}

EstimateQuality quality_from(const std::string& s, const std::string& where) {
  if (s == "FullPose") return EstimateQuality::FullPose;
  if (s == "VelocityOnly") return EstimateQuality::VelocityOnly;
  throw ParseError(where + ": unknown quality '" + s + "'");
}

}  // namespace

std::vector<VehicleStateEstimate> read_trajectory_csv(std::istream& in,
                                                      const std::string& name) {
  CsvReader r{in, name};
  r.expect_header("t,x,y,yaw,v,quality");
  std::vector<VehicleStateEstimate> estimates;
  std::vector<std::string> f;
  while (r.next_row(f, 6)) {
    VehicleStateEstimate e;
    e.t = to_double(f[0], r.where());
    e.x = to_double(f[1], r.where());
    e.y = to_double(f[2], r.where());
    e.yaw = to_double(f[3], r.where());
    e.speed = to_double(f[4], r.where());
    e.quality = quality_from(trim(f[5]), r.where());
    estimates.push_back(e);
  }
  return estimates;
}

std::vector<VehicleStateEstimate> read_trajectory_csv_file(const std::string& path) {
  return open_and_read(path, read_trajectory_csv);
}

void write_trajectory_csv(std::ostream& out,
                          const std::vector<VehicleStateEstimate>& estimates) {
  out << "t,x,y,yaw,v,quality\n";
  for (const VehicleStateEstimate& e : estimates)
    out << format_fixed(e.t) << ',' << format_fixed(e.x) << ','
        << format_fixed(e.y) << ',' << format_fixed(e.yaw) << ','
        << format_fixed(e.speed) << ',' << quality_name(e.quality) << '\n';
}

GroundTruth read_truth_csv(std::istream& in, const std::string& name) {
  CsvReader r{in, name};
  r.expect_header("t,x,y,yaw,v,yaw_rate,ax,ay");
  GroundTruth truth;
  std::vector<std::string> f;
  while (r.next_row(f, 8)) {
    TruthSample s;
    s.t = to_double(f[0], r.where());
    s.x = to_double(f[1], r.where());
    s.y = to_double(f[2], r.where());
    s.yaw = to_double(f[3], r.where());
    s.speed = to_double(f[4], r.where());
    s.yaw_rate = to_double(f[5], r.where());
    s.ax = to_double(f[6], r.where());
    s.ay = to_double(f[7], r.where());
    truth.samples.push_back(s);
  }
  return truth;
}

GroundTruth read_truth_csv_file(const std::string& path) {
  return open_and_read(path, read_truth_csv);
}

void write_truth_csv(std::ostream& out, const GroundTruth& truth) {
  out << "t,x,y,yaw,v,yaw_rate,ax,ay\n";
  for (const TruthSample& s : truth.samples)
    out << format_fixed(s.t) << ',' << format_fixed(s.x) << ','
        << format_fixed(s.y) << ',' << format_fixed(s.yaw) << ','
        << format_fixed(s.speed) << ',' << format_fixed(s.yaw_rate) << ','
        << format_fixed(s.ax) << ',' << format_fixed(s.ay) << '\n';
}

namespace {

void report_rows(const ErrorReport& r,
                 const std::function<void(const char*, const char*,
                                          const ErrorStats&)>& emit) {
  emit("velocity", "m/s", r.speed);
  emit("position", "m", r.position);
  emit("yaw", "deg", r.yaw_deg);
}

}  // namespace

std::string report_to_csv(const ErrorReport& report) {
  std::ostringstream out;
  out << "quantity,unit,mean,std,max,count\n";
  report_rows(report, [&](const char* q, const char* u, const ErrorStats& s) {
    out << q << ',' << u << ',' << format_fixed(s.mean) << ','
        << format_fixed(s.std_dev) << ',' << format_fixed(s.max) << ','
        << s.count << '\n';
  });
  return out.str();
}

std::string report_to_table(const ErrorReport& report) {
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-10s %-5s %12s %12s %12s %8s\n", "quantity",
                "unit", "mean", "std", "max", "count");
  out << buf;
  report_rows(report, [&](const char* q, const char* u, const ErrorStats& s) {
    std::snprintf(buf, sizeof(buf), "%-10s %-5s %12.6f %12.6f %12.6f %8zu\n", q,
                  u, s.mean, s.std_dev, s.max, s.count);
    out << buf;
  });
  return out.str();
}

KeyValues read_key_values(std::istream& in, const std::string& name) {
  KeyValues kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ParseError(name + ":" + std::to_string(line_no) +
                       ": expected 'key = value'");
    kv.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return kv;
}

KeyValues read_key_values_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  return read_key_values(in, path);
}

namespace {

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> words;
  std::istringstream in(s);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

Segment parse_segment(const std::string& value, const std::string& where) {
  const auto w = split_words(value);
  if (w.empty()) throw ParseError(where + ": empty segment");
  const std::string& kind = w[0];
  auto need = [&](size_t n) {
    if (w.size() != n + 1)
      throw ParseError(where + ": segment '" + kind + "' needs " +
                       std::to_string(n) + " parameters");
  };
  if (kind == "standstill") {
    need(1);
    return SegmentStandstill{to_double(w[1], where)};
  }
  if (kind == "straight") {
    need(2);
    return SegmentStraight{to_double(w[1], where), to_double(w[2], where)};
  }
  if (kind == "ramp") {
    need(3);
    return SegmentRamp{to_double(w[1], where), to_double(w[2], where),
                       to_double(w[3], where)};
  }
  if (kind == "arc") {
    need(3);
    return SegmentArc{to_double(w[1], where), to_double(w[2], where),
                      to_double(w[3], where)};
  }
  if (kind == "slalom") {
    need(4);
    return SegmentSlalom{to_double(w[1], where), to_double(w[2], where),
                         to_double(w[3], where), to_double(w[4], where)};
  }
  throw ParseError(where + ": unknown segment kind '" + kind + "'");
}

}  // namespace

ScenarioConfig parse_scenario_config(const KeyValues& kv, const std::string& name) {
  ScenarioConfig cfg;
  for (const auto& [key, value] : kv) {
    const std::string where = name + " key '" + key + "'";
    if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(to_double(value, where));
    } else if (key == "imu_rate") {
      cfg.imu_rate = to_double(value, where);
    } else if (key == "lidar_rate") {
      cfg.lidar.rate = to_double(value, where);
    } else if (key == "lidar_max_range") {
      cfg.lidar.max_range = to_double(value, where);
    } else if (key == "lidar_returns_per_marker") {
      cfg.lidar.returns_per_marker = to_int(value, where);
    } else if (key == "lidar_block_dt") {
      cfg.lidar.block_dt = to_double(value, where);
    } else if (key == "lidar_jitter_dt") {
      cfg.lidar.jitter_dt = to_double(value, where);
    } else if (key == "clutter_per_sweep") {
      cfg.lidar.clutter_per_sweep = to_int(value, where);
    } else if (key == "gravity") {
      cfg.gravity = to_double(value, where);
    } else if (key == "start_x") {
      cfg.start_x = to_double(value, where);
    } else if (key == "start_y") {
      cfg.start_y = to_double(value, where);
    } else if (key == "start_yaw_deg") {
      cfg.start_yaw = deg_to_rad(to_double(value, where));
    } else if (key == "noise_accel") {
      cfg.noise.accel = to_double(value, where);
    } else if (key == "noise_gyro") {
      cfg.noise.gyro = to_double(value, where);
    } else if (key == "noise_range") {
      cfg.noise.range = to_double(value, where);
    } else if (key == "noise_azimuth_deg") {
      cfg.noise.azimuth = deg_to_rad(to_double(value, where));
    } else if (key == "noise_survey") {
      cfg.noise.survey = to_double(value, where);
    } else if (key == "segment") {
      cfg.segments.push_back(parse_segment(value, where));
    } else if (key == "markers") {
      const auto w = split_words(value);
      if (w.size() < 7 || w[0] != "grid")
        throw ParseError(where + ": expected 'grid nx ny dx dy x0 y0 [z]'");
      const double z = w.size() > 7 ? to_double(w[7], where) : 1.0;
      const auto grid =
          make_marker_grid(to_int(w[1], where), to_int(w[2], where),
                           to_double(w[3], where), to_double(w[4], where),
                           to_double(w[5], where), to_double(w[6], where), z,
                           static_cast<int>(cfg.markers.size()) + 1);
      cfg.markers.insert(cfg.markers.end(), grid.begin(), grid.end());
    } else if (key == "marker") {
      const auto w = split_words(value);
      if (w.size() < 3)
        throw ParseError(where + ": expected 'id x y [z]'");
      Marker m;
      m.id = to_int(w[0], where);
      m.position = {to_double(w[1], where), to_double(w[2], where),
                    w.size() > 3 ? to_double(w[3], where) : 1.0};
      cfg.markers.push_back(m);
    } else {
      throw ParseError(where + ": unknown key");
    }
  }
  return cfg;
}

ScenarioConfig read_scenario_config_file(const std::string& path) {
  return parse_scenario_config(read_key_values_file(path), path);
}

RunSetup parse_run_setup(const KeyValues& kv, const std::string& name) {
  RunSetup setup;
  for (const auto& [key, value] : kv) {
    const std::string where = name + " key '" + key + "'";
    if (key == "marker_library") {
      setup.marker_library = value;
    } else if (key == "imu_log") {
      setup.imu_log = value;
    } else if (key == "lidar_log") {
      setup.lidar_log = value;
    } else if (key == "yaw0_deg") {
      setup.yaw0 = deg_to_rad(to_double(value, where));
    } else if (key == "rough_x") {
      setup.rough_x = to_double(value, where);
    } else if (key == "rough_y") {
      setup.rough_y = to_double(value, where);
    } else if (key == "reflectivity_threshold") {
      setup.pipeline.reflectivity_threshold = to_int(value, where);
    } else if (key == "cluster_time_ms") {
      setup.pipeline.cluster_window = to_double(value, where) * 1e-3;
    } else if (key == "max_range") {
      setup.pipeline.max_range = to_double(value, where);
    } else if (key == "cluster_distance") {
      setup.pipeline.cluster_distance = to_double(value, where);
    } else if (key == "min_cluster_points") {
      setup.pipeline.min_points = to_int(value, where);
    } else if (key == "velocity_pair_min_dt") {
      setup.pairing.velocity_min_dt = to_double(value, where);
    } else if (key == "velocity_pair_max_dt") {
      setup.pairing.velocity_max_dt = to_double(value, where);
    } else if (key == "pose_pair_max_dt") {
      setup.pairing.pose_max_dt = to_double(value, where);
    } else {
      throw ParseError(where + ": unknown key");
    }
  }
  if (setup.marker_library.empty())
    throw ParseError(name + ": missing key 'marker_library'");
  if (setup.imu_log.empty()) throw ParseError(name + ": missing key 'imu_log'");
  if (setup.lidar_log.empty())
    throw ParseError(name + ": missing key 'lidar_log'");
  return setup;
}

RunSetup read_run_setup_file(const std::string& path) {
  return parse_run_setup(read_key_values_file(path), path);
}

}  // namespace lbpm
