#include "orient/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "orient/error.hpp"

namespace orient {

using nlohmann::json;

const SubjectDetection* PointCloudFrame::find_detection(const std::string& id) const {
  for (const auto& d : detections)
    if (d.id == id) return &d;
  return nullptr;
}

double bearing(const Point2& from, const Point2& to) {
  const Point2 d = to - from;
  if (d.norm() <= 1.0) throw DataError("bearing: coincident XY positions");
  return normalize_deg(std::atan2(d.y(), d.x()) * kDegPerRad);
}

double bearing(const Point3& from, const Point3& to) {
  return bearing(Point2(from.head<2>()), Point2(to.head<2>()));
}

Cloud transform(const Cloud& points, const Extrinsics& ex) {
  return (ex.rotation * points).colwise() + ex.translation;
}

Cloud stitch(const std::map<std::string, Cloud>& per_sensor, const std::vector<Extrinsics>& extrinsics) {
  Eigen::Index total = 0;
  for (const auto& [id, pts] : per_sensor) total += pts.cols();
  Cloud merged(3, total);
  Eigen::Index offset = 0;
  // Sensor order follows the extrinsics list so output is reproducible.
  std::vector<std::string> seen;
  for (const auto& ex : extrinsics) {
    auto it = per_sensor.find(ex.sensor_id);
    if (it == per_sensor.end()) continue;
    merged.middleCols(offset, it->second.cols()) = transform(it->second, ex);
    offset += it->second.cols();
    seen.push_back(ex.sensor_id);
  }
  for (const auto& [id, pts] : per_sensor) {
    if (std::find(seen.begin(), seen.end(), id) == seen.end())
      throw DataError("stitch: no extrinsics for sensor '" + id + "'");
  }
  return merged;
}

namespace {

double finite_number(const json& j, const char* what) {
  if (!j.is_number()) throw DataError(std::string(what) + " is not a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw DataError(std::string(what) + " is not finite");
  return v;
}

Cloud parse_points(const json& arr) {
  if (!arr.is_array()) throw DataError("points must be an array");
  Cloud pts(3, static_cast<Eigen::Index>(arr.size()));
  Eigen::Index i = 0;
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 3) throw DataError("point must be [x,y,z]");
    pts(0, i) = finite_number(p[0], "x");
    pts(1, i) = finite_number(p[1], "y");
    pts(2, i) = finite_number(p[2], "z");
    ++i;
  }
  return pts;
}

Extrinsics parse_extrinsics(const json& j) {
  Extrinsics ex;
  ex.sensor_id = j.at("id").get<std::string>();
  const auto& r = j.at("R");
  const auto& t = j.at("t");
  if (!r.is_array() || r.size() != 3 || !t.is_array() || t.size() != 3)
    throw DataError("sensor extrinsics need R (3x3) and t (3)");
  for (int row = 0; row < 3; ++row) {
    if (!r[row].is_array() || r[row].size() != 3) throw DataError("R must be 3x3");
    for (int col = 0; col < 3; ++col) ex.rotation(row, col) = finite_number(r[row][col], "R entry");
    ex.translation(row) = finite_number(t[row], "t entry");
  }
  if (!ex.is_orthonormal()) throw DataError("sensor '" + ex.sensor_id + "': rotation is not orthonormal");
  return ex;
}

SubjectDetection parse_detection(const json& j) {
  SubjectDetection d;
  d.id = j.at("id").get<std::string>();
  d.cx = finite_number(j.at("cx"), "cx");
  d.cy = finite_number(j.at("cy"), "cy");
  d.z1 = finite_number(j.at("z1"), "z1");
  d.z2 = finite_number(j.at("z2"), "z2");
  if (d.z1 <= 0.0 || d.z2 <= 0.0) throw DataError("detection '" + d.id + "': z1, z2 must be positive");
  return d;
}

PointCloudFrame parse_frame(const json& j, const std::vector<Extrinsics>& sensors) {
  PointCloudFrame f;
  f.timestamp = finite_number(j.at("t"), "t");
  Cloud pts = j.contains("points") ? parse_points(j.at("points")) : Cloud(3, 0);
  if (j.contains("sensor_points")) {
    std::map<std::string, Cloud> raw;
    for (const auto& [id, arr] : j.at("sensor_points").items()) raw.emplace(id, parse_points(arr));
    const Cloud stitched = stitch(raw, sensors);
    Cloud all(3, pts.cols() + stitched.cols());
    all << pts, stitched;
    pts = std::move(all);
  }
  if (pts.cols() == 0) throw DataError("frame has no points");
  f.points = std::move(pts);
  if (j.contains("detections")) {
    for (const auto& d : j.at("detections")) {
      auto det = parse_detection(d);
      if (f.find_detection(det.id)) throw DataError("duplicate detection id '" + det.id + "'");
      f.detections.push_back(std::move(det));
    }
  }
  return f;
}

}  // namespace

SessionRecording parse_session_text(const std::string& text, ParseReport* report) {
  SessionRecording session;
  ParseReport local;
  ParseReport& rep = report ? *report : local;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      if (!have_header) {
        if (!j.contains("format")) throw DataError("first line must be the session header");
        session.format = j.at("format").get<std::string>();
        if (session.format != "orient-cloud/1") throw DataError("unsupported format '" + session.format + "'");
        if (j.value("units", std::string("mm")) != "mm") throw DataError("only units=mm is accepted");
        if (j.contains("sensors"))
          for (const auto& s : j.at("sensors")) session.sensors.push_back(parse_extrinsics(s));
        have_header = true;
        continue;
      }
      auto frame = parse_frame(j, session.sensors);
      if (!session.frames.empty() && frame.timestamp <= session.frames.back().timestamp)
        throw DataError("timestamp not strictly increasing");
      session.frames.push_back(std::move(frame));
    } catch (const DataError& e) {
      if (!have_header) throw DataError("line " + std::to_string(line_no) + ": " + e.what());
      rep.violations.push_back({line_no, e.what()});
    } catch (const json::exception& e) {
      if (!have_header) throw DataError("line " + std::to_string(line_no) + ": " + e.what());
      rep.violations.push_back({line_no, e.what()});
    }
  }
  if (!have_header) throw DataError("empty session");
  if (session.frames.empty()) throw DataError("session contains no valid frames");
  return session;
}

SessionRecording parse_session(const std::filesystem::path& path, ParseReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open session file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_session_text(buf.str(), report);
}

std::string serialize_session(const SessionRecording& session) {
  std::string out;
  json header = {{"format", session.format}, {"units", "mm"}, {"sensors", json::array()}};
  for (const auto& s : session.sensors) {
    json r = json::array();
    for (int row = 0; row < 3; ++row) r.push_back({s.rotation(row, 0), s.rotation(row, 1), s.rotation(row, 2)});
    header["sensors"].push_back(
        {{"id", s.sensor_id}, {"R", r}, {"t", {s.translation.x(), s.translation.y(), s.translation.z()}}});
  }
  out += header.dump();
  out += '\n';
  for (const auto& f : session.frames) {
    json j;
    j["t"] = f.timestamp;
    json pts = json::array();
    for (Eigen::Index i = 0; i < f.points.cols(); ++i)
      pts.push_back({f.points(0, i), f.points(1, i), f.points(2, i)});
    j["points"] = std::move(pts);
    json dets = json::array();
    for (const auto& d : f.detections)
      dets.push_back({{"id", d.id}, {"cx", d.cx}, {"cy", d.cy}, {"z1", d.z1}, {"z2", d.z2}});
    j["detections"] = std::move(dets);
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_session(const std::filesystem::path& path, const SessionRecording& session) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write session file " + path.string());
  out << serialize_session(session);
}

}  // namespace orient
