#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "orient/angle.hpp"

namespace orient {

// Room frame, millimetres, z up with z = 0 at the floor.
using Point3 = Eigen::Vector3d;
using Point2 = Eigen::Vector2d;

// Points stored column-wise so that Eigen expressions act on whole clouds.
using Cloud = Eigen::Matrix3Xd;
using Cloud2 = Eigen::Matrix2Xd;

// Per-subject output of the sensors' built-in human detector.
struct SubjectDetection {
  std::string id;
  double cx = 0.0;  // centre of gravity, mm
  double cy = 0.0;
  double z1 = 0.0;  // head-top estimate from sensor 1, mm
  double z2 = 0.0;  // head-top estimate from sensor 2, mm

  double mean_z() const { return 0.5 * (z1 + z2); }
  Point2 centroid() const { return {cx, cy}; }
};

struct Extrinsics {
  std::string sensor_id;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  bool is_orthonormal(double tol = 1e-9) const {
    return (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol;
  }
};

struct PointCloudFrame {
  double timestamp = 0.0;  // seconds
  Cloud points;
  std::vector<SubjectDetection> detections;

  const SubjectDetection* find_detection(const std::string& id) const;
};

struct SessionRecording {
  std::string format = "orient-cloud/1";
  std::vector<Extrinsics> sensors;
  std::vector<PointCloudFrame> frames;
};

struct ParseViolation {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct ParseReport {
  std::vector<ParseViolation> violations;
  bool ok() const { return violations.empty(); }
};

// Absolute yaw of the horizontal ray from -> to, degrees in [-180, 180).
// Throws DataError when the two points are closer than 1 mm in XY.
double bearing(const Point3& from, const Point3& to);
double bearing(const Point2& from, const Point2& to);

// Applies p' = R p + t per sensor and concatenates in the order given.
Cloud stitch(const std::map<std::string, Cloud>& per_sensor, const std::vector<Extrinsics>& extrinsics);

Cloud transform(const Cloud& points, const Extrinsics& ex);

// Session files: one JSON object per line (see README for the schema).
SessionRecording parse_session(const std::filesystem::path& path, ParseReport* report = nullptr);
SessionRecording parse_session_text(const std::string& text, ParseReport* report = nullptr);
std::string serialize_session(const SessionRecording& session);
void write_session(const std::filesystem::path& path, const SessionRecording& session);

}  // namespace orient
