#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "orient/core.hpp"
#include "orient/geometry.hpp"
#include "orient/preprocess.hpp"

namespace orient {

enum class FeatureFamily { kSensorCentroid, kHeadStats, kHeadPca, kQuadrantStats, kQuadrantPca, kNose, kHeadEllipse, kAuxiliary };

const char* family_name(FeatureFamily f);
FeatureFamily family_from_name(const std::string& s);  // throws DataError

struct FeatureEntry {
  std::string name;
  FeatureFamily family;
};

// Ordered, versioned list of named features. The hash identifies the exact
// layout and is stored with every trained model.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  FeatureSchema(std::string version, std::vector<FeatureEntry> entries);

  static const FeatureSchema& default_schema();

  const std::string& version() const { return version_; }
  const std::vector<FeatureEntry>& entries() const { return entries_; }
  std::size_t dimension() const { return entries_.size(); }
  std::vector<std::string> names() const;
  std::optional<std::size_t> index_of(const std::string& name) const;
  std::string hash() const;

  // Same layout with extra trailing entries.
  FeatureSchema extended(const std::string& version, const std::vector<FeatureEntry>& extra) const;

 private:
  std::string version_;
  std::vector<FeatureEntry> entries_;
};

struct NoseEstimate {
  Point2 position = Point2::Zero();
  bool too_few_points = false;
  bool uninformative = false;  // top-10 points spread over more than 120 deg of arc
};

// Centroid of the 10 projected head points farthest from the head centre.
NoseEstimate estimate_nose(const Cloud2& head_xy, const Point2& head_center);

// Smallest arc (degrees) containing every bearing in the list.
double angular_spread_deg(const std::vector<double>& bearings_deg);

struct FeatureInputs {
  const Cloud& pc_head;
  const QuadrantPartition& quadrants;
  const EllipseFit& body_ellipse;
  double facing_deg;
  const EllipseFit* head_ellipse;  // may be null; features imputed as 0
  Point2 head_center;
  double z_head;
  Point2 sensor_centroid;
};

// Feature vector in the subject-centric frame: origin at the body centre
// (x along the facing direction, y to the subject's left) and z relative to
// the crown height.
Eigen::VectorXd extract_features(const FeatureInputs& in);
Eigen::VectorXd extract_features(const SubjectObservation& obs);

// Transforms room-frame points into the subject-centric frame.
Cloud to_subject_frame(const Cloud& pts, const Point2& origin, double facing_deg, double z_ref);

struct FeatureTable {
  FeatureSchema schema;
  std::vector<std::string> frame_ids;
  std::vector<std::string> subject_ids;
  Eigen::VectorXd labels;  // NaN where unknown
  Eigen::MatrixXd values;  // rows = samples
};

void write_feature_csv(const std::filesystem::path& path, const FeatureTable& table);
FeatureTable read_feature_csv(const std::filesystem::path& path);

}  // namespace orient
