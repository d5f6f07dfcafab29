#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "orient/core.hpp"
#include "orient/ellipse.hpp"
#include "orient/geometry.hpp"

namespace orient {

// Every threshold of the pre-processing chain. Defaults are the published
// hyperparameters converted to millimetres.
struct PreprocessConfig {
  double crop_radius = 500.0;          // cylinder around the detection centroid
  double upper_body_fraction = 0.27;   // keep the top 27% of seated height
  int knn_k = 10;
  double knn_threshold = 50.0;         // mean distance to k neighbours
  double initial_split_offset = 150.0; // below mean built-in head height
  double refined_split_offset = 175.0; // below corrected head height
  double head_radius = 150.0;          // XY radial filter around head centre
  double body_radius = 250.0;          // XY radial filter around body centre
  double discrepancy_threshold = 100.0;
  double crown_gap = 1.0;              // max z drop to the next crown_neighbors points
  int crown_neighbors = 5;
  int min_crop_points = 100;
  int min_head_points = 20;
};

namespace flags {
inline constexpr std::uint32_t kUnusable = 1u << 0;          // too few points after cropping
inline constexpr std::uint32_t kHeadFitDegenerate = 1u << 1; // head centre fell back to centroid
inline constexpr std::uint32_t kCrownFallback = 1u << 2;     // z_head from median of top 10
inline constexpr std::uint32_t kSplitWidened = 1u << 3;      // initial split had too few head points
inline constexpr std::uint32_t kFrontTie = 1u << 4;
inline constexpr std::uint32_t kEmptyPartition = 1u << 5;
inline constexpr std::uint32_t kBodyFitDegenerate = 1u << 6;
inline constexpr std::uint32_t kTooFewPoints = 1u << 7;
}  // namespace flags

std::string describe_flags(std::uint32_t f);

struct HeadPosition {
  Point2 head_center = Point2::Zero();
  double z_head = 0.0;
  std::uint32_t flags = 0;  // kHeadFitDegenerate, kCrownFallback
};

struct SplitClouds {
  Cloud pc_head;
  Cloud pc_body;
  double threshold = 0.0;
};

struct ValidationReport {
  bool repeated_frame = false;
  double head_discrepancy_xy = 0.0;
  double head_discrepancy_z = 0.0;  // signed, corrected - built-in
  bool rejected = false;
  std::string reason;  // "", "repeat", "xy discrepancy", "z discrepancy"
};

Cloud select_columns(const Cloud& pts, const std::vector<Eigen::Index>& idx);

// Cylinder of crop_radius around the detection centroid, above
// (1 - upper_body_fraction) * z_head.
Cloud crop_roi(const Cloud& frame_points, const Point2& centroid, double z_head, const PreprocessConfig& cfg = {});

// Per-point mean distance to the k nearest other points of the same cloud.
Eigen::VectorXd knn_mean_distances(const Cloud& pts, int k);

// Single pass: drop points whose mean k-NN distance in the input cloud
// exceeds the threshold. Clouds with at most k points are returned as is.
Cloud knn_denoise(const Cloud& pts, int k = 10, double dist_threshold = 50.0,
                  std::vector<Eigen::Index>* kept = nullptr);

// Head/body split at ((z1 + z2) / 2) - initial_split_offset.
// Throws DataError("empty head"/"empty body") on empty partitions.
SplitClouds initial_split(const Cloud& pts, double z1, double z2, const PreprocessConfig& cfg = {});

// Head centre from a direct ellipse fit to the projected head, crown height
// from the highest point whose next `crown_neighbors` points are within
// `crown_gap` in z.
HeadPosition correct_head_position(const Cloud& pc_head, const PreprocessConfig& cfg = {});

// Crown height rule alone (descending scan), with median-of-top-10 fallback.
double crown_height(const Cloud& pts, const PreprocessConfig& cfg, bool* fallback = nullptr);

SplitClouds refined_split(const Cloud& pts, const HeadPosition& head, const PreprocessConfig& cfg = {});

bool same_points(const Cloud& a, const Cloud& b);

ValidationReport validate_frame(const PointCloudFrame& frame, const PointCloudFrame* prev,
                                const SubjectDetection& built_in, const HeadPosition& corrected,
                                const PreprocessConfig& cfg = {});

// Full per-subject chain for one frame.
struct SubjectObservation {
  SubjectDetection detection;
  std::uint32_t flags = 0;
  std::string error;  // set when the frame is unusable
  Eigen::Index cropped_points = 0;
  Eigen::Index denoised_removed = 0;
  HeadPosition head;        // corrected head position
  Cloud pc_head;
  Cloud pc_body;
  std::optional<BodyOrientation> body;
  std::optional<EllipseFit> head_ellipse;
  QuadrantPartition quadrants;
  ValidationReport validation;

  bool usable() const { return error.empty() && body.has_value(); }
  // Usable, not rejected by validation and free of degenerate fallbacks.
  bool clean() const;
};

SubjectObservation process_subject(const PointCloudFrame& frame, const SubjectDetection& detection,
                                   const PointCloudFrame* prev, const PreprocessConfig& cfg = {});

}  // namespace orient
