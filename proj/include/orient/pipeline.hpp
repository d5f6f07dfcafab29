#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "orient/features.hpp"
#include "orient/preprocess.hpp"
#include "orient/synth.hpp"

namespace orient {

// Per (frame, subject) outcome of the pre-processing chain.
struct FrameRecord {
  std::string frame;    // frame index within the session
  std::string subject;
  double t = 0.0;
  std::uint32_t flags = 0;
  bool usable = false;
  bool rejected = false;
  std::string reason;   // validation reason or processing error
  Eigen::Index cropped_points = 0;
  Eigen::Index head_points = 0;
  Eigen::Index body_points = 0;
  double z_head = 0.0;
  Point2 head_center = Point2::Zero();
  std::optional<double> body_yaw;
  bool in_table = false;  // clean frames become feature rows
};

struct SessionFeatures {
  std::vector<FrameRecord> records;
  FeatureTable table;
};

// Runs every detection of every frame through the chain and extracts
// features from the clean observations. Frames are independent apart from
// the repeat check against the previous frame.
SessionFeatures process_session(const SessionRecording& session, const PreprocessConfig& cfg = {},
                                int workers = 1);

// Appends rows; schemas must match.
void append_rows(FeatureTable& dst, const FeatureTable& src);

// Fills labels by (subject, frame); rows without a label stay NaN.
std::size_t attach_labels(FeatureTable& table, const std::vector<BenchmarkLabel>& labels);

void write_frame_records(const std::filesystem::path& path, const std::vector<FrameRecord>& records);

}  // namespace orient
