#include "orient/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>

#include "orient/ensemble.hpp"
#include "orient/error.hpp"

namespace orient {

SessionFeatures process_session(const SessionRecording& session, const PreprocessConfig& cfg, int workers) {
  struct Job {
    std::size_t frame;
    std::size_t det;
  };
  std::vector<Job> jobs;
  for (std::size_t f = 0; f < session.frames.size(); ++f)
    for (std::size_t d = 0; d < session.frames[f].detections.size(); ++d) jobs.push_back({f, d});

  const FeatureSchema schema = FeatureSchema::default_schema();
  std::vector<FrameRecord> records(jobs.size());
  std::vector<Eigen::VectorXd> rows(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), workers, [&](int j) {
    const auto& job = jobs[static_cast<std::size_t>(j)];
    const PointCloudFrame& frame = session.frames[job.frame];
    const SubjectDetection& det = frame.detections[job.det];
    const PointCloudFrame* prev = job.frame > 0 ? &session.frames[job.frame - 1] : nullptr;
    FrameRecord& r = records[static_cast<std::size_t>(j)];
    r.frame = std::to_string(job.frame);
    r.subject = det.id;
    r.t = frame.timestamp;
    const SubjectObservation obs = process_subject(frame, det, prev, cfg);
    r.flags = obs.flags;
    r.usable = obs.usable();
    r.rejected = obs.validation.rejected;
    r.reason = obs.error.empty() ? obs.validation.reason : obs.error;
    std::replace(r.reason.begin(), r.reason.end(), ',', ';');
    r.cropped_points = obs.cropped_points;
    r.head_points = obs.pc_head.cols();
    r.body_points = obs.pc_body.cols();
    r.z_head = obs.head.z_head;
    r.head_center = obs.head.head_center;
    if (obs.body) r.body_yaw = obs.body->yaw_deg;
    if (obs.clean()) {
      rows[static_cast<std::size_t>(j)] = extract_features(obs);
      r.in_table = true;
    }
  });

  SessionFeatures out;
  out.records = std::move(records);
  out.table.schema = schema;
  Eigen::Index n = 0;
  for (const auto& r : out.records) n += r.in_table;
  out.table.values.resize(n, static_cast<Eigen::Index>(schema.dimension()));
  out.table.labels = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  Eigen::Index k = 0;
  for (std::size_t j = 0; j < out.records.size(); ++j) {
    if (!out.records[j].in_table) continue;
    out.table.values.row(k++) = rows[j].transpose();
    out.table.frame_ids.push_back(out.records[j].frame);
    out.table.subject_ids.push_back(out.records[j].subject);
  }
  return out;
}

void append_rows(FeatureTable& dst, const FeatureTable& src) {
  if (dst.values.size() == 0 && dst.frame_ids.empty()) {
    dst = src;
    return;
  }
  if (dst.schema.hash() != src.schema.hash()) throw DataError("cannot append feature rows with a different schema");
  const Eigen::Index n0 = dst.values.rows(), n1 = src.values.rows();
  dst.values.conservativeResize(n0 + n1, Eigen::NoChange);
  dst.values.bottomRows(n1) = src.values;
  dst.labels.conservativeResize(n0 + n1);
  dst.labels.tail(n1) = src.labels;
  dst.frame_ids.insert(dst.frame_ids.end(), src.frame_ids.begin(), src.frame_ids.end());
  dst.subject_ids.insert(dst.subject_ids.end(), src.subject_ids.begin(), src.subject_ids.end());
}

std::size_t attach_labels(FeatureTable& table, const std::vector<BenchmarkLabel>& labels) {
  std::map<std::pair<std::string, std::string>, double> by_key;
  for (const auto& l : labels) by_key[{l.subject, l.frame}] = l.head_yaw;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < table.frame_ids.size(); ++i) {
    auto it = by_key.find({table.subject_ids[i], table.frame_ids[i]});
    if (it == by_key.end()) continue;
    table.labels[static_cast<Eigen::Index>(i)] = it->second;
    ++hit;
  }
  return hit;
}

void write_frame_records(const std::filesystem::path& path, const std::vector<FrameRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "frame,subject,t,usable,rejected,reason,flags,cropped_points,head_points,body_points,z_head,head_x,head_y,"
         "body_yaw\n";
  out.precision(10);
  for (const auto& r : records) {
    out << r.frame << ',' << r.subject << ',' << r.t << ',' << r.usable << ',' << r.rejected << ',' << r.reason << ','
        << describe_flags(r.flags) << ',' << r.cropped_points << ',' << r.head_points << ',' << r.body_points << ','
        << r.z_head << ',' << r.head_center.x() << ',' << r.head_center.y() << ',';
    if (r.body_yaw) out << *r.body_yaw;
    else out << "NA";
    out << '\n';
  }
}

}  // namespace orient
