#include "orient/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "orient/error.hpp"
#include "orient/kdtree.hpp"

namespace orient {

std::string describe_flags(std::uint32_t f) {
  static const std::pair<std::uint32_t, const char*> names[] = {
      {flags::kUnusable, "unusable"},
      {flags::kHeadFitDegenerate, "head_fit_degenerate"},
      {flags::kCrownFallback, "crown_fallback"},
      {flags::kSplitWidened, "split_widened"},
      {flags::kFrontTie, "front_tie"},
      {flags::kEmptyPartition, "empty_partition"},
      {flags::kBodyFitDegenerate, "body_fit_degenerate"},
      {flags::kTooFewPoints, "too_few_points"},
  };
  std::string out;
  for (const auto& [bit, name] : names) {
    if (f & bit) {
      if (!out.empty()) out += '|';
      out += name;
    }
  }
  return out;
}

Cloud select_columns(const Cloud& pts, const std::vector<Eigen::Index>& idx) { return pts(Eigen::all, idx); }

Cloud crop_roi(const Cloud& frame_points, const Point2& centroid, double z_head, const PreprocessConfig& cfg) {
  const double z_min = (1.0 - cfg.upper_body_fraction) * z_head;
  const double r2 = cfg.crop_radius * cfg.crop_radius;
  std::vector<Eigen::Index> keep;
  keep.reserve(static_cast<std::size_t>(frame_points.cols()));
  for (Eigen::Index i = 0; i < frame_points.cols(); ++i) {
    const double dx = frame_points(0, i) - centroid.x();
    const double dy = frame_points(1, i) - centroid.y();
    if (dx * dx + dy * dy <= r2 && frame_points(2, i) >= z_min) keep.push_back(i);
  }
  return select_columns(frame_points, keep);
}

Eigen::VectorXd knn_mean_distances(const Cloud& pts, int k) {
  const KdTree3 tree(pts);
  Eigen::VectorXd out(pts.cols());
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    const auto d2 = tree.knn_sq_distances(pts.col(i), k, i);
    double sum = 0.0;
    for (double v : d2) sum += std::sqrt(v);
    out[i] = sum / static_cast<double>(d2.size());
  }
  return out;
}

Cloud knn_denoise(const Cloud& pts, int k, double dist_threshold, std::vector<Eigen::Index>* kept) {
  std::vector<Eigen::Index> keep;
  if (pts.cols() <= k) {
    keep.resize(static_cast<std::size_t>(pts.cols()));
    for (Eigen::Index i = 0; i < pts.cols(); ++i) keep[static_cast<std::size_t>(i)] = i;
  } else {
    const Eigen::VectorXd mean_d = knn_mean_distances(pts, k);
    for (Eigen::Index i = 0; i < pts.cols(); ++i)
      if (!(mean_d[i] > dist_threshold)) keep.push_back(i);
  }
  Cloud out = select_columns(pts, keep);
  if (kept) *kept = std::move(keep);
  return out;
}

namespace {

SplitClouds split_at(const Cloud& pts, double threshold) {
  std::vector<Eigen::Index> head, body;
  for (Eigen::Index i = 0; i < pts.cols(); ++i) (pts(2, i) >= threshold ? head : body).push_back(i);
  return {select_columns(pts, head), select_columns(pts, body), threshold};
}

}  // namespace

SplitClouds initial_split(const Cloud& pts, double z1, double z2, const PreprocessConfig& cfg) {
  SplitClouds s = split_at(pts, 0.5 * (z1 + z2) - cfg.initial_split_offset);
  if (s.pc_head.cols() == 0) throw DataError("empty head");
  if (s.pc_body.cols() == 0) throw DataError("empty body");
  return s;
}

double crown_height(const Cloud& pts, const PreprocessConfig& cfg, bool* fallback) {
  if (pts.cols() == 0) throw DataError("crown height of empty cloud");
  std::vector<double> z(pts.row(2).begin(), pts.row(2).end());
  std::sort(z.begin(), z.end(), std::greater<>());
  const std::size_t m = static_cast<std::size_t>(cfg.crown_neighbors);
  for (std::size_t i = 0; i + m < z.size(); ++i) {
    if (z[i] - z[i + m] <= cfg.crown_gap) {
      if (fallback) *fallback = false;
      return z[i];
    }
  }
  if (fallback) *fallback = true;
  const std::size_t top = std::min<std::size_t>(10, z.size());
  // Median of the `top` highest values (already sorted descending).
  return top % 2 ? z[top / 2] : 0.5 * (z[top / 2 - 1] + z[top / 2]);
}

HeadPosition correct_head_position(const Cloud& pc_head, const PreprocessConfig& cfg) {
  if (pc_head.cols() < cfg.min_head_points) throw DataError("head cloud too small for position correction");
  HeadPosition hp;
  const Cloud2 xy = project_xy(pc_head);
  const Point2 centroid = xy.rowwise().mean();
  hp.head_center = centroid;
  try {
    const EllipseFit fit = fit_ellipse_direct(xy);
    // A fit whose centre leaves the head footprint is not a head outline.
    if ((fit.center - centroid).norm() <= cfg.head_radius && fit.semi_major <= 2.0 * cfg.head_radius)
      hp.head_center = fit.center;
    else
      hp.flags |= flags::kHeadFitDegenerate;
  } catch (const DegenerateError&) {
    hp.flags |= flags::kHeadFitDegenerate;
  }
  bool fallback = false;
  hp.z_head = crown_height(pc_head, cfg, &fallback);
  if (fallback) hp.flags |= flags::kCrownFallback;
  return hp;
}

SplitClouds refined_split(const Cloud& pts, const HeadPosition& head, const PreprocessConfig& cfg) {
  const double threshold = head.z_head - cfg.refined_split_offset;
  std::vector<Eigen::Index> head_idx, below;
  const double hr2 = cfg.head_radius * cfg.head_radius;
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    if (pts(2, i) >= threshold) {
      if ((pts.col(i).head<2>() - head.head_center).squaredNorm() <= hr2) head_idx.push_back(i);
    } else {
      below.push_back(i);
    }
  }
  std::vector<Eigen::Index> body_idx;
  if (!below.empty()) {
    const Cloud b = select_columns(pts, below);
    const Point2 body_center = b.topRows<2>().rowwise().mean();
    const double br2 = cfg.body_radius * cfg.body_radius;
    for (Eigen::Index i : below)
      if ((pts.col(i).head<2>() - body_center).squaredNorm() <= br2) body_idx.push_back(i);
  }
  if (head_idx.empty()) throw DataError("empty head");
  if (body_idx.empty()) throw DataError("empty body");
  return {select_columns(pts, head_idx), select_columns(pts, body_idx), threshold};
}

bool same_points(const Cloud& a, const Cloud& b) {
  if (a.cols() != b.cols()) return false;
  return std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

ValidationReport validate_frame(const PointCloudFrame& frame, const PointCloudFrame* prev,
                                const SubjectDetection& built_in, const HeadPosition& corrected,
                                const PreprocessConfig& cfg) {
  ValidationReport r;
  r.repeated_frame = prev != nullptr && same_points(frame.points, prev->points);
  r.head_discrepancy_xy = (corrected.head_center - built_in.centroid()).norm();
  r.head_discrepancy_z = corrected.z_head - built_in.mean_z();
  if (r.repeated_frame) {
    r.rejected = true;
    r.reason = "repeat";
  } else if (std::abs(r.head_discrepancy_z) > cfg.discrepancy_threshold) {
    r.rejected = true;
    r.reason = "z discrepancy";
  } else if (r.head_discrepancy_xy > cfg.discrepancy_threshold) {
    r.rejected = true;
    r.reason = "xy discrepancy";
  }
  return r;
}

bool SubjectObservation::clean() const {
  constexpr std::uint32_t bad = flags::kHeadFitDegenerate | flags::kCrownFallback | flags::kBodyFitDegenerate;
  return usable() && !validation.rejected && !(flags & bad);
}

namespace {

// Ellipse centre of the projected head when the fit is well formed.
std::optional<EllipseFit> try_head_ellipse(const Cloud& pc_head, const Point2& near, double radius) {
  if (pc_head.cols() < 6) return std::nullopt;
  try {
    EllipseFit fit = fit_ellipse_direct(Cloud2(project_xy(pc_head)));
    if ((fit.center - near).norm() > radius || fit.semi_major > 2.0 * radius) return std::nullopt;
    return fit;
  } catch (const NumericalError&) {
    return std::nullopt;
  }
}

}  // namespace

SubjectObservation process_subject(const PointCloudFrame& frame, const SubjectDetection& detection,
                                   const PointCloudFrame* prev, const PreprocessConfig& cfg) {
  SubjectObservation obs;
  obs.detection = detection;
  auto fail = [&](std::uint32_t f, std::string why) {
    obs.flags |= f | flags::kUnusable;
    obs.error = std::move(why);
    return obs;
  };

  const Point2 centroid = detection.centroid();
  const Cloud crop1 = crop_roi(frame.points, centroid, detection.mean_z(), cfg);
  if (crop1.cols() < cfg.min_crop_points) return fail(flags::kTooFewPoints, "too few points in region of interest");
  const Cloud den1 = knn_denoise(crop1, cfg.knn_k, cfg.knn_threshold);

  // Bootstrap split on the built-in head height; if the built-in estimate is
  // too high the head partition starves, so fall back to the cloud's top.
  SplitClouds first = split_at(den1, detection.mean_z() - cfg.initial_split_offset);
  if (first.pc_head.cols() < cfg.min_head_points && den1.cols() > 0) {
    obs.flags |= flags::kSplitWidened;
    first = split_at(den1, den1.row(2).maxCoeff() - cfg.initial_split_offset);
  }
  if (first.pc_head.cols() < cfg.min_head_points) return fail(flags::kEmptyPartition, "empty head");
  HeadPosition hp = correct_head_position(first.pc_head, cfg);
  obs.flags |= hp.flags & flags::kCrownFallback;

  // Re-crop with the corrected head height.
  const Cloud crop2 = crop_roi(frame.points, centroid, hp.z_head, cfg);
  obs.cropped_points = crop2.cols();
  if (crop2.cols() < cfg.min_crop_points) return fail(flags::kTooFewPoints, "too few points in region of interest");
  const Cloud den2 = same_points(crop2, crop1) ? den1 : knn_denoise(crop2, cfg.knn_k, cfg.knn_threshold);
  obs.denoised_removed = crop2.cols() - den2.cols();

  SplitClouds split;
  try {
    split = refined_split(den2, hp, cfg);
    // The bootstrap head cloud may include shoulders; re-centre on the
    // refined head and split once more.
    if (auto refit = try_head_ellipse(split.pc_head, hp.head_center, cfg.head_radius)) {
      hp.head_center = refit->center;
      hp.flags &= ~flags::kHeadFitDegenerate;
      split = refined_split(den2, hp, cfg);
    }
  } catch (const DataError& e) {
    return fail(flags::kEmptyPartition, e.what());
  }
  obs.flags |= hp.flags;
  if (split.pc_head.cols() < cfg.min_head_points || split.pc_body.cols() < 6)
    return fail(flags::kEmptyPartition, "head or body partition too small");

  obs.head_ellipse = try_head_ellipse(split.pc_head, hp.head_center, cfg.head_radius);
  if (!obs.head_ellipse) obs.flags |= flags::kHeadFitDegenerate;
  obs.head = hp;
  obs.pc_head = std::move(split.pc_head);
  obs.pc_body = std::move(split.pc_body);

  try {
    const EllipseFit body_fit = fit_ellipse_direct(Cloud2(project_xy(obs.pc_body)));
    obs.body = orient_from_ellipse(body_fit, project_xy(obs.pc_head));
  } catch (const NumericalError& e) {
    return fail(flags::kBodyFitDegenerate, e.what());
  }
  if (obs.body->tie) obs.flags |= flags::kFrontTie;
  obs.quadrants = partition_quadrants(obs.pc_head, obs.body->ellipse, obs.body->yaw_deg);
  obs.validation = validate_frame(frame, prev, detection, obs.head, cfg);
  return obs;
}

}  // namespace orient
