#include "orient/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace orient {

BodyOrientation orient_from_ellipse(const EllipseFit& body_ellipse, const Cloud2& head_xy) {
  if (head_xy.cols() == 0) throw DataError("body orientation undefined: empty head cloud");
  BodyOrientation out;
  out.ellipse = body_ellipse;
  const Point2 axis = body_ellipse.major_axis();
  const Point2 normal(-axis.y(), axis.x());
  const Eigen::VectorXd signed_dist = normal.transpose() * (head_xy.colwise() - body_ellipse.center);

  double pos_sum = 0.0, neg_sum = 0.0;
  Eigen::Index pos_n = 0, neg_n = 0;
  for (Eigen::Index i = 0; i < signed_dist.size(); ++i) {
    const double s = signed_dist[i];
    if (s > 0) {
      pos_sum += s;
      ++pos_n;
    } else if (s < 0) {
      neg_sum -= s;
      ++neg_n;
    }
  }
  const double pos_mean = pos_n ? pos_sum / static_cast<double>(pos_n) : 0.0;
  const double neg_mean = neg_n ? neg_sum / static_cast<double>(neg_n) : 0.0;

  Point2 facing = normal;
  double front = pos_mean, back = neg_mean;
  const double tol = 1e-9 * std::max({1.0, pos_mean, neg_mean});
  if (std::abs(pos_mean - neg_mean) <= tol) {
    out.tie = true;
    if (facing.x() < 0 || (facing.x() == 0 && facing.y() < 0)) facing = -facing;
  } else if (neg_mean > pos_mean) {
    facing = -normal;
    std::swap(front, back);
  }
  out.facing = facing;
  out.mean_front_distance = front;
  out.mean_back_distance = back;
  out.yaw_deg = normalize_deg(std::atan2(facing.y(), facing.x()) * kDegPerRad);
  return out;
}

BodyOrientation body_orientation(const Cloud& pc_body, const Cloud& pc_head) {
  if (pc_head.cols() == 0) throw DataError("body orientation undefined: empty head cloud");
  const EllipseFit fit = fit_ellipse_direct(Cloud2(project_xy(pc_body)));
  return orient_from_ellipse(fit, project_xy(pc_head));
}

QuadrantPartition partition_quadrants(const Cloud& pc_head, const EllipseFit& body_ellipse, double facing_deg) {
  const double r = facing_deg * kRadPerDeg;
  const Point2 fwd(std::cos(r), std::sin(r));
  const Point2 left(-fwd.y(), fwd.x());
  QuadrantPartition part;
  for (Eigen::Index i = 0; i < pc_head.cols(); ++i) {
    const Point2 rel = pc_head.col(i).head<2>() - body_ellipse.center;
    const bool front = rel.dot(fwd) >= 0.0;
    const bool is_left = rel.dot(left) >= 0.0;
    const int q = front ? (is_left ? kFrontLeft : kFrontRight) : (is_left ? kBackLeft : kBackRight);
    part.indices[static_cast<std::size_t>(q)].push_back(i);
  }
  return part;
}

}  // namespace orient
