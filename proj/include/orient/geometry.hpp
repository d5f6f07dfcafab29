#pragma once

#include <array>
#include <vector>

#include "orient/core.hpp"
#include "orient/ellipse.hpp"
#include "orient/pca.hpp"

namespace orient {

inline Cloud2 project_xy(const Cloud& pts) { return pts.topRows<2>(); }

struct BodyOrientation {
  EllipseFit ellipse;
  double yaw_deg = 0.0;          // absolute facing direction
  Point2 facing = Point2::UnitX();  // unit normal to the frontal axis
  double mean_front_distance = 0.0;
  double mean_back_distance = 0.0;
  bool tie = false;
};

// Facing direction of a subject: the long axis of an ellipse fitted to the
// projected body points is the shoulder line; the front is the side on which
// head points lie at the larger mean perpendicular distance. Exact ties pick
// the normal pointing into the +x half-plane and set `tie`.
BodyOrientation body_orientation(const Cloud& pc_body, const Cloud& pc_head);

// Same decision given an already fitted body ellipse.
BodyOrientation orient_from_ellipse(const EllipseFit& body_ellipse, const Cloud2& head_xy);

enum Quadrant : int { kFrontLeft = 0, kFrontRight = 1, kBackLeft = 2, kBackRight = 3 };

struct QuadrantPartition {
  std::array<std::vector<Eigen::Index>, 4> indices;  // into pc_head

  std::size_t size(int q) const { return indices[static_cast<std::size_t>(q)].size(); }
};

// Splits head points by the frontal axis and the facing normal through the
// body centre. Points on an axis go to the lower-numbered quadrant.
QuadrantPartition partition_quadrants(const Cloud& pc_head, const EllipseFit& body_ellipse, double facing_deg);

}  // namespace orient
