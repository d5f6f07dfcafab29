#include "orient/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace orient {

KdTree3::KdTree3(const Eigen::Matrix3Xd& pts, int leaf_size) : pts_(pts), leaf_size_(std::max(1, leaf_size)) {
  order_.resize(static_cast<std::size_t>(pts.cols()));
  std::iota(order_.begin(), order_.end(), Eigen::Index{0});
  nodes_.reserve(2 * order_.size() / static_cast<std::size_t>(leaf_size_) + 1);
  if (!order_.empty()) build(0, static_cast<int>(order_.size()), 0);
}

int KdTree3::build(int begin, int end, int depth) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= leaf_size_) return id;

  // Split on the axis of largest extent at the median.
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (int i = begin; i < end; ++i) {
    lo = lo.cwiseMin(pts_.col(order_[static_cast<std::size_t>(i)]));
    hi = hi.cwiseMax(pts_.col(order_[static_cast<std::size_t>(i)]));
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  (void)depth;
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](Eigen::Index a, Eigen::Index b) { return pts_(axis, a) < pts_(axis, b); });
  const double split = pts_(axis, order_[static_cast<std::size_t>(mid)]);
  const int left = build(begin, mid, depth + 1);
  const int right = build(mid, end, depth + 1);
  Node& n = nodes_[static_cast<std::size_t>(id)];
  n.axis = axis;
  n.split = split;
  n.left = left;
  n.right = right;
  return id;
}

void KdTree3::search(int node, const Eigen::Vector3d& q, int k, Eigen::Index self, std::vector<double>& heap) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  if (n.axis < 0) {
    for (int i = n.begin; i < n.end; ++i) {
      const Eigen::Index idx = order_[static_cast<std::size_t>(i)];
      if (idx == self) continue;
      const double dx = pts_(0, idx) - q.x();
      const double dy = pts_(1, idx) - q.y();
      const double dz = pts_(2, idx) - q.z();
      const double d2 = dx * dx + dy * dy + dz * dz;
      if (static_cast<int>(heap.size()) < k) {
        heap.push_back(d2);
        std::push_heap(heap.begin(), heap.end());
      } else if (d2 < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = d2;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  const int near = diff < 0 ? n.left : n.right;
  const int far = diff < 0 ? n.right : n.left;
  search(near, q, k, self, heap);
  if (static_cast<int>(heap.size()) < k || diff * diff <= heap.front()) search(far, q, k, self, heap);
}

std::vector<double> KdTree3::knn_sq_distances(const Eigen::Vector3d& q, int k, Eigen::Index self) const {
  std::vector<double> heap;
  heap.reserve(static_cast<std::size_t>(k) + 1);
  if (!nodes_.empty() && k > 0) search(0, q, k, self, heap);
  std::sort(heap.begin(), heap.end());
  return heap;
}

}  // namespace orient
