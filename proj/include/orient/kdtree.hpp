#pragma once

#include <Eigen/Dense>

#include <vector>

namespace orient {

// Static 3-d tree over the columns of a 3xN matrix. The matrix must outlive
// the tree.
class KdTree3 {
 public:
  explicit KdTree3(const Eigen::Matrix3Xd& pts, int leaf_size = 12);

  // Squared distances to the k nearest points other than `self`
  // (pass -1 to include every point), ascending.
  std::vector<double> knn_sq_distances(const Eigen::Vector3d& q, int k, Eigen::Index self = -1) const;

 private:
  struct Node {
    int begin = 0, end = 0;  // range into order_
    int left = -1, right = -1;
    int axis = -1;  // -1 for leaves
    double split = 0.0;
  };

  int build(int begin, int end, int depth);
  void search(int node, const Eigen::Vector3d& q, int k, Eigen::Index self, std::vector<double>& heap) const;

  const Eigen::Matrix3Xd& pts_;
  int leaf_size_;
  std::vector<Eigen::Index> order_;
  std::vector<Node> nodes_;
};

}  // namespace orient
