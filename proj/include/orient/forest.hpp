#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "orient/dataset.hpp"

namespace orient {

struct ForestConfig {
  int n_trees = 40;
  int max_depth = 14;
  int min_samples_leaf = 3;
  int mtry = 0;  // features tried per split; 0 means floor(sqrt(d))
  bool bootstrap = true;
};

class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    double value = 0.0;
  };

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  double predict(const Eigen::MatrixXd& x, Eigen::Index row) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  std::vector<Node>& nodes() { return nodes_; }

 private:
  std::vector<Node> nodes_;
};

// Bagged CART regression forest. Importances are the total squared-error
// reduction credited to each feature, normalised to sum to one (all zero
// when the labels are constant).
struct ForestModel {
  std::vector<RegressionTree> trees;
  Eigen::VectorXd importances;
  bool constant_labels = false;

  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

ForestModel train_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestConfig& cfg,
                         std::uint64_t seed);
ForestModel train_forest(const Dataset& train, int n_trees, std::uint64_t seed);

struct RfeConfig {
  ForestConfig forest;
  double val_fraction = 0.15;
};

struct RfeStep {
  std::vector<Eigen::Index> active;  // schema indices, ascending
  double val_mae = 0.0;
  Eigen::Index eliminated = -1;      // removed after this step
};

struct RfeTrace {
  std::vector<RfeStep> steps;        // sizes d, d-1, ..., 1
  std::vector<Eigen::Index> optimal;
  double optimal_mae = 0.0;
};

// Recursive feature elimination: each step fits a forest on the active
// features, scores it on the validation rows and drops the least important
// feature (ties drop the lowest schema index). The optimal set minimises
// validation MAE, preferring the smaller set on ties.
RfeTrace rf_rfe(const Dataset& train, const Dataset& val, const RfeConfig& cfg, std::uint64_t seed);
RfeTrace rf_rfe(const Dataset& data, const RfeConfig& cfg, std::uint64_t seed);

}  // namespace orient
