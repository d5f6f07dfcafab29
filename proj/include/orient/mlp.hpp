#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "orient/dataset.hpp"

namespace orient {

struct MlpConfig {
  std::vector<int> hidden{64, 32};
  double learning_rate = 2e-3;
  int batch_size = 32;
  int max_epochs = 120;
  int patience = 15;
  double weight_decay = 1e-5;
  double target_scale = 90.0;  // labels are divided by this before training
};

// Per-feature z-score fitted on training rows only.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& x);
  // Returns the transposed, standardised matrix (features x samples).
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

struct MlpGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

// Fully connected tanh network with a linear scalar output.
struct MlpModel {
  std::vector<Eigen::MatrixXd> weights;  // layer l: out x in
  std::vector<Eigen::VectorXd> biases;
  Standardizer standardizer;
  double target_scale = 90.0;
  std::uint64_t seed = 0;
  double val_mae = 0.0;  // degrees, best epoch
  int epochs = 0;

  static MlpModel initialise(int inputs, const std::vector<int>& hidden, std::uint64_t seed);

  // Network output on standardised columns, in scaled target units.
  Eigen::RowVectorXd forward(const Eigen::MatrixXd& xs) const;
  // Yaw in degrees for raw feature rows.
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;

  // Half mean squared error on standardised columns `xs` against scaled
  // targets, with gradients when `grad` is non-null.
  double loss(const Eigen::MatrixXd& xs, const Eigen::RowVectorXd& targets, MlpGradients* grad) const;

  Eigen::Index parameter_count() const;
};

// Mini-batch Adam on half-MSE with early stopping on validation MAE; the
// returned model holds the best-epoch parameters. Throws NumericalError on
// a non-finite loss.
MlpModel train_mlp(const Dataset& train, const Dataset& val, std::uint64_t seed, const MlpConfig& cfg = {});

}  // namespace orient
