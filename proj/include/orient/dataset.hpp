#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "orient/features.hpp"

namespace orient {

// Feature matrix with head-yaw labels (degrees) and a subject id per row.
struct Dataset {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<std::string> groups;
  FeatureSchema schema;

  Eigen::Index rows() const { return x.rows(); }
  Eigen::Index cols() const { return x.cols(); }

  Dataset rows_subset(const std::vector<Eigen::Index>& rows) const;
  Dataset cols_subset(const std::vector<Eigen::Index>& cols) const;
  // Distinct subject ids, sorted.
  std::vector<std::string> unique_groups() const;
  std::vector<Eigen::Index> rows_of(const std::string& group) const;

  // Throws DataError on inconsistent sizes, non-finite values or labels
  // outside [-180, 180).
  void validate() const;
};

// Rows with a finite label.
Dataset dataset_from_table(const FeatureTable& table);

struct RowSplit {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> val;
};

// Holds out round(fraction * n_g) rows of every subject g (at least one
// when the subject has two or more rows).
RowSplit stratified_split(const Dataset& data, double val_fraction, std::uint64_t seed);

// Appends `n` columns of standard normal noise ("noise_1".."noise_n",
// auxiliary family), e.g. to probe feature selection.
Dataset append_noise_features(const Dataset& data, int n, std::uint64_t seed);

double mean_absolute_error(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth);

}  // namespace orient
