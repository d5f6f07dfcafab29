#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "orient/dataset.hpp"
#include "orient/forest.hpp"
#include "orient/mlp.hpp"

namespace orient {

struct SubsetSelection {
  std::vector<std::size_t> ranking;   // pool indices by validation MAE, ascending
  std::vector<std::size_t> selected;  // ranking prefix kept in the ensemble
  double initial_mae = 0.0;           // best `initial` members
  double final_mae = 0.0;
  std::vector<double> trace;          // ensemble MAE after each accepted size
  double rejected_mae = std::numeric_limits<double>::quiet_NaN();  // first candidate that failed to improve
};

// Forward subset selection over a ranked pool: start from the best
// `initial` members and append the next-ranked member while the averaged
// validation MAE strictly improves.
SubsetSelection forward_subset_selection(const std::vector<Eigen::VectorXd>& val_predictions,
                                         const std::vector<double>& member_mae, const Eigen::VectorXd& val_y,
                                         std::size_t initial = 3);

struct Ensemble {
  std::vector<MlpModel> members;  // in rank order
  std::vector<std::size_t> pool_rank;
  double initial_val_mae = 0.0;
  double val_mae = 0.0;

  // Unweighted mean of member outputs, wrapped into [-180, 180).
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

Ensemble build_ensemble(const std::vector<MlpModel>& pool, const Dataset& val, std::size_t initial = 3,
                        SubsetSelection* selection = nullptr);

struct LearnConfig {
  RfeConfig rfe;
  bool use_rfe = true;
  MlpConfig mlp;
  int pool_size = 20;
  int initial_ensemble = 3;
  double val_fraction = 0.15;
  int min_subject_samples = 10;
  int workers = 1;
};

// Trained head-yaw estimator: feature selection, standardisation and
// ensemble, tied to the schema it was trained on.
struct HeadYawModel {
  std::string format = "orient-model/1";
  FeatureSchema schema;
  std::vector<Eigen::Index> selected;  // schema indices fed to the networks
  Ensemble ensemble;
  LearnConfig config;
  std::uint64_t seed = 0;

  // Rows of full-schema features -> yaw degrees. Throws DataError when the
  // schema hash differs from the training schema.
  Eigen::VectorXd predict(const Eigen::MatrixXd& x, const FeatureSchema& input_schema) const;
};

// Rows handed to a fitting routine, for leakage auditing.
using FitObserver = std::function<void(const char* stage, const std::vector<Eigen::Index>& rows)>;

struct TrainReport {
  RfeTrace rfe;
  std::vector<double> pool_val_mae;
  SubsetSelection selection;
};

// Validation split, optional RF-RFE, pool of MLPs and forward subset
// selection, all computed from `data` alone.
HeadYawModel train_head_model(const Dataset& data, const LearnConfig& cfg, std::uint64_t seed,
                              TrainReport* report = nullptr, const FitObserver& observer = {});

struct FoldResult {
  std::string subject;
  std::vector<Eigen::Index> test_rows;
  Eigen::VectorXd predictions;
  double mae = 0.0;
  HeadYawModel model;
  TrainReport report;
};

FoldResult run_fold(const Dataset& data, const std::string& held_out, const LearnConfig& cfg, std::uint64_t seed,
                    const FitObserver& observer = {});

struct LosoResult {
  std::vector<FoldResult> folds;  // sorted by subject id
  std::vector<std::string> excluded;
  double mean_mae = 0.0;          // unweighted across subjects
};

LosoResult leave_one_subject_out(const Dataset& data, const LearnConfig& cfg, std::uint64_t seed,
                                 const FitObserver& observer = {});

// Runs fn(0..n-1) on up to `workers` threads; results must be written to
// per-index slots by the caller.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace orient
