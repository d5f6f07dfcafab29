#include "orient/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "orient/angle.hpp"
#include "orient/error.hpp"
#include "orient/rng.hpp"

namespace orient {

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::clamp(workers, 1, std::max(1, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

SubsetSelection forward_subset_selection(const std::vector<Eigen::VectorXd>& preds, const std::vector<double>& mae,
                                         const Eigen::VectorXd& y, std::size_t initial) {
  if (preds.size() < initial || initial == 0) throw DataError("ensemble: pool smaller than the initial ensemble");
  if (preds.size() != mae.size()) throw DataError("ensemble: prediction/MAE count mismatch");
  SubsetSelection s;
  s.ranking.resize(preds.size());
  std::iota(s.ranking.begin(), s.ranking.end(), std::size_t{0});
  std::stable_sort(s.ranking.begin(), s.ranking.end(), [&](std::size_t a, std::size_t b) { return mae[a] < mae[b]; });

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(y.size());
  for (std::size_t k = 0; k < initial; ++k) {
    sum += preds[s.ranking[k]];
    s.selected.push_back(s.ranking[k]);
  }
  auto score = [&](const Eigen::VectorXd& total, std::size_t count) {
    return (total / static_cast<double>(count) - y).cwiseAbs().mean();
  };
  s.initial_mae = s.final_mae = score(sum, initial);
  s.trace.push_back(s.final_mae);
  for (std::size_t k = initial; k < s.ranking.size(); ++k) {
    const Eigen::VectorXd candidate = sum + preds[s.ranking[k]];
    const double m = score(candidate, k + 1);
    if (!(m < s.final_mae)) {
      s.rejected_mae = m;
      break;
    }
    sum = candidate;
    s.final_mae = m;
    s.selected.push_back(s.ranking[k]);
    s.trace.push_back(m);
  }
  return s;
}

Eigen::VectorXd Ensemble::predict(const Eigen::MatrixXd& x) const {
  if (members.empty()) throw DataError("ensemble has no members");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(x.rows());
  for (const auto& m : members) sum += m.predict(x);
  sum /= static_cast<double>(members.size());
  return sum.unaryExpr([](double v) { return normalize_deg(v); });
}

Ensemble build_ensemble(const std::vector<MlpModel>& pool, const Dataset& val, std::size_t initial,
                        SubsetSelection* selection) {
  std::vector<Eigen::VectorXd> preds;
  std::vector<double> mae;
  for (const auto& m : pool) {
    preds.push_back(m.predict(val.x));
    mae.push_back(m.val_mae);
  }
  const SubsetSelection s = forward_subset_selection(preds, mae, val.y, initial);
  Ensemble e;
  for (std::size_t i : s.selected) e.members.push_back(pool[i]);
  e.pool_rank = s.ranking;
  e.initial_val_mae = s.initial_mae;
  e.val_mae = s.final_mae;
  if (selection) *selection = s;
  return e;
}

Eigen::VectorXd HeadYawModel::predict(const Eigen::MatrixXd& x, const FeatureSchema& input_schema) const {
  if (input_schema.hash() != schema.hash())
    throw DataError("feature schema mismatch: model " + schema.hash() + " vs input " + input_schema.hash());
  if (x.cols() != static_cast<Eigen::Index>(schema.dimension())) throw DataError("feature column count mismatch");
  return ensemble.predict(x(Eigen::all, selected));
}

HeadYawModel train_head_model(const Dataset& data, const LearnConfig& cfg, std::uint64_t seed, TrainReport* report,
                              const FitObserver& observer) {
  data.validate();
  HeadYawModel model;
  model.schema = data.schema;
  model.config = cfg;
  model.seed = seed;

  const RowSplit split = stratified_split(data, cfg.val_fraction, derive_seed(seed, "val-split"));
  if (split.train.empty() || split.val.empty()) throw DataError("train_head_model: not enough rows to split");
  if (observer) {
    observer("train", split.train);
    observer("validation", split.val);
  }
  const Dataset train = data.rows_subset(split.train);
  const Dataset val = data.rows_subset(split.val);

  TrainReport local;
  TrainReport& rep = report ? *report : local;
  if (cfg.use_rfe && data.cols() >= 2) {
    rep.rfe = rf_rfe(train, val, cfg.rfe, derive_seed(seed, "rfe"));
    model.selected = rep.rfe.optimal;
  } else {
    model.selected.resize(static_cast<std::size_t>(data.cols()));
    std::iota(model.selected.begin(), model.selected.end(), Eigen::Index{0});
  }
  const Dataset train_sel = train.cols_subset(model.selected);
  const Dataset val_sel = val.cols_subset(model.selected);

  std::vector<MlpModel> pool(static_cast<std::size_t>(cfg.pool_size));
  parallel_for(cfg.pool_size, cfg.workers, [&](int m) {
    pool[static_cast<std::size_t>(m)] =
        train_mlp(train_sel, val_sel, derive_seed(seed, static_cast<std::uint64_t>(m) + 1000), cfg.mlp);
  });
  rep.pool_val_mae.clear();
  for (const auto& m : pool) rep.pool_val_mae.push_back(m.val_mae);

  model.ensemble = build_ensemble(pool, val_sel, static_cast<std::size_t>(cfg.initial_ensemble), &rep.selection);
  return model;
}

FoldResult run_fold(const Dataset& data, const std::string& held_out, const LearnConfig& cfg, std::uint64_t seed,
                    const FitObserver& observer) {
  std::vector<Eigen::Index> train_rows, test_rows;
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    (data.groups[static_cast<std::size_t>(i)] == held_out ? test_rows : train_rows).push_back(i);
  if (test_rows.empty()) throw DataError("run_fold: unknown subject '" + held_out + "'");

  FoldResult fold;
  fold.subject = held_out;
  fold.test_rows = test_rows;
  // Observer sees indices of the full dataset.
  FitObserver mapped;
  if (observer) {
    mapped = [&](const char* stage, const std::vector<Eigen::Index>& rows) {
      std::vector<Eigen::Index> global;
      for (auto r : rows) global.push_back(train_rows[static_cast<std::size_t>(r)]);
      observer(stage, global);
    };
  }
  fold.model = train_head_model(data.rows_subset(train_rows), cfg, seed, &fold.report, mapped);
  const Dataset test = data.rows_subset(test_rows);
  fold.predictions = fold.model.predict(test.x, data.schema);
  fold.mae = mean_absolute_error(fold.predictions, test.y);
  return fold;
}

LosoResult leave_one_subject_out(const Dataset& data, const LearnConfig& cfg, std::uint64_t seed,
                                 const FitObserver& observer) {
  data.validate();
  LosoResult result;
  std::vector<std::string> subjects;
  for (const auto& g : data.unique_groups()) {
    if (static_cast<int>(data.rows_of(g).size()) < cfg.min_subject_samples) result.excluded.push_back(g);
    else subjects.push_back(g);
  }
  if (subjects.size() < 3) throw DataError("leave_one_subject_out: need at least 3 subjects");

  // Excluded subjects are dropped entirely.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    if (std::find(result.excluded.begin(), result.excluded.end(), data.groups[static_cast<std::size_t>(i)]) ==
        result.excluded.end())
      keep.push_back(i);
  const Dataset usable = data.rows_subset(keep);

  LearnConfig inner = cfg;
  result.folds.resize(subjects.size());
  // Parallelise across folds; pool members inside a fold then run serially.
  const int fold_workers = std::min<int>(cfg.workers, static_cast<int>(subjects.size()));
  inner.workers = fold_workers > 1 ? 1 : cfg.workers;
  parallel_for(static_cast<int>(subjects.size()), fold_workers, [&](int f) {
    const auto& s = subjects[static_cast<std::size_t>(f)];
    FitObserver mapped;
    if (observer) {
      mapped = [&](const char* stage, const std::vector<Eigen::Index>& rows) {
        std::vector<Eigen::Index> global;
        for (auto r : rows) global.push_back(keep[static_cast<std::size_t>(r)]);
        observer(stage, global);
      };
    }
    result.folds[static_cast<std::size_t>(f)] = run_fold(usable, s, inner, derive_seed(seed, s), mapped);
    for (auto& r : result.folds[static_cast<std::size_t>(f)].test_rows) r = keep[static_cast<std::size_t>(r)];
  });
  double sum = 0.0;
  for (const auto& f : result.folds) sum += f.mae;
  result.mean_mae = sum / static_cast<double>(result.folds.size());
  return result;
}

}  // namespace orient
