#include "orient/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "orient/error.hpp"
#include "orient/rng.hpp"

namespace orient {

double RegressionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  int n = 0;
  while (nodes_[static_cast<std::size_t>(n)].feature >= 0) {
    const Node& node = nodes_[static_cast<std::size_t>(n)];
    n = row[node.feature] <= node.threshold ? node.left : node.right;
  }
  return nodes_[static_cast<std::size_t>(n)].value;
}

double RegressionTree::predict(const Eigen::MatrixXd& x, Eigen::Index row) const {
  int n = 0;
  while (nodes_[static_cast<std::size_t>(n)].feature >= 0) {
    const Node& node = nodes_[static_cast<std::size_t>(n)];
    n = x(row, node.feature) <= node.threshold ? node.left : node.right;
  }
  return nodes_[static_cast<std::size_t>(n)].value;
}

double ForestModel::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  double s = 0.0;
  for (const auto& t : trees) s += t.predict(row);
  return trees.empty() ? 0.0 : s / static_cast<double>(trees.size());
}

Eigen::VectorXd ForestModel::predict(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
  if (trees.empty()) return out;
  for (const auto& t : trees)
    for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] += t.predict(x, i);
  return out / static_cast<double>(trees.size());
}

namespace {

struct TreeBuilder {
  const Eigen::MatrixXd& x;
  const Eigen::VectorXd& y;
  const ForestConfig& cfg;
  int mtry;
  Rng& rng;
  Eigen::VectorXd& importance;
  RegressionTree& tree;
  std::vector<int> features;
  std::vector<std::pair<double, double>> buf;

  int build(std::vector<Eigen::Index>& idx, int depth) {
    const int id = static_cast<int>(tree.nodes().size());
    tree.nodes().push_back({});
    const auto n = static_cast<double>(idx.size());
    double sum = 0.0;
    for (auto i : idx) sum += y[i];
    tree.nodes()[static_cast<std::size_t>(id)].value = sum / n;

    const auto min_leaf = static_cast<std::size_t>(cfg.min_samples_leaf);
    if (depth >= cfg.max_depth || idx.size() < 2 * min_leaf) return id;
    double sq = 0.0;
    for (auto i : idx) sq += (y[i] - sum / n) * (y[i] - sum / n);
    if (sq <= 1e-12 * n) return id;

    // Partial Fisher-Yates draw of mtry candidate features.
    const int d = static_cast<int>(features.size());
    for (int k = 0; k < mtry; ++k) {
      std::uniform_int_distribution<int> pick(k, d - 1);
      std::swap(features[static_cast<std::size_t>(k)], features[static_cast<std::size_t>(pick(rng))]);
    }

    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    const double base = sum * sum / n;
    for (int k = 0; k < mtry; ++k) {
      const int f = features[static_cast<std::size_t>(k)];
      buf.clear();
      for (auto i : idx) buf.emplace_back(x(i, f), y[i]);
      std::sort(buf.begin(), buf.end());
      double left = 0.0;
      for (std::size_t j = 0; j + 1 < buf.size(); ++j) {
        left += buf[j].second;
        const std::size_t nl = j + 1, nr = buf.size() - nl;
        if (nl < min_leaf) continue;
        if (nr < min_leaf) break;
        if (!(buf[j].first < buf[j + 1].first)) continue;
        const double right = sum - left;
        const double gain = left * left / static_cast<double>(nl) + right * right / static_cast<double>(nr) - base;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = 0.5 * (buf[j].first + buf[j + 1].first);
        }
      }
    }
    if (best_feature < 0 || best_gain <= 1e-12) return id;

    importance[best_feature] += best_gain;
    std::vector<Eigen::Index> li, ri;
    for (auto i : idx) (x(i, best_feature) <= best_threshold ? li : ri).push_back(i);
    idx.clear();
    idx.shrink_to_fit();
    const int l = build(li, depth + 1);
    const int r = build(ri, depth + 1);
    auto& node = tree.nodes()[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return id;
  }
};

}  // namespace

ForestModel train_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestConfig& cfg,
                         std::uint64_t seed) {
  const Eigen::Index n = x.rows(), d = x.cols();
  if (n < 2 || d < 1 || y.size() != n) throw DataError("train_forest: need at least 2 rows and 1 feature");
  ForestModel model;
  model.importances = Eigen::VectorXd::Zero(d);
  model.constant_labels = (y.array() == y[0]).all();
  const int mtry = cfg.mtry > 0 ? std::min<int>(cfg.mtry, static_cast<int>(d))
                                : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
  Rng rng(seed);
  model.trees.resize(static_cast<std::size_t>(cfg.n_trees));
  for (auto& tree : model.trees) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    if (cfg.bootstrap) {
      std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
      for (auto& i : idx) i = pick(rng);
    } else {
      std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    }
    TreeBuilder b{x, y, cfg, mtry, rng, model.importances, tree, {}, {}};
    b.features.resize(static_cast<std::size_t>(d));
    std::iota(b.features.begin(), b.features.end(), 0);
    b.build(idx, 0);
  }
  const double total = model.importances.sum();
  if (total > 0) model.importances /= total;
  else model.importances.setZero();
  return model;
}

ForestModel train_forest(const Dataset& train, int n_trees, std::uint64_t seed) {
  if (train.rows() < 20) throw DataError("train_forest: need at least 20 rows");
  ForestConfig cfg;
  cfg.n_trees = n_trees;
  return train_forest(train.x, train.y, cfg, seed);
}

RfeTrace rf_rfe(const Dataset& train, const Dataset& val, const RfeConfig& cfg, std::uint64_t seed) {
  const Eigen::Index d = train.cols();
  if (d < 2) throw DataError("rf_rfe: need at least two features");
  if (val.rows() == 0) throw DataError("rf_rfe: empty validation set");
  RfeTrace trace;
  std::vector<Eigen::Index> active(static_cast<std::size_t>(d));
  std::iota(active.begin(), active.end(), Eigen::Index{0});
  std::size_t step = 0;
  while (!active.empty()) {
    const Eigen::MatrixXd xt = train.x(Eigen::all, active);
    const Eigen::MatrixXd xv = val.x(Eigen::all, active);
    const ForestModel forest = train_forest(xt, train.y, cfg.forest, derive_seed(seed, step));
    RfeStep s;
    s.active = active;
    s.val_mae = mean_absolute_error(forest.predict(xv), val.y);
    std::size_t worst = 0;
    for (std::size_t k = 1; k < active.size(); ++k)
      if (forest.importances[static_cast<Eigen::Index>(k)] < forest.importances[static_cast<Eigen::Index>(worst)])
        worst = k;  // strict: ties keep the lower schema index
    s.eliminated = active[worst];
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(worst));
    trace.steps.push_back(std::move(s));
    ++step;
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < trace.steps.size(); ++k)
    if (trace.steps[k].val_mae <= trace.steps[best].val_mae) best = k;  // later steps are smaller sets
  trace.optimal = trace.steps[best].active;
  trace.optimal_mae = trace.steps[best].val_mae;
  return trace;
}

RfeTrace rf_rfe(const Dataset& data, const RfeConfig& cfg, std::uint64_t seed) {
  const RowSplit split = stratified_split(data, cfg.val_fraction, derive_seed(seed, "rfe-split"));
  return rf_rfe(data.rows_subset(split.train), data.rows_subset(split.val), cfg, seed);
}

}  // namespace orient
