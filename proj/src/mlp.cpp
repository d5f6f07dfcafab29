#include "orient/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "orient/error.hpp"
#include "orient/rng.hpp"

namespace orient {

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
  Standardizer s;
  s.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd c = x.rowwise() - s.mean.transpose();
  s.scale = (c.array().square().colwise().sum() / std::max<double>(1.0, static_cast<double>(x.rows()))).sqrt().transpose();
  for (Eigen::Index i = 0; i < s.scale.size(); ++i)
    if (!(s.scale[i] > 1e-12)) s.scale[i] = 1.0;
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  return ((x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array()).matrix().transpose();
}

MlpModel MlpModel::initialise(int inputs, const std::vector<int>& hidden, std::uint64_t seed) {
  MlpModel m;
  m.seed = seed;
  Rng rng(seed);
  std::vector<int> sizes{inputs};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l], out = sizes[l + 1];
    const double limit = std::sqrt(6.0 / (in + out));  // Glorot uniform
    std::uniform_real_distribution<double> u(-limit, limit);
    Eigen::MatrixXd w(out, in);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = u(rng);
    m.weights.push_back(std::move(w));
    m.biases.push_back(Eigen::VectorXd::Zero(out));
  }
  return m;
}

Eigen::RowVectorXd MlpModel::forward(const Eigen::MatrixXd& xs) const {
  Eigen::MatrixXd a = xs;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Eigen::MatrixXd z = (weights[l] * a).colwise() + biases[l];
    if (l + 1 < weights.size()) z = z.array().tanh().matrix();
    a = std::move(z);
  }
  return a.row(0);
}

Eigen::VectorXd MlpModel::predict(const Eigen::MatrixXd& x) const {
  return (forward(standardizer.apply(x)) * target_scale).transpose();
}

double MlpModel::loss(const Eigen::MatrixXd& xs, const Eigen::RowVectorXd& targets, MlpGradients* grad) const {
  const std::size_t layers = weights.size();
  const double n = static_cast<double>(xs.cols());
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(layers + 1);
  acts.push_back(xs);
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = (weights[l] * acts.back()).colwise() + biases[l];
    if (l + 1 < layers) z = z.array().tanh().matrix();
    acts.push_back(std::move(z));
  }
  const Eigen::RowVectorXd err = acts.back().row(0) - targets;
  const double value = 0.5 * err.squaredNorm() / n;
  if (!grad) return value;

  grad->weights.resize(layers);
  grad->biases.resize(layers);
  Eigen::MatrixXd delta = err / n;  // dL/dz at the output
  for (std::size_t l = layers; l-- > 0;) {
    grad->weights[l] = delta * acts[l].transpose();
    grad->biases[l] = delta.rowwise().sum();
    if (l > 0) {
      const Eigen::MatrixXd back = weights[l].transpose() * delta;
      delta = (back.array() * (1.0 - acts[l].array().square())).matrix();
    }
  }
  return value;
}

Eigen::Index MlpModel::parameter_count() const {
  Eigen::Index c = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) c += weights[l].size() + biases[l].size();
  return c;
}

MlpModel train_mlp(const Dataset& train, const Dataset& val, std::uint64_t seed, const MlpConfig& cfg) {
  if (train.rows() == 0 || val.rows() == 0) throw DataError("train_mlp: empty train or validation set");
  if (train.cols() != val.cols()) throw DataError("train_mlp: train/validation feature mismatch");
  MlpModel model = MlpModel::initialise(static_cast<int>(train.cols()), cfg.hidden, seed);
  model.standardizer = Standardizer::fit(train.x);
  model.target_scale = cfg.target_scale;

  const Eigen::MatrixXd xs = model.standardizer.apply(train.x);
  const Eigen::RowVectorXd ys = (train.y / cfg.target_scale).transpose();
  const Eigen::MatrixXd xv = model.standardizer.apply(val.x);

  // Adam state.
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    mw.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
    vw.push_back(mw.back());
    mb.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
    vb.push_back(mb.back());
  }

  Rng rng(derive_seed(seed, "shuffle"));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(xs.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  MlpModel best = model;
  best.val_mae = std::numeric_limits<double>::infinity();
  int since_best = 0;
  long step = 0;
  MlpGradients g;
  const auto batch = static_cast<std::size_t>(std::max(1, cfg.batch_size));

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const std::vector<Eigen::Index> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(end));
      const double l = model.loss(xs(Eigen::all, idx), ys(idx), &g);
      if (!std::isfinite(l))
        throw NumericalError("train_mlp: non-finite loss (seed " + std::to_string(seed) + ")");
      ++step;
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (std::size_t k = 0; k < model.weights.size(); ++k) {
        g.weights[k] += cfg.weight_decay * model.weights[k];
        mw[k] = beta1 * mw[k] + (1 - beta1) * g.weights[k];
        vw[k] = beta2 * vw[k] + (1 - beta2) * g.weights[k].cwiseAbs2();
        model.weights[k].array() -=
            cfg.learning_rate * (mw[k].array() / c1) / ((vw[k].array() / c2).sqrt() + eps);
        mb[k] = beta1 * mb[k] + (1 - beta1) * g.biases[k];
        vb[k] = beta2 * vb[k] + (1 - beta2) * g.biases[k].cwiseAbs2();
        model.biases[k].array() -= cfg.learning_rate * (mb[k].array() / c1) / ((vb[k].array() / c2).sqrt() + eps);
      }
    }
    const Eigen::VectorXd pv = (model.forward(xv) * cfg.target_scale).transpose();
    const double mae = (pv - val.y).cwiseAbs().mean();
    if (!std::isfinite(mae)) throw NumericalError("train_mlp: diverged (seed " + std::to_string(seed) + ")");
    if (mae < best.val_mae) {
      best = model;
      best.val_mae = mae;
      best.epochs = epoch + 1;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  return best;
}

}  // namespace orient
