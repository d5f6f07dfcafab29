#include "orient/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "orient/error.hpp"
#include "orient/rng.hpp"

namespace orient {

Dataset Dataset::rows_subset(const std::vector<Eigen::Index>& r) const {
  Dataset d;
  d.x = x(r, Eigen::all);
  d.y = y(r);
  d.groups.reserve(r.size());
  for (auto i : r) d.groups.push_back(groups[static_cast<std::size_t>(i)]);
  d.schema = schema;
  return d;
}

Dataset Dataset::cols_subset(const std::vector<Eigen::Index>& c) const {
  Dataset d;
  d.x = x(Eigen::all, c);
  d.y = y;
  d.groups = groups;
  std::vector<FeatureEntry> e;
  for (auto i : c) e.push_back(schema.entries().at(static_cast<std::size_t>(i)));
  d.schema = FeatureSchema(schema.version() + "+subset", std::move(e));
  return d;
}

std::vector<std::string> Dataset::unique_groups() const {
  std::set<std::string> s(groups.begin(), groups.end());
  return {s.begin(), s.end()};
}

std::vector<Eigen::Index> Dataset::rows_of(const std::string& g) const {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < groups.size(); ++i)
    if (groups[i] == g) out.push_back(static_cast<Eigen::Index>(i));
  return out;
}

void Dataset::validate() const {
  if (y.size() != x.rows() || static_cast<Eigen::Index>(groups.size()) != x.rows())
    throw DataError("dataset: inconsistent row counts");
  if (static_cast<Eigen::Index>(schema.dimension()) != x.cols())
    throw DataError("dataset: feature count does not match schema");
  if (!x.allFinite()) throw DataError("dataset: non-finite feature value");
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (!(y[i] >= -180.0 && y[i] < 180.0)) throw DataError("dataset: label outside [-180, 180)");
}

Dataset dataset_from_table(const FeatureTable& t) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < t.labels.size(); ++i)
    if (std::isfinite(t.labels[i])) keep.push_back(i);
  Dataset d;
  d.x = t.values(keep, Eigen::all);
  d.y = t.labels(keep);
  for (auto i : keep) d.groups.push_back(t.subject_ids[static_cast<std::size_t>(i)]);
  d.schema = t.schema;
  d.validate();
  return d;
}

RowSplit stratified_split(const Dataset& data, double val_fraction, std::uint64_t seed) {
  RowSplit s;
  std::vector<bool> is_val(static_cast<std::size_t>(data.rows()), false);
  for (const auto& g : data.unique_groups()) {
    auto rows = data.rows_of(g);
    Rng rng(derive_seed(seed, g));
    std::shuffle(rows.begin(), rows.end(), rng);
    auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(rows.size())));
    if (rows.size() >= 2) n_val = std::clamp<std::size_t>(n_val, 1, rows.size() - 1);
    else n_val = 0;
    for (std::size_t i = 0; i < n_val; ++i) is_val[static_cast<std::size_t>(rows[i])] = true;
  }
  for (Eigen::Index i = 0; i < data.rows(); ++i) (is_val[static_cast<std::size_t>(i)] ? s.val : s.train).push_back(i);
  return s;
}

Dataset append_noise_features(const Dataset& data, int n, std::uint64_t seed) {
  if (n < 0) throw DataError("append_noise_features: negative count");
  Dataset d = data;
  std::vector<FeatureEntry> extra;
  for (int k = 1; k <= n; ++k) extra.push_back({"noise_" + std::to_string(k), FeatureFamily::kAuxiliary});
  d.schema = data.schema.extended(data.schema.version() + "+noise" + std::to_string(n), extra);
  d.x.conservativeResize(Eigen::NoChange, data.cols() + n);
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (Eigen::Index c = data.cols(); c < d.cols(); ++c)
    for (Eigen::Index r = 0; r < d.rows(); ++r) d.x(r, c) = g(rng);
  return d;
}

double mean_absolute_error(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  if (pred.size() != truth.size() || pred.size() == 0) throw DataError("mae: size mismatch or empty");
  return (pred - truth).cwiseAbs().mean();
}

}  // namespace orient
