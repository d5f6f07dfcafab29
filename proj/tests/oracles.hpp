#pragma once

// Slow, obviously-correct reference implementations used by the tests and
// the acceptance binary.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "orient/behavior.hpp"
#include "orient/core.hpp"

namespace oracle {

using orient::Cloud;
using orient::Region;

// k smallest squared distances from column i to every other column.
inline std::vector<double> knn_sq_distances(const Cloud& pts, Eigen::Index i, int k) {
  std::vector<double> d;
  for (Eigen::Index j = 0; j < pts.cols(); ++j) {
    if (j == i) continue;
    const double dx = pts(0, j) - pts(0, i);
    const double dy = pts(1, j) - pts(1, i);
    const double dz = pts(2, j) - pts(2, i);
    d.push_back(dx * dx + dy * dy + dz * dz);
  }
  std::sort(d.begin(), d.end());
  d.resize(std::min<std::size_t>(d.size(), static_cast<std::size_t>(k)));
  return d;
}

inline double knn_mean_distance(const Cloud& pts, Eigen::Index i, int k) {
  const auto d = knn_sq_distances(pts, i, k);
  double s = 0.0;
  for (double v : d) s += std::sqrt(v);
  return s / static_cast<double>(d.size());
}

inline std::vector<Eigen::Index> denoise_keep(const Cloud& pts, int k, double threshold) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < pts.cols(); ++i)
    if (pts.cols() <= k || knn_mean_distance(pts, i, k) <= threshold) keep.push_back(i);
  return keep;
}

struct Span {
  Region party;
  std::size_t begin, end;
  bool operator==(const Span&) const = default;
};

// Every [b, e) of one interviewer label that cannot be extended either way.
inline std::vector<Span> contacts(const std::vector<Region>& labels, std::size_t min_frames) {
  std::vector<Span> out;
  const std::size_t n = labels.size();
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t e = b + min_frames; e <= n; ++e) {
      const Region r = labels[b];
      if (r == Region::kNeutral) continue;
      bool same = true;
      for (std::size_t i = b; i < e; ++i) same = same && labels[i] == r;
      if (!same) continue;
      if (b > 0 && labels[b - 1] == r) continue;
      if (e < n && labels[e] == r) continue;
      out.push_back({r, b, e});
    }
  }
  return out;
}

// Firing windows per excluded party, grouped into connected components of
// strictly overlapping windows.
inline std::vector<Span> exclusions(const std::vector<Region>& labels, std::size_t window, std::size_t quorum) {
  std::vector<Span> out;
  if (labels.size() < window) return out;
  for (Region excluded : {Region::kInterviewer1, Region::kInterviewer2}) {
    const Region present = excluded == Region::kInterviewer1 ? Region::kInterviewer2 : Region::kInterviewer1;
    std::vector<std::size_t> starts;
    for (std::size_t w = 0; w + window <= labels.size(); ++w) {
      std::size_t on = 0, off = 0;
      for (std::size_t i = w; i < w + window; ++i) {
        on += labels[i] == present;
        off += labels[i] == excluded;
      }
      if (on >= quorum && off == 0) starts.push_back(w);
    }
    std::vector<std::size_t> parent(starts.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x];
      return x;
    };
    for (std::size_t a = 0; a < starts.size(); ++a)
      for (std::size_t b = a + 1; b < starts.size(); ++b)
        if (starts[b] < starts[a] + window && starts[a] < starts[b] + window) parent[find(b)] = find(a);
    std::vector<Span> comps;
    for (std::size_t a = 0; a < starts.size(); ++a) {
      if (find(a) != a) continue;
      Span s{excluded, starts[a], starts[a] + window};
      for (std::size_t b = 0; b < starts.size(); ++b) {
        if (find(b) != a) continue;
        s.begin = std::min(s.begin, starts[b]);
        s.end = std::max(s.end, starts[b] + window);
      }
      comps.push_back(s);
    }
    out.insert(out.end(), comps.begin(), comps.end());
  }
  std::sort(out.begin(), out.end(), [](const Span& a, const Span& b) {
    return a.begin != b.begin ? a.begin < b.begin : a.party < b.party;
  });
  return out;
}

// Student-t tail mass beyond |t| by composite Simpson on a compactified
// variable, times two.
inline double t_two_sided_p(double t, double df) {
  const double logc = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) - 0.5 * std::log(df * M_PI);
  auto density = [&](double x) { return std::exp(logc - (df + 1) / 2 * std::log1p(x * x / df)); };
  const double a = std::abs(t);
  const int n = 400000;
  auto g = [&](double u) {
    if (u >= 1.0) return 0.0;
    const double x = a + u / (1 - u);
    return density(x) / ((1 - u) * (1 - u));
  };
  const double h = 1.0 / n;
  double s = g(0.0) + g(1.0);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * g(i * h);
  return std::min(1.0, 2.0 * s * h / 3.0);
}

struct TTest {
  double t, df, p, d;
};

inline TTest pooled_t(const std::vector<double>& a, const std::vector<double>& b) {
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / v.size();
  };
  auto ss = [](const std::vector<double>& v, double m) {
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s;
  };
  const double ma = mean(a), mb = mean(b);
  const double df = static_cast<double>(a.size() + b.size() - 2);
  const double sp = std::sqrt((ss(a, ma) + ss(b, mb)) / df);
  const double t = (ma - mb) / (sp * std::sqrt(1.0 / a.size() + 1.0 / b.size()));
  return {t, df, t_two_sided_p(t, df), (ma - mb) / sp};
}

}  // namespace oracle

#include <random>

#include "orient/mlp.hpp"

namespace oracle {

// Relative error between analytic and central-difference gradients at
// `probes` randomly chosen parameters.
inline std::vector<double> mlp_gradient_errors(const orient::MlpModel& model, const Eigen::MatrixXd& xs,
                                               const Eigen::RowVectorXd& ys, int probes, std::uint64_t seed) {
  orient::MlpGradients g;
  model.loss(xs, ys, &g);
  std::mt19937_64 rng(seed);
  std::vector<double> out;
  const double h = 1e-5;
  for (int p = 0; p < probes; ++p) {
    orient::MlpModel m = model;
    const std::size_t layer = std::uniform_int_distribution<std::size_t>(0, m.weights.size() - 1)(rng);
    const bool bias = std::uniform_int_distribution<int>(0, 3)(rng) == 0;
    double* param;
    double analytic;
    if (bias) {
      const auto i = std::uniform_int_distribution<Eigen::Index>(0, m.biases[layer].size() - 1)(rng);
      param = &m.biases[layer][i];
      analytic = g.biases[layer][i];
    } else {
      const auto i = std::uniform_int_distribution<Eigen::Index>(0, m.weights[layer].size() - 1)(rng);
      param = m.weights[layer].data() + i;
      analytic = g.weights[layer].data()[i];
    }
    const double orig = *param;
    *param = orig + h;
    const double up = m.loss(xs, ys, nullptr);
    *param = orig - h;
    const double down = m.loss(xs, ys, nullptr);
    const double numeric = (up - down) / (2 * h);
    out.push_back(std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-7}));
  }
  return out;
}

}  // namespace oracle
