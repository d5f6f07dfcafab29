#include "orient/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "orient/error.hpp"

namespace orient {

namespace {

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericalError("incomplete beta: continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0 && b > 0)) throw DataError("incomplete beta: a, b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0)) throw DataError("student t: df must be positive");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double x = df / (df + t * t);
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);  // P(T > |t|)
  return t > 0 ? 1.0 - tail : tail;
}

GroupStats compare_groups(std::span<const double> g1, std::span<const double> g2, Alternative alt) {
  if (g1.size() < 2 || g2.size() < 2) throw DataError("compare_groups: each group needs at least 2 values");
  for (auto g : {g1, g2})
    for (double v : g)
      if (!std::isfinite(v)) throw DataError("compare_groups: non-finite value");
  auto mean_var = [](std::span<const double> g, double& mean, double& var) {
    mean = 0.0;
    for (double v : g) mean += v;
    mean /= static_cast<double>(g.size());
    var = 0.0;
    for (double v : g) var += (v - mean) * (v - mean);
    var /= static_cast<double>(g.size() - 1);
  };
  GroupStats s;
  double v1 = 0.0, v2 = 0.0;
  mean_var(g1, s.mean1, v1);
  mean_var(g2, s.mean2, v2);
  s.sd1 = std::sqrt(v1);
  s.sd2 = std::sqrt(v2);
  const double n1 = static_cast<double>(g1.size()), n2 = static_cast<double>(g2.size());
  s.df = n1 + n2 - 2.0;
  const double pooled_var = ((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / s.df;
  if (!(pooled_var > 0.0)) throw NumericalError("compare_groups: zero pooled variance, Cohen's d undefined");
  s.pooled_sd = std::sqrt(pooled_var);
  const double diff = s.mean1 - s.mean2;
  s.cohens_d = diff / s.pooled_sd;
  s.t_statistic = diff / (s.pooled_sd * std::sqrt(1.0 / n1 + 1.0 / n2));
  switch (alt) {
    case Alternative::kTwoSided: {
      const double x = s.df / (s.df + s.t_statistic * s.t_statistic);
      s.p_value = incomplete_beta(0.5 * s.df, 0.5, x);
      break;
    }
    case Alternative::kGreater: s.p_value = 1.0 - student_t_cdf(s.t_statistic, s.df); break;
    case Alternative::kLess: s.p_value = student_t_cdf(s.t_statistic, s.df); break;
  }
  s.p_value = std::clamp(s.p_value, 0.0, 1.0);
  return s;
}

}  // namespace orient
