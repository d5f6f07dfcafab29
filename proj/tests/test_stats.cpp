#include <doctest.h>

#include <random>

#include "orient/error.hpp"
#include "orient/stats.hpp"
#include "oracles.hpp"

using namespace orient;

namespace {

// Exactly mean m and sample sd s for even n.
std::vector<double> group(double m, double s, int n) {
  std::vector<double> v;
  const double half = s * std::sqrt((n - 1.0) / n);
  for (int i = 0; i < n; ++i) v.push_back(m + (i % 2 ? half : -half));
  return v;
}

}  // namespace

TEST_CASE("cohen's d analytic case") {
  const GroupStats g = compare_groups(group(10, 2, 12), group(8, 2, 8));
  CHECK(std::abs(g.cohens_d - 1.0) <= 1e-9);
  CHECK(std::abs(g.pooled_sd - 2.0) <= 1e-9);
  CHECK(g.df == 18.0);
}

TEST_CASE("identical groups") {
  const std::vector<double> a{1, 2, 3, 4};
  const GroupStats g = compare_groups(a, a);
  CHECK(g.t_statistic == 0.0);
  CHECK(g.p_value == doctest::Approx(1.0));
  CHECK(g.cohens_d == 0.0);
}

TEST_CASE("errors") {
  const std::vector<double> one{1.0}, two{1.0, 2.0}, flat{3.0, 3.0}, nan{1.0, NAN};
  CHECK_THROWS_AS(compare_groups(one, two), DataError);
  CHECK_THROWS_AS(compare_groups(two, nan), DataError);
  CHECK_THROWS_AS(compare_groups(flat, flat), NumericalError);
}

TEST_CASE("incomplete beta and t cdf") {
  CHECK(incomplete_beta(1, 1, 0.3) == doctest::Approx(0.3));
  CHECK(incomplete_beta(2, 3, 0.0) == 0.0);
  CHECK(incomplete_beta(2, 3, 1.0) == 1.0);
  // I_x(a, 1) = x^a.
  CHECK(incomplete_beta(3.5, 1, 0.7) == doctest::Approx(std::pow(0.7, 3.5)));
  CHECK(student_t_cdf(0.0, 7) == doctest::Approx(0.5));
  // df = 1 is Cauchy.
  CHECK(student_t_cdf(1.0, 1) == doctest::Approx(0.75));
  CHECK(student_t_cdf(-2.0, 5) + student_t_cdf(2.0, 5) == doctest::Approx(1.0));
}

TEST_CASE("t-test matches the quadrature oracle") {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> size(2, 25);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(static_cast<std::size_t>(size(rng))), b(static_cast<std::size_t>(size(rng)));
    const double shift = 0.3 * trial - 2.0;
    for (auto& x : a) x = 5.0 + 2.0 * g(rng) + shift;
    for (auto& x : b) x = 5.0 + 1.5 * g(rng);
    const GroupStats s = compare_groups(a, b);
    const oracle::TTest o = oracle::pooled_t(a, b);
    CHECK(std::abs(s.t_statistic - o.t) <= 1e-9 * std::max(1.0, std::abs(o.t)));
    CHECK(std::abs(s.p_value - o.p) <= 1e-6);
    CHECK(std::abs(s.cohens_d - o.d) <= 1e-9);
  }
}

TEST_CASE("antisymmetry and sidedness") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(8), b(11);
    for (auto& x : a) x = g(rng) + 0.5;
    for (auto& x : b) x = g(rng);
    const GroupStats ab = compare_groups(a, b), ba = compare_groups(b, a);
    CHECK(ab.t_statistic == doctest::Approx(-ba.t_statistic));
    CHECK(ab.cohens_d == doctest::Approx(-ba.cohens_d));
    CHECK(ab.p_value == doctest::Approx(ba.p_value));
    const double pg = compare_groups(a, b, Alternative::kGreater).p_value;
    const double pl = compare_groups(a, b, Alternative::kLess).p_value;
    CHECK(pg + pl == doctest::Approx(1.0));
    CHECK(compare_groups(b, a, Alternative::kLess).p_value == doctest::Approx(pg));
    CHECK(std::min(pg, pl) * 2.0 == doctest::Approx(ab.p_value));
  }
}
