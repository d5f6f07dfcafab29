#pragma once

#include <span>

namespace orient {

// Regularised incomplete beta I_x(a, b) by Lentz's continued fraction.
double incomplete_beta(double a, double b, double x);

// Student-t cumulative distribution with `df` degrees of freedom.
double student_t_cdf(double t, double df);

enum class Alternative { kTwoSided, kGreater, kLess };

struct GroupStats {
  double mean1 = 0.0, mean2 = 0.0;
  double sd1 = 0.0, sd2 = 0.0;  // sample standard deviations
  double pooled_sd = 0.0;
  double t_statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  double cohens_d = 0.0;
};

// Independent two-sample t-test with pooled variance and Cohen's d
// (mean difference over pooled standard deviation). Throws DataError for
// groups smaller than two or non-finite values, NumericalError when the
// pooled variance is zero.
GroupStats compare_groups(std::span<const double> group1, std::span<const double> group2,
                          Alternative alt = Alternative::kTwoSided);

}  // namespace orient
