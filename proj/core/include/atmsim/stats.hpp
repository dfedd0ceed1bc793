#pragma once

#include <span>

namespace atmsim {

/// Regularized incomplete beta function I_x(a, b), continued-fraction
/// evaluation (modified Lentz).
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided tail probability of Student's t with df degrees of freedom.
double student_t_two_sided_p(double t, long df);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  long df = 0;
  bool degenerate_variance = false;
};

/// Paired t-test on a_k - b_k. Requires equal lengths, n >= 2.
/// Zero-variance differences: p = 0 (flagged) if the mean is nonzero,
/// p = 1 otherwise.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

double sample_mean(std::span<const double> xs);
double sample_sd(std::span<const double> xs);  // n-1 denominator

}  // namespace atmsim
