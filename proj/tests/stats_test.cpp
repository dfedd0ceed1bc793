#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "atmsim/stats.hpp"

using namespace atmsim;

TEST_CASE("regularized incomplete beta: closed-form anchors") {
  // I_x(1,1) = x
  for (double x : {0.1, 0.25, 0.5, 0.9}) {
    CHECK(regularized_incomplete_beta(1.0, 1.0, x) == doctest::Approx(x).epsilon(1e-12));
  }
  // I_x(a,b) = 1 - I_{1-x}(b,a)
  CHECK(regularized_incomplete_beta(2.5, 4.0, 0.3) ==
        doctest::Approx(1.0 - regularized_incomplete_beta(4.0, 2.5, 0.7)).epsilon(1e-12));
  // symmetric case at the midpoint
  CHECK(regularized_incomplete_beta(0.5, 0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  // boundaries and argument checking
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  CHECK_THROWS_AS(regularized_incomplete_beta(0.0, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("student t tail probabilities against independently computed values") {
  // reference values computed with an independent implementation of the
  // t distribution survival function
  CHECK(student_t_two_sided_p(2.0, 10) == doctest::Approx(0.07338803).epsilon(1e-5));
  CHECK(student_t_two_sided_p(1.5, 54) == doctest::Approx(0.13943936).epsilon(1e-5));
  CHECK(student_t_two_sided_p(0.5, 4) == doctest::Approx(0.64332945).epsilon(1e-5));
  CHECK(student_t_two_sided_p(3.2, 54) == doctest::Approx(0.00230220).epsilon(1e-4));
  CHECK(student_t_two_sided_p(0.0, 12) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("t tail probability is symmetric and monotone in |t|") {
  for (long df : {1L, 5L, 54L}) {
    double prev = 1.1;
    for (double t = 0.0; t <= 6.0; t += 0.5) {
      const double p = student_t_two_sided_p(t, df);
      CHECK(p == doctest::Approx(student_t_two_sided_p(-t, df)).epsilon(1e-13));
      CHECK(p <= prev);
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
      prev = p;
    }
  }
}

TEST_CASE("paired t test on the canonical difference vector") {
  const std::vector<double> a = {1, 2, 3, 4, 5};
  const std::vector<double> zero(5, 0.0);
  const TTestResult r = paired_t_test(a, zero);
  CHECK(r.t == doctest::Approx(4.242640687119285).epsilon(1e-9));
  CHECK(r.df == 4);
  CHECK(r.p == doctest::Approx(0.013235599563682695).epsilon(1e-6));
  CHECK_FALSE(r.degenerate_variance);
}

TEST_CASE("identical samples give t=0, p=1") {
  const std::vector<double> a = {3.2, 4.4, 5.1, 2.2};
  const TTestResult r = paired_t_test(a, a);
  CHECK(r.t == 0.0);
  CHECK(r.p == 1.0);
  CHECK_FALSE(r.degenerate_variance);
}

TEST_CASE("constant nonzero difference takes the degenerate-variance path") {
  const std::vector<double> a = {10, 11, 12};
  const std::vector<double> b = {5, 6, 7};
  const TTestResult r = paired_t_test(a, b);
  CHECK(r.degenerate_variance);
  CHECK(r.p == 0.0);
  CHECK(std::isinf(r.t));
  CHECK(r.t > 0.0);
}

TEST_CASE("the test statistic is invariant to pair ordering sign flips") {
  const std::vector<double> a = {4.0, 6.5, 5.5, 7.0, 6.0};
  const std::vector<double> b = {3.0, 6.0, 5.8, 6.1, 5.2};
  const TTestResult fwd = paired_t_test(a, b);
  const TTestResult rev = paired_t_test(b, a);
  CHECK(fwd.t == doctest::Approx(-rev.t).epsilon(1e-13));
  CHECK(fwd.p == doctest::Approx(rev.p).epsilon(1e-13));
}

TEST_CASE("input validation") {
  const std::vector<double> none;
  const std::vector<double> one = {1.0};
  const std::vector<double> two = {1.0, 2.0};
  CHECK_THROWS_AS(paired_t_test(one, one), std::invalid_argument);
  CHECK_THROWS_AS(paired_t_test(two, one), std::invalid_argument);
  CHECK_THROWS_AS(sample_mean(none), std::invalid_argument);
  CHECK_THROWS_AS(sample_sd(one), std::invalid_argument);
}

TEST_CASE("sample moments") {
  const std::vector<double> xs = {2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
  CHECK(sample_mean(xs) == doctest::Approx(5.0));
  CHECK(sample_sd(xs) == doctest::Approx(std::sqrt(32.0 / 7.0)).epsilon(1e-12));
}
