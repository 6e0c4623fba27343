#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "basinlab/stats.hpp"

#include <cmath>

using namespace basinlab;

TEST_CASE("clopper-pearson limits bracket the point estimate") {
  const double lower = clopper_pearson_lower(90, 100, 0.999);
  const double upper = clopper_pearson_upper(90, 100, 0.999);
  CHECK(lower < 0.9);
  CHECK(upper > 0.9);
  CHECK(lower > 0.75);
  CHECK(upper < 0.99);
  CHECK(clopper_pearson_lower(0, 50, 0.999) == 0.0);
  CHECK(clopper_pearson_upper(50, 50, 0.999) == 1.0);
}

TEST_CASE("clopper-pearson limits invert the binomial tails") {
  // at the lower limit, Pr[X >= s] should equal alpha
  const long s = 42, t = 120;
  const double alpha = 0.001;
  const double lower = clopper_pearson_lower(s, t, 1.0 - alpha);
  CHECK(1.0 - binomial_cdf(s - 1, t, lower) == doctest::Approx(alpha).epsilon(1e-6));
  const double upper = clopper_pearson_upper(s, t, 1.0 - alpha);
  CHECK(binomial_cdf(s, t, upper) == doctest::Approx(alpha).epsilon(1e-6));
}

TEST_CASE("binomial cdf matches direct summation") {
  auto direct = [](long k, long n, double p) {
    double total = 0.0;
    double term = std::pow(1.0 - p, n);  // Pr[X = 0]
    for (long i = 0; i <= k; ++i) {
      total += term;
      term *= static_cast<double>(n - i) / static_cast<double>(i + 1) * p / (1.0 - p);
    }
    return total;
  };
  CHECK(binomial_cdf(3, 10, 0.3) == doctest::Approx(direct(3, 10, 0.3)).epsilon(1e-12));
  CHECK(binomial_cdf(1, 16, 0.5) == doctest::Approx(17.0 / 65536.0).epsilon(1e-12));
  CHECK(binomial_cdf(-1, 10, 0.5) == 0.0);
  CHECK(binomial_cdf(10, 10, 0.5) == 1.0);
}

TEST_CASE("chi-squared tail reference values") {
  CHECK(chi_squared_tail(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(chi_squared_tail(0.0, 4) == doctest::Approx(1.0));
}

TEST_CASE("incomplete beta endpoints and symmetry") {
  CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  const double x = 0.37;
  CHECK(incomplete_beta(2.5, 4.5, x) ==
        doctest::Approx(1.0 - incomplete_beta(4.5, 2.5, 1.0 - x)).epsilon(1e-12));
}

TEST_CASE("ks two-sample p-value behaves") {
  std::vector<double> a, b, shifted;
  for (int i = 0; i < 2000; ++i) {
    const double u = (i + 0.5) / 2000.0;
    a.push_back(u);
    b.push_back(u);
    shifted.push_back(u + 0.2);
  }
  CHECK(ks_two_sample_pvalue(a, b) > 0.9);
  CHECK(ks_two_sample_pvalue(a, shifted) < 1e-6);
}

TEST_CASE("verdict logic on both bound sides") {
  // lower bound 0.9, observed 50/100: clearly refuted
  MCReport refuted = finalize_report("x", 100, 50, 0, 0.9, BoundSide::LowerBound, 1);
  CHECK(refuted.verdict == Verdict::Refuted);
  // observed matches the bound: consistent
  MCReport ok = finalize_report("x", 100, 92, 0, 0.9, BoundSide::LowerBound, 1);
  CHECK(ok.verdict == Verdict::Consistent);
  // upper-bound claims refute from below
  MCReport upper_ok = finalize_report("x", 1000, 1, 0, 0.05, BoundSide::UpperBound, 1);
  CHECK(upper_ok.verdict == Verdict::Consistent);
  MCReport upper_bad = finalize_report("x", 1000, 500, 0, 0.05, BoundSide::UpperBound, 1);
  CHECK(upper_bad.verdict == Verdict::Refuted);
  // errored trials above 0.1% force INCONCLUSIVE
  MCReport err = finalize_report("x", 1000, 900, 5, 0.5, BoundSide::LowerBound, 1);
  CHECK(err.verdict == Verdict::Inconclusive);
}
