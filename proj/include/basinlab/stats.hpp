#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace basinlab {

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

/// Regularized incomplete gamma P(a, x) and its complement Q(a, x).
double incomplete_gamma_p(double a, double x);
double incomplete_gamma_q(double a, double x);

/// Exact (Clopper-Pearson) one-sided confidence limits for a binomial
/// proportion from s successes in t trials. `confidence` is per side.
double clopper_pearson_lower(long successes, long trials, double confidence);
double clopper_pearson_upper(long successes, long trials, double confidence);

/// Exact binomial CDF Pr[Bin(n, p) <= k].
double binomial_cdf(long k, long n, double p);

/// Upper tail probability of a chi-squared variable with `dof` degrees.
double chi_squared_tail(double statistic, long dof);

/// Chi-squared uniformity test over equally likely cells; returns p-value.
double chi_squared_uniform_pvalue(const std::vector<long>& counts);

/// Two-sample Kolmogorov-Smirnov test; returns the asymptotic p-value.
double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b);

enum class Verdict { Consistent, Refuted, Inconclusive };
enum class BoundSide { LowerBound, UpperBound };

std::string verdict_name(Verdict v);

/// Outcome of one Monte Carlo bound experiment. REFUTED means the exact
/// one-sided confidence interval for the event probability excludes the
/// claimed bound on the wrong side; errored trials above 0.1% force
/// INCONCLUSIVE.
struct MCReport {
  std::string bound_name;
  long trials = 0;
  long successes = 0;
  long errored = 0;
  double point_estimate = 0.0;
  double ci_lower = 0.0;  // one-sided lower confidence limit
  double ci_upper = 1.0;  // one-sided upper confidence limit
  double theoretical_bound = 0.0;
  BoundSide side = BoundSide::LowerBound;
  Verdict verdict = Verdict::Inconclusive;
  double confidence = 0.999;
  std::uint64_t seed = 0;
  std::vector<std::string> diagnostics_sample;
};

MCReport finalize_report(std::string bound_name, long trials, long successes,
                         long errored, double theoretical_bound, BoundSide side,
                         std::uint64_t seed, double confidence = 0.999);

}  // namespace basinlab
