#include "basinlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace basinlab {

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double incomplete_gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("incomplete_gamma domain");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) {
    // series expansion
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 1000; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 3e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  // continued fraction for Q, then complement
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 3e-16) break;
  }
  const double q = std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
  return 1.0 - q;
}

double incomplete_gamma_q(double a, double x) { return 1.0 - incomplete_gamma_p(a, x); }

namespace {

// Solves incomplete_beta(a, b, x) = target for x by bisection.
double beta_inverse(double a, double b, double target) {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (incomplete_beta(a, b, mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double clopper_pearson_lower(long successes, long trials, double confidence) {
  if (trials <= 0 || successes < 0 || successes > trials)
    throw std::invalid_argument("clopper_pearson: bad counts");
  if (successes == 0) return 0.0;
  const double alpha = 1.0 - confidence;
  return beta_inverse(static_cast<double>(successes),
                      static_cast<double>(trials - successes + 1), alpha);
}

double clopper_pearson_upper(long successes, long trials, double confidence) {
  if (trials <= 0 || successes < 0 || successes > trials)
    throw std::invalid_argument("clopper_pearson: bad counts");
  if (successes == trials) return 1.0;
  const double alpha = 1.0 - confidence;
  return beta_inverse(static_cast<double>(successes + 1),
                      static_cast<double>(trials - successes), 1.0 - alpha);
}

double binomial_cdf(long k, long n, double p) {
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  // Pr[X <= k] = I_{1-p}(n - k, k + 1)
  return incomplete_beta(static_cast<double>(n - k), static_cast<double>(k + 1), 1.0 - p);
}

double chi_squared_tail(double statistic, long dof) {
  if (dof <= 0) throw std::invalid_argument("chi_squared_tail needs dof >= 1");
  return incomplete_gamma_q(0.5 * static_cast<double>(dof), 0.5 * statistic);
}

double chi_squared_uniform_pvalue(const std::vector<long>& counts) {
  if (counts.size() < 2) throw std::invalid_argument("need at least two cells");
  long total = 0;
  for (long c : counts) total += c;
  if (total == 0) throw std::invalid_argument("empty sample");
  const double expected = static_cast<double>(total) / static_cast<double>(counts.size());
  double stat = 0.0;
  for (long c : counts) {
    const double diff = static_cast<double>(c) - expected;
    stat += diff * diff / expected;
  }
  return chi_squared_tail(stat, static_cast<long>(counts.size()) - 1);
}

double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty KS sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const size_t na = a.size(), nb = b.size();
  size_t ia = 0, ib = 0;
  double d = 0.0;
  while (ia < na && ib < nb) {
    const double x = std::min(a[ia], b[ib]);
    while (ia < na && a[ia] <= x) ++ia;
    while (ib < nb && b[ib] <= x) ++ib;
    d = std::max(d, std::fabs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
  }
  const double ne = static_cast<double>(na) * nb / (na + nb);
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  // asymptotic Kolmogorov tail; the alternating series only converges for
  // lambda away from zero, elsewhere the tail probability is 1
  const double a2 = -2.0 * lambda * lambda;
  double sum = 0.0, fac = 2.0, previous = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = fac * std::exp(a2 * j * j);
    sum += term;
    if (std::fabs(term) <= 0.001 * previous || std::fabs(term) <= 1e-8 * std::fabs(sum))
      return std::clamp(sum, 0.0, 1.0);
    fac = -fac;
    previous = std::fabs(term);
  }
  return 1.0;
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Consistent: return "CONSISTENT";
    case Verdict::Refuted: return "REFUTED";
    default: return "INCONCLUSIVE";
  }
}

MCReport finalize_report(std::string bound_name, long trials, long successes, long errored,
                         double theoretical_bound, BoundSide side, std::uint64_t seed,
                         double confidence) {
  MCReport report;
  report.bound_name = std::move(bound_name);
  report.trials = trials;
  report.successes = successes;
  report.errored = errored;
  report.theoretical_bound = theoretical_bound;
  report.side = side;
  report.seed = seed;
  report.confidence = confidence;
  const long clean = trials - errored;
  if (clean <= 0) {
    report.verdict = Verdict::Inconclusive;
    return report;
  }
  report.point_estimate = static_cast<double>(successes) / static_cast<double>(clean);
  report.ci_lower = clopper_pearson_lower(successes, clean, confidence);
  report.ci_upper = clopper_pearson_upper(successes, clean, confidence);
  if (errored > 0 && static_cast<double>(errored) > 0.001 * static_cast<double>(trials)) {
    report.verdict = Verdict::Inconclusive;
    return report;
  }
  const bool refuted = side == BoundSide::LowerBound
                           ? report.ci_upper < theoretical_bound
                           : report.ci_lower > theoretical_bound;
  report.verdict = refuted ? Verdict::Refuted : Verdict::Consistent;
  return report;
}

}  // namespace basinlab
