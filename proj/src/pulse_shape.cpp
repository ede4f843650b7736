#include "nvdit/pulse_shape.hpp"

#include <cmath>
#include <stdexcept>

namespace nvdit {

namespace {
constexpr double kSqrtPi = 1.7724538509055160273;
} // namespace

double erfcx(double x) {
  if (!(x >= 0.0)) throw std::domain_error("erfcx: argument must be non-negative");
  if (x < 2.5) return std::exp(x * x) * std::erfc(x);

  // Laplace continued fraction, evaluated with the modified Lentz scheme:
  //   erfcx(x) = 1/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
  const double tiny = 1e-300;
  double f = x, c = x, d = 0.0;
  for (int n = 1; n <= 400; ++n) {
    double a = 0.5 * n;
    d = x + a * d;
    if (d == 0.0) d = tiny;
    c = x + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-17) break;
  }
  return 1.0 / (kSqrtPi * f);
}

double GaussianPulse::truncated_tail_area() {
  return std::erfc(3.0 / std::sqrt(2.0)); // two tails beyond 3 sigma
}

double average_false_reflection(double sigma_t_ns, double kappa) {
  if (!(sigma_t_ns > 0) || !(kappa > 0))
    throw std::domain_error("average_false_reflection: sigma_t and kappa must be positive");
  double x = sigma_t_ns * kappa;
  return 1.0 - kSqrtPi * x * erfcx(x);
}

double peak_retention(double sigma_t_ns, double kappa) {
  return 1.0 - average_false_reflection(sigma_t_ns, kappa);
}

void BayesClassifier::validate() const {
  if (!(p1 >= 0) || !(p1 < p0) || !(p0 <= 1))
    throw std::invalid_argument("BayesClassifier: require 0 <= p1 < p0 <= 1");
  if (!(prior0 > 0) || !(prior0 < 1))
    throw std::invalid_argument("BayesClassifier: prior must lie in (0,1)");
}

namespace {

// log C(n,k) + k log p + (n-k) log(1-p), safe at p = 0
double log_binom_pmf(int k, int n, double p) {
  if (p <= 0.0) return k == 0 ? 0.0 : -INFINITY;
  if (p >= 1.0) return k == n ? 0.0 : -INFINITY;
  double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return lc + k * std::log(p) + (n - k) * std::log1p(-p);
}

} // namespace

double posterior_zero(const BayesClassifier& clf, int clicks, int pulses) {
  clf.validate();
  double l0 = std::exp(log_binom_pmf(clicks, pulses, clf.p0)) * clf.prior0;
  double l1 = std::exp(log_binom_pmf(clicks, pulses, clf.p1)) * (1.0 - clf.prior0);
  if (l0 + l1 == 0.0) return 0.0;
  return l0 / (l0 + l1);
}

ClassifyResult classify(const BayesClassifier& clf, int pulses) {
  clf.validate();
  if (pulses < 1) throw std::invalid_argument("classify: need at least one pulse");
  ClassifyResult res;

  // MAP threshold: classify 0 when posterior(0) strictly exceeds 1/2
  int thr = pulses + 1;
  for (int k = 0; k <= pulses; ++k) {
    if (posterior_zero(clf, k, pulses) > 0.5) {
      thr = k;
      break;
    }
  }
  res.threshold = thr;

  double p_ge_thr_0 = 0.0, p_ge_thr_1 = 0.0;
  for (int k = thr; k <= pulses; ++k) {
    p_ge_thr_0 += std::exp(log_binom_pmf(k, pulses, clf.p0));
    p_ge_thr_1 += std::exp(log_binom_pmf(k, pulses, clf.p1));
  }
  res.err0 = 1.0 - p_ge_thr_0;
  res.err1 = p_ge_thr_1;
  res.fidelity_no_decay = clf.prior0 * p_ge_thr_0 + (1.0 - clf.prior0) * (1.0 - p_ge_thr_1);
  res.fidelity = clf.prior0 * p_ge_thr_0 * std::exp(-clf.eta0 * pulses) +
                 (1.0 - clf.prior0) * (1.0 - p_ge_thr_1) * std::exp(-clf.eta1 * pulses);
  return res;
}

double solve_threshold(double target, ThresholdVariable solve_for, double fixed_value) {
  if (!(fixed_value > 0)) throw std::invalid_argument("solve_threshold: fixed value must be positive");
  if (!(target > 0) || !(target < 1))
    throw std::invalid_argument("solve_threshold: target outside achievable range");

  // average_false_reflection is strictly decreasing in x = sigma_t * kappa
  double lo = 1e-6, hi = 1e7;
  auto f = [&](double x) { return 1.0 - kSqrtPi * x * erfcx(x) - target; };
  if (f(lo) < 0 || f(hi) > 0)
    throw std::invalid_argument("solve_threshold: target outside achievable range");
  while ((hi - lo) / hi > 1e-12) {
    double mid = 0.5 * (lo + hi);
    (f(mid) > 0 ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  // x = sigma_t * kappa, so the free variable is x over the fixed one either way
  (void)solve_for;
  return x / fixed_value;
}

std::vector<TradeoffRow> pulse_time_error_tradeoff(const std::vector<double>& spacings_ns,
                                                   double kappa, double p0, double eta_product,
                                                   double eta0, double eta1) {
  std::vector<TradeoffRow> rows;
  for (double spacing : spacings_ns) {
    if (!(spacing > 0)) throw std::invalid_argument("pulse_time_error_tradeoff: spacing must be positive");
    TradeoffRow row;
    row.spacing_ns = spacing;
    row.sigma_t_ns = spacing / 6.0;
    row.false_reflection = average_false_reflection(row.sigma_t_ns, kappa);

    BayesClassifier clf;
    clf.p0 = p0;
    clf.p1 = eta_product * row.false_reflection;
    clf.eta0 = eta0;
    clf.eta1 = eta1;

    int best_n = 1;
    double best_f = -1.0;
    for (int n = 1; n <= 200; ++n) {
      double f = classify(clf, n).fidelity;
      if (f > best_f) {
        best_f = f;
        best_n = n;
      }
    }
    row.required_trials = best_n;
    row.fidelity = best_f;
    rows.push_back(row);
  }
  return rows;
}

} // namespace nvdit
