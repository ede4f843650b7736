#pragma once

#include <vector>

#include "nvdit/units.hpp"

namespace nvdit {

// Scaled complementary error function exp(x^2) erfc(x), overflow-safe for
// large arguments (continued fraction beyond the direct-product range).
double erfcx(double x);

struct GaussianPulse {
  double sigma_t_ns = 165.0 / 6.0;
  double center_ns = 82.5;

  double sigma_p() const { return 1.0 / (2.0 * sigma_t_ns); } // rad/ns
  // fractional area outside +-3 sigma
  static double truncated_tail_area();
};

// Probability-weighted reflection of a Gaussian pulse from the dark-state
// transmission trough of width kappa: 1 - sqrt(pi) (sigma_t kappa) erfcx(sigma_t kappa).
double average_false_reflection(double sigma_t_ns, double kappa);

// Complementary suppression applied to the transmission/scattering peaks.
double peak_retention(double sigma_t_ns, double kappa);

struct BayesClassifier {
  double p0 = 0.5;        // per-pulse detection probability from |0>
  double p1 = 0.00364;    // from |+1>
  double eta0 = 3.5e-4;   // per-pulse fidelity decay rates
  double eta1 = 1.2e-5;
  double prior0 = 0.5;

  void validate() const;
};

struct ClassifyResult {
  int threshold = 1;          // smallest click count classified as m_s = 0
  double fidelity = 0.0;      // expected fidelity with exponential decay
  double fidelity_no_decay = 0.0; // pure binomial discrimination fidelity
  double err0 = 0.0;          // P(classified +1 | 0)
  double err1 = 0.0;          // P(classified 0 | +1)
};

// Posterior for an observed click count.
double posterior_zero(const BayesClassifier& clf, int clicks, int pulses);

// Maximum-a-posteriori classification over n pulses, aggregated over the
// binomial outcome distribution; ties classify as +1.
ClassifyResult classify(const BayesClassifier& clf, int pulses);

enum class ThresholdVariable { Kappa, SigmaT };

// Root-solve average_false_reflection for kappa (fixed sigma_t) or sigma_t
// (fixed kappa); bisection to 1e-6 relative.
double solve_threshold(double target, ThresholdVariable solve_for, double fixed_value);

struct TradeoffRow {
  double spacing_ns;
  double sigma_t_ns;
  double false_reflection;
  int required_trials;     // fidelity-maximizing pulse count
  double fidelity;
};

// Fidelity/trial-count tradeoff against pulse spacing for the conservative
// exponential-decay classifier; base rates follow the strong-coupling case.
std::vector<TradeoffRow> pulse_time_error_tradeoff(const std::vector<double>& spacings_ns,
                                                   double kappa = ghz(0.05),
                                                   double p0 = 0.5,
                                                   double eta_product = 0.552,
                                                   double eta0 = 3.5e-4, double eta1 = 1.2e-5);

} // namespace nvdit
