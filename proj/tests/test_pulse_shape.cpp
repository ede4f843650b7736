#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nvdit/pulse_shape.hpp"

using namespace nvdit;

namespace {

// 50-digit reference values (mpmath), 20 log-spaced arguments in [1e-3, 1e3]
struct Ref {
  double x, v;
};
const Ref kErfcxRefs[] = {
    {0.001, 0.99887262008115141},
    {0.0020691380811147897, 0.99766950237302077},
    {0.0042813323987193939, 0.99518730465475463},
    {0.0088586679041008263, 0.99008201978802318},
    {0.018329807108324359, 0.97964843244099008},
    {0.037926901907322497, 0.9586024954823436},
    {0.078475997035146127, 0.91726234869353018},
    {0.16237767391887218, 0.84023872770865878},
    {0.33598182862837821, 0.71052544260761578},
    {0.6951927961775606, 0.52782095740235318},
    {1.4384498882876628, 0.33195279254426534},
    {2.9763514416313182, 0.18029591977679813},
    {6.1584821106602637, 0.090448928362079087},
    {12.742749857031338, 0.044140246077142971},
    {26.366508987303583, 0.021382606131298591},
    {54.555947811685191, 0.010339749838032638},
    {112.88378916846891, 0.0049977720684158351},
    {233.57214690901223, 0.0024154610060016094},
    {483.29302385717532, 0.0011673836533189273},
    {1000.0, 0.00056418930145338765},
};

} // namespace

TEST_CASE("erfcx against 50-digit references to 1e-12 relative") {
  for (const Ref& r : kErfcxRefs) {
    double v = erfcx(r.x);
    CHECK(std::abs(v - r.v) / r.v < 1e-12);
  }
  CHECK_THROWS_AS(erfcx(-0.1), std::domain_error);
  // no overflow deep into the asymptotic regime
  CHECK(erfcx(1e8) > 0.0);
}

TEST_CASE("average false reflection anchors") {
  double kappa = ghz(0.05);
  double p = average_false_reflection(27.5, kappa);
  CHECK(std::abs(p - 0.0066) < 0.0002);
  CHECK(peak_retention(27.5, kappa) == doctest::Approx(1.0 - p));

  // value at sigma_t*kappa = 1, frozen from the 50-digit oracle
  double one = average_false_reflection(1.0 / kappa, kappa);
  CHECK(std::abs(one - 0.242127843859) < 1e-9);

  // monochromatic limit
  CHECK(average_false_reflection(1e7, kappa) < 1e-10);
}

TEST_CASE("false reflection is strictly decreasing and bounded") {
  double kappa = ghz(0.05);
  double prev = 1.0;
  for (double st = 0.05; st < 3000; st *= 1.7) {
    double v = average_false_reflection(st, kappa);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("Gaussian pulse bookkeeping") {
  GaussianPulse p;
  CHECK(p.sigma_t_ns == doctest::Approx(27.5));
  CHECK(p.sigma_t_ns * p.sigma_p() == doctest::Approx(0.5)); // time-bandwidth product
  CHECK(GaussianPulse::truncated_tail_area() == doctest::Approx(0.003).epsilon(0.15));
}

TEST_CASE("threshold solving") {
  double kappa = ghz(0.05);
  double kappa_star = solve_threshold(0.001, ThresholdVariable::Kappa, 27.5);
  CHECK(std::abs(to_ghz(kappa_star) * 1e3 - 129.0) < 2.0); // MHz

  double sigma_star = solve_threshold(0.001, ThresholdVariable::SigmaT, kappa);
  CHECK(std::abs(sigma_star - 71.0) < 1.0);

  // both solutions are the same 2.58x stretch of the operating point
  CHECK(kappa_star / kappa == doctest::Approx(2.58).epsilon(0.01));
  CHECK(sigma_star / 27.5 == doctest::Approx(2.58).epsilon(0.01));

  CHECK_THROWS_AS(solve_threshold(0.0, ThresholdVariable::Kappa, 27.5), std::invalid_argument);
  CHECK_THROWS_AS(solve_threshold(1.5, ThresholdVariable::Kappa, 27.5), std::invalid_argument);
}

TEST_CASE("classifier: threshold behavior and degenerate cases") {
  BayesClassifier clf;
  clf.p0 = 0.5;
  clf.p1 = 0.00364;
  clf.eta0 = 3.5e-4;
  clf.eta1 = 1.2e-5;

  // with p1 > 0 a single click is not decisive at n = 13
  ClassifyResult r13 = classify(clf, 13);
  CHECK(r13.threshold == 2);

  // posterior normalization is scale invariant
  double post = posterior_zero(clf, 3, 13);
  BayesClassifier scaled = clf; // identical likelihood ratios
  CHECK(posterior_zero(scaled, 3, 13) == doctest::Approx(post));
  CHECK(post > 0.99);

  // impossible outcome under +1
  BayesClassifier hard = clf;
  hard.p1 = 0.0;
  CHECK(posterior_zero(hard, 1, 10) == doctest::Approx(1.0));
  ClassifyResult rh = classify(hard, 10);
  CHECK(rh.threshold == 1);
  CHECK(rh.err1 == 0.0);
}

TEST_CASE("point-frequency conservative approximation: 0.99775 at 11 trials") {
  BayesClassifier clf;
  clf.p0 = 0.5;
  clf.p1 = 0.0;
  clf.eta0 = 3.5e-4;
  clf.eta1 = 1.2e-5;
  int best_n = 0;
  double best_f = -1;
  for (int n = 1; n <= 60; ++n) {
    double f = classify(clf, n).fidelity;
    if (f > best_f) {
      best_f = f;
      best_n = n;
    }
  }
  CHECK(best_n == 11);
  CHECK(std::abs(best_f - 0.99775) < 0.0005);
}

TEST_CASE("bandwidth classifier anchor: optimum in the published window") {
  BayesClassifier clf;
  clf.p0 = 0.5;
  clf.p1 = 0.00364;
  clf.eta0 = 3.5e-4;
  clf.eta1 = 1.2e-5;
  int best_n = 0;
  double best_f = -1;
  for (int n = 1; n <= 60; ++n) {
    double f = classify(clf, n).fidelity;
    if (f > best_f) {
      best_f = f;
      best_n = n;
    }
  }
  CHECK(best_n >= 11);
  CHECK(best_n <= 14);
  // decay-free discrimination reproduces the published 99.9%/99.8% pair
  CHECK(classify(clf, 13).fidelity_no_decay == doctest::Approx(0.9986).epsilon(2e-4));
  CHECK(classify(clf, 12).fidelity_no_decay == doctest::Approx(0.9980).epsilon(2e-4));
}

TEST_CASE("pulse-time tradeoff: trials grow as pulses shorten") {
  auto rows = pulse_time_error_tradeoff({24.0, 115.0, 455.0, 5000.0});
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].required_trials > rows[1].required_trials);
  CHECK(rows[1].required_trials >= rows[2].required_trials);
  CHECK(rows[0].fidelity < rows[1].fidelity);
  CHECK(rows[1].fidelity < rows[2].fidelity);
  // long-pulse limit approaches the point-frequency optimum
  CHECK(rows[3].required_trials == 11);
  CHECK(std::abs(rows[3].fidelity - 0.99775) < 0.0006);
}
