#pragma once

#include "nvdit/cavity.hpp"

namespace nvdit {

// How the terminal-state overlap is evaluated when aggregating fidelities.
//   Classified      - target is the basis state named by the branch classification
//                     (m_s projector, nuclear-spin resolved for the matching component)
//   InitialOverlap  - overlap with the full initial state regardless of classification
enum class FidelityTarget { Classified, InitialOverlap };

struct ProtocolConfig {
  double eta_source = 1.0;
  double eta_detect = 1.0;
  int max_pulses = 512;
  double p_s_target = 0.999;
  double pulse_spacing_ns = 165.0;
  double ms0_branch = 0.01;       // singlet branching of the readout level
  double dark_count_prob = 0.0;
  bool metastable_reentry = true; // return shelved population between pulses
  bool settle_metastable = true;  // drain the shelf before terminal overlaps
  FidelityTarget target = FidelityTarget::Classified;
  MetastableModel msm;

  void validate() const;
};

// Per-pulse transition rates for each electron-spin component, derived from
// the resonant scattering solve (single-photon source) or from the
// master-equation fluxes (coherent source).
struct PulseChannels {
  std::array<double, 3> click{};            // detected-reflection probability
  std::array<double, 3> capture{};          // shelving into the singlet manifold
  std::array<std::array<double, 3>, 3> flip{}; // [from][to] spin transition via emission
  std::array<double, 3> reflect{};          // R before detection efficiency

  double survive(int si) const {
    double loss = click[si] + capture[si];
    for (int k = 0; k < 3; ++k)
      if (k != si) loss += flip[si][k];
    return 1.0 - loss;
  }
};

// Channels for the idealized point-frequency drive locked to the readout
// line: clicks only from m_s = 0 (the dark-state reflection minimum for
// m_s = +-1 is below 1e-8 and is truncated to zero).
PulseChannels derive_pulse_channels(const CouplingSystem& sys, const ProtocolConfig& cfg);

// Hybrid conditional state: coherent density matrix on the 6-dim ground space
// (m_s x m_n, gsm_basis() ordering) plus classical shelf populations tagged by
// the preserved nuclear projection.
struct ProtocolState {
  Eigen::Matrix<complex<double>, 6, 6> rho_g;
  Eigen::Vector2d p_ms = Eigen::Vector2d::Zero(); // by m_n index (+1/2, -1/2)
  double path_prob = 1.0;

  double trace() const { return rho_g.trace().real() + p_ms.sum(); }
  double min_eigenvalue() const;
  void check_invariants(double tol = 1e-9) const;

  static ProtocolState pure(int ms, int mn2);
  // (|0,-1/2> + |+1,+1/2>)/sqrt(2), the standard entangled input
  static ProtocolState standard_superposition();
};

struct PulseOutcome {
  double click_prob = 0.0;
  ProtocolState click;     // normalized
  ProtocolState no_click;  // normalized
};

// One photon trial as a two-outcome generalized measurement.  Shelf return
// over the inter-pulse spacing is applied separately via apply_spacing().
PulseOutcome pulse_update(const ProtocolState& st, const PulseChannels& ch,
                          const ProtocolConfig& cfg);

void apply_spacing(ProtocolState& st, const ProtocolConfig& cfg);

struct Branch {
  std::string history;   // 'c' = click, 'n' = no click
  int classified = 0;    // m_s label: 0 or +1
  double prob = 0.0;
  bool truncated = false;
  ProtocolState state;   // normalized terminal state
};

struct OutcomeTree {
  std::vector<Branch> branches;
  double prob_sum() const;
};

struct ProtocolResult {
  double f0 = 0.0;       // fidelity for initial |0,-1/2>
  double f_plus1 = 0.0;  // fidelity for initial |+1,+1/2>
  double f = 0.0;        // average for the standard superposition
  double n_ave = 0.0;
  double n_ave_std = 0.0;
  int n_ft = 0;
  int pulses = 0;
  double duration_ns = 0.0;
};

// Stop-limit: smallest n with 1-(1-P_R)^n >= p_s.
int n_ft(double p_s, double p_r);

struct TrialStats {
  double mean;
  double stddev;
};
TrialStats n_ave(double p_r);

// Depth-first expansion with truncation on click (classified m_s=0) and at
// the pulse cap without a click (classified m_s=+1).
ProtocolResult run_protocol(const ProtocolState& initial, const ProtocolConfig& cfg,
                            const PulseChannels& ch, OutcomeTree* tree = nullptr,
                            int tree_budget = 100000);

// Fidelity-vs-pulse-number curve for the standard superposition input,
// computed incrementally in one pass.
struct FidelityCurve {
  std::vector<double> f;        // f[n-1] = fidelity after n pulses
  std::vector<double> f0;
  std::vector<double> f1;
  int argmax() const;
  double max() const;
  // smallest n with f(n) >= max - eps (plateau entry)
  int plateau_n(double eps = 1e-4) const;
};

FidelityCurve fidelity_curve(const ProtocolConfig& cfg, const PulseChannels& ch, int n_max);

struct SweepPoint {
  double cooperativity;
  double eta_source;
  double eta_detect;
  double ms0_branch;
  int n_opt;
  double f_opt;
  double n_ave;
  int n_ft;
};

// Grid evaluation over cooperativities (and optionally efficiencies).
std::vector<SweepPoint> fidelity_sweep(const LevelTable& table, const std::vector<double>& c_values,
                                       const std::vector<double>& eta_source,
                                       const std::vector<double>& eta_detect,
                                       const ProtocolConfig& base, int n_max);

} // namespace nvdit
