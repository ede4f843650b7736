#pragma once

#include "nvdit/nv_levels.hpp"

namespace nvdit {

// Cavity and coupling parameters.  Amplitude conventions:
//   - total cavity field decay kappa = kappa_a + kappa_b, amplitude damping kappa/2
//   - excited-level amplitude damping gamma_i = 1/(2 tau_i)
//   - on the readout transition the resonant reflection obeys
//     R = [2C/(2C+1)]^2 with C = g^2/(kappa gamma_target)
struct CavityParams {
  double kappa_a = ghz(0.05) / 2.0;
  double kappa_b = ghz(0.05) / 2.0;
  double g = 0.0;                  // vacuum-Rabi rate, rad/ns
  double elastic_retained = 1.0;   // fraction of g^2 kept after elastic-scattering degradation

  double kappa() const { return kappa_a + kappa_b; }
  double cooperativity(double gamma_target) const {
    return g * g * elastic_retained / (kappa() * gamma_target);
  }

  static CavityParams from_cooperativity(double c, const LevelTable& table,
                                         double kappa = ghz(0.05));
  void validate() const;
};

struct DrivingConfig {
  Polarization polarization = Polarization::SigmaPlus;
  double detuning = 0.0;           // drive minus cavity frequency, rad/ns
  double amplitude = 1.0;          // input-flux normalization
};

// One coupled excitation pathway from a given ground spin.
struct CoupledLevel {
  int level;                 // index into the LevelTable
  complex<double> amp;       // polarization amplitude (dimensionless)
  double gamma;              // amplitude damping, rad/ns
  double delta;              // transition minus cavity frequency, rad/ns
  double ms_branch;
  std::array<double, 3> dest; // radiative destination distribution over m_s
};

// Frequency-domain linear system for one polarization: the cavity mode plus
// the six excitation operators, per ground spin component.
struct CouplingSystem {
  CavityParams cavity;
  Polarization polarization = Polarization::SigmaPlus;
  std::array<std::vector<CoupledLevel>, 3> levels; // by spin index
  double cavity_line = 0.0;   // readout transition frequency used as cavity lock
};

CouplingSystem build_coupling(const CavityParams& cavity, const LevelTable& table,
                              Polarization pol = Polarization::SigmaPlus);

// Scattering amplitudes and probabilities at one drive detuning.
struct ScatterPoint {
  complex<double> r, t;
  double R = 0, T = 0, S_loss = 0, M_loss = 0;
  std::array<double, 6> level_flux{};  // per-level spontaneous flux (branch-inclusive)

  double total() const { return R + T + S_loss + M_loss; }
};

// Solves the driven linear system at drive detuning `delta` (rad/ns relative
// to the cavity) for the given ground spin.  Output field from the
// input-output boundary condition a_out = a_in - i sqrt(kappa_a) c.
ScatterPoint solve_scattering(const CouplingSystem& sys, int ms, double delta);
ScatterPoint solve_scattering(const CouplingSystem& sys, int ms, const DrivingConfig& drive);

struct ScatteringSpectrum {
  std::vector<double> detuning;               // rad/ns
  std::array<std::vector<ScatterPoint>, 3> by_spin;
  std::array<bool, 3> spin_present{};
};

// Detuning grid: +-span with `points` samples, refined `refine`x within
// +-3 kappa of resonance.
std::vector<double> default_grid(double kappa, double span = ghz(10.0), int points = 4001,
                                 int refine = 10);

ScatteringSpectrum reflection_spectrum(const CouplingSystem& sys, const std::vector<double>& grid,
                                       const std::vector<int>& spins = {0, +1});

// Vacuum-Rabi coupling from the radiative decay rate, quantum efficiency and
// cavity spectral energy density; `inverse` recovers rho_omega from g.
double coupling_from_decay(double quantum_efficiency, double gamma_rad, double rho_omega,
                           double omega);
double rho_omega_for_coupling(double g, double quantum_efficiency, double gamma_rad, double omega);

} // namespace nvdit
