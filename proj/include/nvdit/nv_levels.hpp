#pragma once

#include <array>
#include <optional>

#include "nvdit/spin_ops.hpp"
#include "nvdit/units.hpp"

namespace nvdit {

// Ground-state manifold parameters (angular units, rad/ns).
struct GsmParams {
  double d_gsm = ghz(2.88);      // zero-field splitting
  double g_par = 2.01;           // electron g-factor
  double g_par_n = -0.566;       // nuclear g-factor
  double mu_b = ghz(14.0);       // Bohr magneton / hbar, per tesla
  double mu_n = ghz(7.63e-3);    // nuclear magneton / hbar, per tesla

  void validate() const;
};

// Excited-state manifold parameters (angular units, rad/ns).
struct EsmParams {
  double d_par = ghz(1.21);
  double d_perp = ghz(0.6375);
  double lambda_par = ghz(4.85);
  double lambda_perp = ghz(0.141);
  double l_par = 0.1;            // orbital g-factor (dimensionless)
  double g_par = 2.01;
  double mu_b = ghz(14.0);       // shared Bohr magneton, per tesla

  void validate() const;
};

struct FieldConfig {
  double bz_tesla = 0.020;

  void validate() const;
};

// Singlet-shelf model: one exponential stage (the sub-ns upper singlet is
// collapsed onto the long-lived one) and a spin-scrambling exit distribution.
struct MetastableModel {
  double lifetime_long_ns = 462.0;
  double lifetime_short_ns = 0.0;
  double flip_from_plus1 = 0.81;
  double flip_from_0 = 0.38;

  // Exit distribution over m_s = {+1, 0, -1}.  A single entry-independent
  // distribution reproduces both quoted flip rates:
  //   P(exit +1) = 1 - flip_from_plus1,  P(exit 0) = 1 - flip_from_0.
  std::array<double, 3> exit_distribution() const {
    double p_plus = 1.0 - flip_from_plus1;
    double p_zero = 1.0 - flip_from_0;
    return {p_plus, p_zero, 1.0 - p_plus - p_zero};
  }

  void validate() const;
};

// Energies of the six GSM (m_s x m_n) states.
struct GroundLevels {
  std::array<double, 6> energy;  // rad/ns, basis order of gsm_basis()

  // electronic part only (nuclear Zeeman dropped), by m_s in {+1,0,-1}
  std::array<double, 3> electronic;
};

// Spin index convention used by every module: 0 -> m_s=+1, 1 -> m_s=0, 2 -> m_s=-1.
inline constexpr int kSpinPlus1 = 0;
inline constexpr int kSpinZero = 1;
inline constexpr int kSpinMinus1 = 2;
inline int spin_index(int ms) { return 1 - ms; }

// One diagonalized ESM level.
struct EsmLevel {
  double energy = 0.0;                 // rad/ns, relative to the ESM centroid
  double lifetime_ns = 0.0;
  double ms_branch = 0.0;              // fraction of decay routed through the singlets
  Eigen::Matrix<complex<double>, 6, 1> composition;   // over esm_electronic_basis()
  std::array<complex<double>, 3> sigma_plus;   // coupling amplitude from GSM m_s = +1,0,-1
  std::array<complex<double>, 3> sigma_minus;
  std::array<double, 6> mixing_weight;         // |<zero-field level j | this>|^2
  std::array<double, 3> radiative_dest;        // decay destination distribution over m_s

  double energy_ghz() const { return to_ghz(energy); }
};

struct LevelTable {
  std::array<EsmLevel, 6> levels;      // ascending energy, labeled M1..M6
  double bz_tesla = 0.0;
  GroundLevels ground;
  std::array<double, 6> lifetimes_0mt_ns;
  std::array<double, 6> ms_branch_0mt;

  // Index of the readout level: the sigma+ coupled m_s=0 level (M4 at 20 mT).
  int readout_level() const;
};

// 6x6 GSM Hamiltonian on m_s (x) m_n (diagonal in this basis).
Operator build_gsm(const GsmParams& p, const FieldConfig& field);

// 12x12 ESM Hamiltonian on (m_l = +-1)(x) m_s (x) m_n (nuclear identity).
Operator build_esm(const EsmParams& p, const FieldConfig& field);

// 6x6 electronic ESM block, basis esm_electronic_basis().
MatrixXcd build_esm_electronic(const EsmParams& p, const FieldConfig& field);

GroundLevels ground_levels(const GsmParams& p, const FieldConfig& field);

// Defaults from the zero-field spectroscopy: lifetimes {7.5,7.5,12.1,12.1,5.1,12.1} ns.
std::array<double, 6> default_lifetimes_0mt();

// Zero-field singlet branchings; `low_branch` fills the three weakly coupled
// levels (the published constraint is a 0-1% band).
std::array<double, 6> default_ms_branch_0mt(double low_branch = 0.01);

// Diagonalize the electronic ESM at the given field and dress each level with
// lifetime and singlet branching obtained by mixing the zero-field values:
// decay rates mix as squared overlaps, branching fractions mix directly.
LevelTable diagonalize_esm(const EsmParams& esm, const GsmParams& gsm, const FieldConfig& field,
                           const std::array<double, 6>& lifetimes_0mt,
                           const std::array<double, 6>& ms_branch_0mt);

LevelTable make_level_table(const FieldConfig& field, double low_branch = 0.01);

enum class Polarization { SigmaPlus, SigmaMinus };

struct Transition {
  int level;                 // index into LevelTable::levels
  complex<double> amplitude; // polarization-row amplitude
  double detuning;           // rad/ns, relative to the readout line
};

// Optical transitions reachable from `ms` with the given polarization,
// ordered by |detuning| from the readout (M4 <-> m_s=0) line.
std::vector<Transition> transition_selection(const LevelTable& table, Polarization pol, int ms,
                                             double amplitude_cutoff = 1e-9);

} // namespace nvdit
