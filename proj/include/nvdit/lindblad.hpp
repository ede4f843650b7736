#pragma once

#include <Eigen/SparseCore>

#include "nvdit/protocol.hpp"

namespace nvdit {

enum class DriveEnvelope { Flat, Gaussian };

struct CoherentConfig {
  double mean_photons = 3.0;       // |alpha|^2 per pulse
  double tau_p_ns = 165.0;
  int fock_max = -1;               // -1: automatic from the intracavity estimate
  DriveEnvelope envelope = DriveEnvelope::Flat;
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  int samples = 220;               // trajectory sampling points per pulse

  void validate() const;
  // conservative truncation for the pulse photon number
  int default_fock_max() const;
};

// NV levels carried by the coherent-drive system: the three ground spins, the
// excitation levels coupled to the initialized spin, and the singlet shelf.
struct LindbladSystem {
  int fock_dim = 0;
  int nv_dim = 0;
  int init_spin = 0;                   // m_s of the prepared state
  std::vector<int> esm_levels;         // LevelTable indices carried
  std::vector<double> esm_pop_rate;    // 1/tau per carried level
  std::vector<double> esm_branch;      // singlet branching per carried level
  std::vector<std::array<double, 3>> esm_dest; // radiative destinations per carried level
  Eigen::SparseMatrix<complex<double>> hamiltonian;   // excluding the drive term
  Eigen::SparseMatrix<complex<double>> drive_op;      // a^dagger + a (scaled by eps(t))
  std::vector<Eigen::SparseMatrix<complex<double>>> collapse;  // sqrt(rate) included
  // diagonal observables (masks/weights over the product basis)
  Eigen::VectorXd cavity_number;
  Eigen::VectorXd photon_mask;         // >= 1 photon
  Eigen::VectorXd readout_mask;        // readout excitation level occupied
  Eigen::VectorXd joint_mask;          // both of the above
  Eigen::VectorXd excited_mask_total;
  Eigen::VectorXd shelf_mask;
  std::array<Eigen::VectorXd, 3> ground_mask;
  std::vector<Eigen::VectorXd> level_mask;   // per carried ESM level
  Eigen::SparseMatrix<complex<double>> cavity_a;
  double drive_amp_in = 0.0;           // input amplitude alpha_in = sqrt(flux)
  double kappa_a = 0.0, kappa_b = 0.0;

  int dim() const { return fock_dim * nv_dim; }
};

// `amp_cutoff` selects which excitation levels are carried; the default keeps
// only the dominant line for the initialized spin.
LindbladSystem build_lindblad(const CoherentConfig& cfg, const CavityParams& cavity,
                              const LevelTable& table, int ms, double ms0_branch = 0.01,
                              double amp_cutoff = 0.1);

struct TrajectoryPoint {
  double t = 0.0;
  double cavity_n = 0.0;
  double excited_pop = 0.0;
  double shelf_pop = 0.0;
  std::array<double, 3> ground_pop{};
  double joint_excited_photon = 0.0;   // P(readout level occupied AND >= 1 photon)
  double reflected_flux = 0.0;         // photons/ns leaving mirror a
  double trace = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  double trace_drift = 0.0;            // max |tr(rho) - 1|
  double hermiticity_drift = 0.0;
  double min_eigenvalue = 0.0;         // most negative rho eigenvalue seen at samples
  double reflected_photons = 0.0;      // integral of reflected flux over the pulse
  double capture_prob = 0.0;           // shelf population at the pulse end
  std::vector<double> excited_integral; // per carried level, integral of occupation (ns)

  const TrajectoryPoint& back() const { return points.back(); }
};

// Evolve one pulse under the driven Lindblad generator with an adaptive
// Dormand-Prince 5(4) integrator.
Trajectory lindblad_evolve(const CoherentConfig& cfg, const LindbladSystem& sys);

// Time-averaged joint probability of (readout level occupied AND >= 1 cavity
// photon) over the pulse; the ionization upper bound.
double joint_excited_photon_probability(const Trajectory& traj, double tau_p_ns);

// Analytic two-or-more-photon estimate |alpha|^4 (1-P_R)^2 kappa tau_p / 2.
double p2plus_estimate(const CoherentConfig& cfg, double p_r, double kappa);

// Per-pulse transition channels for the protocol tree, from master-equation
// fluxes; threshold detector on the reflected mode.
PulseChannels coherent_pulse_channels(const CoherentConfig& cfg, const CavityParams& cavity,
                                      const LevelTable& table, const ProtocolConfig& pcfg);

struct CoherentProtocolResult {
  FidelityCurve curve;
  double click0 = 0.0;  // per-pulse click probability from |0>
  double click1 = 0.0;  // from |+1>
};

CoherentProtocolResult coherent_protocol(const CoherentConfig& cfg, const CavityParams& cavity,
                                         const LevelTable& table, const ProtocolConfig& pcfg,
                                         int n_max);

} // namespace nvdit
