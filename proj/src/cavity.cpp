#include "nvdit/cavity.hpp"

#include <cmath>

namespace nvdit {

void CavityParams::validate() const {
  if (!(kappa_a > 0) || !(kappa_b > 0))
    throw std::invalid_argument("CavityParams: mirror rates must be positive");
  if (!(g >= 0)) throw std::invalid_argument("CavityParams: coupling must be non-negative");
  if (!(elastic_retained > 0) || elastic_retained > 1.0)
    throw std::invalid_argument("CavityParams: elastic_retained must lie in (0,1]");
}

CavityParams CavityParams::from_cooperativity(double c, const LevelTable& table, double kappa) {
  if (!(c > 0)) throw std::invalid_argument("from_cooperativity: C must be positive");
  CavityParams p;
  p.kappa_a = p.kappa_b = kappa / 2.0;
  double gamma_target = 0.5 / table.levels[table.readout_level()].lifetime_ns;
  p.g = std::sqrt(c * kappa * gamma_target);
  p.validate();
  return p;
}

CouplingSystem build_coupling(const CavityParams& cavity, const LevelTable& table,
                              Polarization pol) {
  cavity.validate();
  CouplingSystem sys;
  sys.cavity = cavity;
  sys.polarization = pol;
  int m4 = table.readout_level();
  sys.cavity_line = table.levels[m4].energy - table.ground.electronic[kSpinZero];

  for (int ms : {+1, 0, -1}) {
    int si = spin_index(ms);
    for (int k = 0; k < 6; ++k) {
      const EsmLevel& lv = table.levels[k];
      complex<double> amp = (pol == Polarization::SigmaPlus) ? lv.sigma_plus[si] : lv.sigma_minus[si];
      if (std::abs(amp) < 1e-14) continue;
      CoupledLevel cl;
      cl.level = k;
      cl.amp = amp;
      cl.gamma = 0.5 / lv.lifetime_ns;
      cl.delta = (lv.energy - table.ground.electronic[si]) - sys.cavity_line;
      cl.ms_branch = lv.ms_branch;
      cl.dest = lv.radiative_dest;
      sys.levels[si].push_back(cl);
    }
  }
  return sys;
}

ScatterPoint solve_scattering(const CouplingSystem& sys, int ms, double delta) {
  if (ms < -1 || ms > 1) throw std::invalid_argument("solve_scattering: invalid m_s");
  if (std::abs(delta) > ghz(20.0))
    throw std::invalid_argument("solve_scattering: drive outside the +-20 GHz validity window");
  int si = spin_index(ms);
  const auto& coupled = sys.levels[si];
  const complex<double> i1(0.0, 1.0);
  double ka = sys.cavity.kappa_a, kb = sys.cavity.kappa_b;
  double kappa = ka + kb;
  double g_eff = sys.cavity.g * std::sqrt(sys.cavity.elastic_retained);

  // unknowns: (c, e_1..e_n); steady state of the linearized Langevin set
  int n = static_cast<int>(coupled.size());
  MatrixXcd a = MatrixXcd::Zero(n + 1, n + 1);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n + 1);
  a(0, 0) = kappa / 2.0 - i1 * delta;
  rhs(0) = -i1 * std::sqrt(ka); // unit input flux through mirror a
  for (int k = 0; k < n; ++k) {
    complex<double> gk = g_eff * coupled[k].amp;
    a(0, k + 1) = i1 * gk;
    a(k + 1, 0) = i1 * std::conj(gk);
    a(k + 1, k + 1) = coupled[k].gamma - i1 * (delta - coupled[k].delta);
  }

  Eigen::PartialPivLU<MatrixXcd> lu(a);
  Eigen::VectorXcd x = lu.solve(rhs);
  double residual = (a * x - rhs).norm();
  if (!std::isfinite(residual) || residual > 1e-9)
    throw std::runtime_error("solve_scattering: singular or ill-conditioned linear system");

  ScatterPoint pt;
  complex<double> c = x(0);
  pt.r = 1.0 - i1 * std::sqrt(ka) * c;
  pt.t = -i1 * std::sqrt(kb) * c;
  pt.R = std::norm(pt.r);
  pt.T = std::norm(pt.t);
  for (int k = 0; k < n; ++k) {
    double flux = 2.0 * coupled[k].gamma * std::norm(x(k + 1));
    pt.level_flux[coupled[k].level] += flux;
    pt.M_loss += flux * coupled[k].ms_branch;
    pt.S_loss += flux * (1.0 - coupled[k].ms_branch);
  }
  return pt;
}

ScatterPoint solve_scattering(const CouplingSystem& sys, int ms, const DrivingConfig& drive) {
  if (drive.polarization != sys.polarization)
    throw std::invalid_argument("solve_scattering: drive polarization does not match the system");
  if (!std::isfinite(drive.detuning))
    throw std::invalid_argument("solve_scattering: detuning must be finite");
  // probabilities are flux ratios, so the input normalization cancels
  return solve_scattering(sys, ms, drive.detuning);
}

std::vector<double> default_grid(double kappa, double span, int points, int refine) {
  std::vector<double> grid;
  grid.reserve(points + 6 * refine * points / 100);
  double step = 2.0 * span / (points - 1);
  for (int i = 0; i < points; ++i) grid.push_back(-span + i * step);
  double win = 3.0 * kappa;
  double fine = step / refine;
  for (double d = -win; d <= win + 0.5 * fine; d += fine) grid.push_back(d);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [&](double a, double b) { return std::abs(a - b) < fine / 4; }),
             grid.end());
  return grid;
}

ScatteringSpectrum reflection_spectrum(const CouplingSystem& sys, const std::vector<double>& grid,
                                       const std::vector<int>& spins) {
  for (size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("reflection_spectrum: grid must be strictly increasing");
  ScatteringSpectrum spec;
  spec.detuning = grid;
  for (int ms : spins) {
    int si = spin_index(ms);
    spec.spin_present[si] = true;
    spec.by_spin[si].reserve(grid.size());
    for (double d : grid) spec.by_spin[si].push_back(solve_scattering(sys, ms, d));
  }
  return spec;
}

namespace {
constexpr double kSpeedOfLight = 2.99792458e8;  // m/s
constexpr double kHbar = 1.054571817e-34;       // J s
} // namespace

double coupling_from_decay(double quantum_efficiency, double gamma_rad, double rho_omega,
                           double omega) {
  if (!(quantum_efficiency >= 0) || !(gamma_rad > 0) || !(rho_omega > 0) || !(omega > 0))
    throw std::invalid_argument("coupling_from_decay: inputs must be positive");
  double c3 = kSpeedOfLight * kSpeedOfLight * kSpeedOfLight;
  double val = rho_omega * (two_pi / 2.0) * (two_pi / 2.0) * c3 / (kHbar * omega * omega * omega) *
               (gamma_rad / two_pi) * quantum_efficiency;
  return std::sqrt(val);
}

double rho_omega_for_coupling(double g, double quantum_efficiency, double gamma_rad, double omega) {
  if (!(g >= 0) || !(quantum_efficiency > 0) || !(gamma_rad > 0) || !(omega > 0))
    throw std::invalid_argument("rho_omega_for_coupling: inputs must be positive");
  double c3 = kSpeedOfLight * kSpeedOfLight * kSpeedOfLight;
  double denom = (two_pi / 2.0) * (two_pi / 2.0) * c3 / (kHbar * omega * omega * omega) *
                 (gamma_rad / two_pi) * quantum_efficiency;
  return g * g / denom;
}

} // namespace nvdit
