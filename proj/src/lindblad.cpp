#include "nvdit/lindblad.hpp"

#include <cmath>

namespace nvdit {

using SpMat = Eigen::SparseMatrix<complex<double>>;
using Eigen::VectorXcd;
using Eigen::VectorXd;

void CoherentConfig::validate() const {
  if (!(mean_photons >= 0)) throw std::invalid_argument("CoherentConfig: |alpha|^2 must be >= 0");
  if (!(tau_p_ns > 0)) throw std::invalid_argument("CoherentConfig: pulse duration must be positive");
  if (fock_max == 0 || fock_max < -1)
    throw std::invalid_argument("CoherentConfig: fock_max must be positive or -1 (auto)");
  if (!(rel_tol > 0) || !(abs_tol > 0)) throw std::invalid_argument("CoherentConfig: bad tolerances");
}

int CoherentConfig::default_fock_max() const {
  double n = mean_photons;
  int m = static_cast<int>(std::ceil(n + 5.0 * std::sqrt(n)));
  return std::max(m, 4);
}

LindbladSystem build_lindblad(const CoherentConfig& cfg, const CavityParams& cavity,
                              const LevelTable& table, int ms, double ms0_branch,
                              double amp_cutoff) {
  cfg.validate();
  cavity.validate();
  LindbladSystem sys;
  sys.init_spin = ms;
  sys.fock_dim = (cfg.fock_max > 0 ? cfg.fock_max : cfg.default_fock_max()) + 1;
  sys.kappa_a = cavity.kappa_a;
  sys.kappa_b = cavity.kappa_b;

  int si = spin_index(ms);
  int readout = table.readout_level();
  double cavity_line = table.levels[readout].energy - table.ground.electronic[kSpinZero];
  double g_eff = cavity.g * std::sqrt(cavity.elastic_retained);

  for (int k = 0; k < 6; ++k) {
    if (std::abs(table.levels[k].sigma_plus[si]) >= amp_cutoff) {
      sys.esm_levels.push_back(k);
      sys.esm_pop_rate.push_back(1.0 / table.levels[k].lifetime_ns);
      double branch = (table.levels[k].radiative_dest[kSpinZero] > 0.5) ? ms0_branch
                                                                        : table.levels[k].ms_branch;
      sys.esm_branch.push_back(branch);
      sys.esm_dest.push_back(table.levels[k].radiative_dest);
    }
  }
  int n_exc = static_cast<int>(sys.esm_levels.size());
  sys.nv_dim = 3 + n_exc + 1; // ground spins, excitation levels, shelf
  int shelf = 3 + n_exc;
  int nf = sys.fock_dim, nv = sys.nv_dim, dim = nf * nv;
  auto idx = [&](int f, int j) { return f * nv + j; };

  using T = Eigen::Triplet<complex<double>>;
  std::vector<T> th, td, ta;

  // cavity annihilation
  for (int f = 1; f < nf; ++f)
    for (int j = 0; j < nv; ++j) ta.emplace_back(idx(f - 1, j), idx(f, j), std::sqrt(double(f)));
  sys.cavity_a = SpMat(dim, dim);
  sys.cavity_a.setFromTriplets(ta.begin(), ta.end());

  // rotating frame at the drive (= cavity) frequency: excitation detunings
  // plus the Jaynes-Cummings exchange for each carried level
  for (int e = 0; e < n_exc; ++e) {
    const EsmLevel& lv = table.levels[sys.esm_levels[e]];
    double delta = (lv.energy - table.ground.electronic[si]) - cavity_line;
    complex<double> g_e = g_eff * lv.sigma_plus[si];
    for (int f = 0; f < nf; ++f) th.emplace_back(idx(f, 3 + e), idx(f, 3 + e), delta);
    for (int f = 1; f < nf; ++f) {
      // a sigma^+ : |g,f> -> |e,f-1>
      th.emplace_back(idx(f - 1, 3 + e), idx(f, si), g_e * std::sqrt(double(f)));
      th.emplace_back(idx(f, si), idx(f - 1, 3 + e), std::conj(g_e) * std::sqrt(double(f)));
    }
  }
  sys.hamiltonian = SpMat(dim, dim);
  sys.hamiltonian.setFromTriplets(th.begin(), th.end());

  // drive operator sqrt(kappa_a) (a^dagger + a); alpha_in carried separately
  sys.drive_amp_in = std::sqrt(cfg.mean_photons / cfg.tau_p_ns);
  for (int f = 1; f < nf; ++f)
    for (int j = 0; j < nv; ++j) {
      td.emplace_back(idx(f, j), idx(f - 1, j), std::sqrt(sys.kappa_a) * std::sqrt(double(f)));
      td.emplace_back(idx(f - 1, j), idx(f, j), std::sqrt(sys.kappa_a) * std::sqrt(double(f)));
    }
  sys.drive_op = SpMat(dim, dim);
  sys.drive_op.setFromTriplets(td.begin(), td.end());

  // collapse channels: two mirrors, radiative decay per destination, shelving
  sys.collapse.push_back(std::sqrt(sys.kappa_a) * sys.cavity_a);
  sys.collapse.push_back(std::sqrt(sys.kappa_b) * sys.cavity_a);
  for (int e = 0; e < n_exc; ++e) {
    double rate = sys.esm_pop_rate[e];
    double branch = sys.esm_branch[e];
    for (int dest = 0; dest < 3; ++dest) {
      double r = rate * (1.0 - branch) * sys.esm_dest[e][dest];
      if (r <= 0) continue;
      std::vector<T> tc;
      for (int f = 0; f < nf; ++f) tc.emplace_back(idx(f, dest), idx(f, 3 + e), std::sqrt(r));
      SpMat c(dim, dim);
      c.setFromTriplets(tc.begin(), tc.end());
      sys.collapse.push_back(std::move(c));
    }
    if (branch > 0) {
      std::vector<T> tc;
      for (int f = 0; f < nf; ++f)
        tc.emplace_back(idx(f, shelf), idx(f, 3 + e), std::sqrt(rate * branch));
      SpMat c(dim, dim);
      c.setFromTriplets(tc.begin(), tc.end());
      sys.collapse.push_back(std::move(c));
    }
  }

  // diagonal observables
  sys.cavity_number = VectorXd::Zero(dim);
  sys.photon_mask = VectorXd::Zero(dim);
  sys.readout_mask = VectorXd::Zero(dim);
  sys.joint_mask = VectorXd::Zero(dim);
  sys.excited_mask_total = VectorXd::Zero(dim);
  sys.shelf_mask = VectorXd::Zero(dim);
  for (auto& m : sys.ground_mask) m = VectorXd::Zero(dim);
  sys.level_mask.assign(n_exc, VectorXd::Zero(dim));
  int readout_carried = -1;
  for (int e = 0; e < n_exc; ++e)
    if (sys.esm_levels[e] == readout) readout_carried = e;
  for (int f = 0; f < nf; ++f)
    for (int j = 0; j < nv; ++j) {
      int d = idx(f, j);
      sys.cavity_number(d) = f;
      if (f >= 1) sys.photon_mask(d) = 1.0;
      if (j >= 3 && j < shelf) {
        sys.excited_mask_total(d) = 1.0;
        sys.level_mask[j - 3](d) = 1.0;
        if (j - 3 == readout_carried) {
          sys.readout_mask(d) = 1.0;
          if (f >= 1) sys.joint_mask(d) = 1.0;
        }
      }
      if (j == shelf) sys.shelf_mask(d) = 1.0;
      if (j < 3) sys.ground_mask[j](d) = 1.0;
    }
  return sys;
}

namespace {

struct Rhs {
  const LindbladSystem& sys;
  const CoherentConfig& cfg;
  std::vector<SpMat> cdag;  // precomputed adjoints
  std::vector<SpMat> cdagc; // precomputed C^dagger C
  double sigma_env, center_env;

  explicit Rhs(const LindbladSystem& s, const CoherentConfig& c) : sys(s), cfg(c) {
    cdag.reserve(sys.collapse.size());
    cdagc.reserve(sys.collapse.size());
    for (const auto& cm : sys.collapse) {
      cdag.push_back(SpMat(cm.adjoint()));
      cdagc.push_back(cdag.back() * cm);
    }
    sigma_env = cfg.tau_p_ns / 6.0;
    center_env = cfg.tau_p_ns / 2.0;
  }

  double envelope_amp(double t) const {
    if (cfg.envelope == DriveEnvelope::Flat) return sys.drive_amp_in;
    double u = (t - center_env) / sigma_env;
    // amplitude envelope whose squared integral is the pulse photon number
    double norm = cfg.mean_photons / (sigma_env * std::sqrt(two_pi));
    return std::sqrt(norm) * std::exp(-0.25 * u * u);
  }

  void operator()(double t, const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& drho) const {
    const complex<double> i1(0.0, 1.0);
    double a_in = envelope_amp(t);
    Eigen::MatrixXcd hrho = sys.hamiltonian * rho + a_in * (sys.drive_op * rho);
    Eigen::MatrixXcd rhoh = rho * sys.hamiltonian + a_in * (rho * sys.drive_op);
    drho = -i1 * (hrho - rhoh);
    for (size_t k = 0; k < sys.collapse.size(); ++k) {
      drho += sys.collapse[k] * rho * cdag[k];
      drho -= 0.5 * (cdagc[k] * rho + rho * cdagc[k]);
    }
  }
};

// Dormand-Prince 5(4) adaptive step on the density matrix.
struct Dp54 {
  const Rhs& rhs;
  double rel_tol, abs_tol;

  void integrate(Eigen::MatrixXcd& rho, double t0, double t1, double& h_carry) const {
    static const double c2 = 1. / 5, c3 = 3. / 10, c4 = 4. / 5, c5 = 8. / 9;
    static const double a21 = 1. / 5;
    static const double a31 = 3. / 40, a32 = 9. / 40;
    static const double a41 = 44. / 45, a42 = -56. / 15, a43 = 32. / 9;
    static const double a51 = 19372. / 6561, a52 = -25360. / 2187, a53 = 64448. / 6561,
                        a54 = -212. / 729;
    static const double a61 = 9017. / 3168, a62 = -355. / 33, a63 = 46732. / 5247,
                        a64 = 49. / 176, a65 = -5103. / 18656;
    static const double b1 = 35. / 384, b3 = 500. / 1113, b4 = 125. / 192, b5 = -2187. / 6784,
                        b6 = 11. / 84;
    static const double e1 = 71. / 57600, e3 = -71. / 16695, e4 = 71. / 1920, e5 = -17253. / 339200,
                        e6 = 22. / 525, e7 = -1. / 40;

    double t = t0;
    double h = std::min(h_carry, t1 - t0);
    Eigen::MatrixXcd k1, k2, k3, k4, k5, k6, k7, tmp, err, next;
    rhs(t, rho, k1);
    int steps = 0;
    while (t < t1 - 1e-12) {
      if (++steps > 4000000) throw std::runtime_error("lindblad: integrator failed to converge");
      h = std::min(h, t1 - t);
      tmp = rho + h * a21 * k1;
      rhs(t + c2 * h, tmp, k2);
      tmp = rho + h * (a31 * k1 + a32 * k2);
      rhs(t + c3 * h, tmp, k3);
      tmp = rho + h * (a41 * k1 + a42 * k2 + a43 * k3);
      rhs(t + c4 * h, tmp, k4);
      tmp = rho + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      rhs(t + c5 * h, tmp, k5);
      tmp = rho + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      rhs(t + h, tmp, k6);
      next = rho + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      rhs(t + h, next, k7);
      err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      double scale = abs_tol + rel_tol * std::max(rho.cwiseAbs().maxCoeff(), next.cwiseAbs().maxCoeff());
      double enorm = err.cwiseAbs().maxCoeff() / scale;
      if (enorm <= 1.0) {
        t += h;
        rho.swap(next);
        k1.swap(k7); // FSAL
      } else {
        rhs(t, rho, k1);
      }
      double factor = 0.9 * std::pow(std::max(enorm, 1e-10), -0.2);
      h *= std::min(5.0, std::max(0.2, factor));
      if (h < 1e-9) throw std::runtime_error("lindblad: step size underflow");
      h_carry = h;
    }
  }
};

} // namespace

Trajectory lindblad_evolve(const CoherentConfig& cfg, const LindbladSystem& sys) {
  cfg.validate();
  int dim = sys.dim();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  rho(spin_index(sys.init_spin), spin_index(sys.init_spin)) = 1.0; // vacuum (x) ground spin

  Rhs rhs(sys, cfg);
  Dp54 stepper{rhs, cfg.rel_tol, cfg.abs_tol};

  Trajectory traj;
  traj.excited_integral.assign(sys.esm_levels.size(), 0.0);
  int n_samples = std::max(cfg.samples, 200);
  double dt = cfg.tau_p_ns / n_samples;

  auto diag_expect = [&](const VectorXd& mask) {
    double v = 0;
    for (int d = 0; d < dim; ++d)
      if (mask(d) != 0.0) v += mask(d) * rho(d, d).real();
    return v;
  };
  auto sample = [&](double t) {
    TrajectoryPoint p;
    p.t = t;
    p.trace = rho.trace().real();
    p.cavity_n = diag_expect(sys.cavity_number);
    p.excited_pop = diag_expect(sys.excited_mask_total);
    p.shelf_pop = diag_expect(sys.shelf_mask);
    for (int s = 0; s < 3; ++s) p.ground_pop[s] = diag_expect(sys.ground_mask[s]);
    p.joint_excited_photon = diag_expect(sys.joint_mask);
    // reflected flux: |a_in|^2 + 2 sqrt(ka) Im(a_in <a>) + ka <n>
    double a_in = rhs.envelope_amp(t);
    complex<double> a_mean = (sys.cavity_a * rho).trace();
    p.reflected_flux = a_in * a_in + 2.0 * std::sqrt(sys.kappa_a) * a_in * a_mean.imag() +
                       sys.kappa_a * p.cavity_n;
    return p;
  };

  TrajectoryPoint prev = sample(0.0);
  traj.points.push_back(prev);
  std::vector<double> prev_level(sys.esm_levels.size());
  for (size_t e = 0; e < sys.esm_levels.size(); ++e) prev_level[e] = diag_expect(sys.level_mask[e]);

  double h_carry = 0.05;
  for (int k = 1; k <= n_samples; ++k) {
    double t_next = k * dt;
    stepper.integrate(rho, prev.t, t_next, h_carry);
    TrajectoryPoint p = sample(t_next);
    traj.reflected_photons += 0.5 * (prev.reflected_flux + p.reflected_flux) * dt;
    for (size_t e = 0; e < sys.esm_levels.size(); ++e) {
      double cur = diag_expect(sys.level_mask[e]);
      traj.excited_integral[e] += 0.5 * (prev_level[e] + cur) * dt;
      prev_level[e] = cur;
    }
    traj.trace_drift = std::max(traj.trace_drift, std::abs(p.trace - 1.0));
    traj.hermiticity_drift =
        std::max(traj.hermiticity_drift, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
    traj.points.push_back(p);
    prev = p;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint()));
  traj.min_eigenvalue = es.eigenvalues().minCoeff();
  traj.capture_prob = traj.back().shelf_pop;
  return traj;
}

double joint_excited_photon_probability(const Trajectory& traj, double tau_p_ns) {
  double integral = 0.0;
  for (size_t k = 1; k < traj.points.size(); ++k) {
    double dt = traj.points[k].t - traj.points[k - 1].t;
    integral += 0.5 * (traj.points[k].joint_excited_photon + traj.points[k - 1].joint_excited_photon) * dt;
  }
  return integral / tau_p_ns;
}

double p2plus_estimate(const CoherentConfig& cfg, double p_r, double kappa) {
  if (!(kappa > 0)) throw std::invalid_argument("p2plus_estimate: kappa must be positive");
  double a2 = cfg.mean_photons;
  return a2 * a2 * (1.0 - p_r) * (1.0 - p_r) * kappa * cfg.tau_p_ns / 2.0;
}

PulseChannels coherent_pulse_channels(const CoherentConfig& cfg, const CavityParams& cavity,
                                      const LevelTable& table, const ProtocolConfig& pcfg) {
  PulseChannels ch;

  // the resonant m_s=0 manifold gets the full master equation (saturation and
  // multi-photon effects live there)
  {
    int si = kSpinZero;
    LindbladSystem sys = build_lindblad(cfg, cavity, table, 0, pcfg.ms0_branch);
    Trajectory traj = lindblad_evolve(cfg, sys);
    double mu = pcfg.eta_detect * traj.reflected_photons;
    ch.reflect[si] = cfg.mean_photons > 0 ? traj.reflected_photons / cfg.mean_photons : 0.0;
    ch.click[si] = pcfg.eta_source * (1.0 - std::exp(-mu));
    double cap = 0.0;
    std::array<double, 3> flip{};
    for (size_t e = 0; e < sys.esm_levels.size(); ++e) {
      double occupancy = traj.excited_integral[e];
      cap += sys.esm_pop_rate[e] * sys.esm_branch[e] * occupancy;
      for (int k = 0; k < 3; ++k)
        if (k != si)
          flip[k] += sys.esm_pop_rate[e] * (1.0 - sys.esm_branch[e]) * sys.esm_dest[e][k] * occupancy;
    }
    ch.capture[si] = pcfg.eta_source * cap;
    for (int k = 0; k < 3; ++k) ch.flip[si][k] = pcfg.eta_source * flip[k];
  }

  // the m_s=+-1 manifolds stay far-dispersive and linear (excited population
  // well below 1e-3), so the frequency-domain solve scaled by the pulse
  // photon number is the weak-field limit of the same master equation
  CouplingSystem scat = build_coupling(cavity, table);
  for (int ms : {+1, -1}) {
    int si = spin_index(ms);
    ScatterPoint pt = solve_scattering(scat, ms, 0.0);
    ch.reflect[si] = pt.R;
    ch.click[si] = pcfg.eta_source * (1.0 - std::exp(-pcfg.eta_detect * pt.R * cfg.mean_photons));
    double cap = 0.0;
    std::array<double, 3> flip{};
    for (const CoupledLevel& cl : scat.levels[si]) {
      double flux = pt.level_flux[cl.level] * cfg.mean_photons;
      double branch =
          (cl.dest[kSpinZero] > 0.5) ? pcfg.ms0_branch : cl.ms_branch;
      cap += flux * branch;
      for (int k = 0; k < 3; ++k)
        if (k != si) flip[k] += flux * (1.0 - branch) * cl.dest[k];
    }
    ch.capture[si] = pcfg.eta_source * std::min(1.0, cap);
    for (int k = 0; k < 3; ++k) ch.flip[si][k] = pcfg.eta_source * flip[k];
  }
  return ch;
}

CoherentProtocolResult coherent_protocol(const CoherentConfig& cfg, const CavityParams& cavity,
                                         const LevelTable& table, const ProtocolConfig& pcfg,
                                         int n_max) {
  CoherentProtocolResult res;
  PulseChannels ch = coherent_pulse_channels(cfg, cavity, table, pcfg);
  res.click0 = ch.click[kSpinZero];
  res.click1 = ch.click[kSpinPlus1];
  res.curve = fidelity_curve(pcfg, ch, n_max);
  return res;
}

} // namespace nvdit
