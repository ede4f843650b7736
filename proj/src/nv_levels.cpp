#include "nvdit/nv_levels.hpp"

#include <algorithm>
#include <cmath>

namespace nvdit {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

} // namespace

void GsmParams::validate() const {
  require(d_gsm > 0 && g_par > 0 && mu_b > 0 && mu_n > 0, "GsmParams: magnitudes must be positive");
  require(g_par_n < 0, "GsmParams: nuclear g-factor must be negative");
}

void EsmParams::validate() const {
  require(d_par > 0 && d_perp > 0 && lambda_par > 0 && lambda_perp > 0 && l_par > 0 && g_par > 0,
          "EsmParams: all parameters must be positive");
}

void FieldConfig::validate() const {
  require(std::isfinite(bz_tesla), "FieldConfig: B_z must be finite");
  require(bz_tesla >= 0.0 && bz_tesla <= 0.1, "FieldConfig: validated range is 0 <= B_z <= 0.1 T");
}

void MetastableModel::validate() const {
  require(lifetime_long_ns > 0, "MetastableModel: lifetime must be positive");
  require(flip_from_plus1 >= 0 && flip_from_plus1 <= 1 && flip_from_0 >= 0 && flip_from_0 <= 1,
          "MetastableModel: flip probabilities must lie in [0,1]");
  require(flip_from_plus1 + flip_from_0 >= 1.0 - 1e-12,
          "MetastableModel: exit distribution requires flip_from_plus1 + flip_from_0 >= 1");
}

Operator build_gsm(const GsmParams& p, const FieldConfig& field) {
  p.validate();
  field.validate();
  auto s = spin1_operators();
  Eigen::Matrix2cd iz = nuclear_iz();
  Eigen::Matrix2cd i2 = Eigen::Matrix2cd::Identity();
  Matrix3cd i3 = Matrix3cd::Identity();
  double bz = field.bz_tesla;

  MatrixXcd h = p.d_gsm * kron(s.sz * s.sz - (2.0 / 3.0) * i3, i2);
  h += p.mu_b * p.g_par * bz * kron(s.sz, i2);
  h += p.mu_n * p.g_par_n * bz * kron(i3, iz);
  return Operator{h, gsm_basis()};
}

MatrixXcd build_esm_electronic(const EsmParams& p, const FieldConfig& field) {
  p.validate();
  field.validate();
  auto s = spin1_operators();
  const Matrix3cd& lx = s.sx;   // identical matrices serve the m_l subsystem
  const Matrix3cd& ly = s.sy;
  const Matrix3cd& lz = s.sz;
  Matrix3cd i3 = Matrix3cd::Identity();
  double bz = field.bz_tesla;

  // Spin-orbit / spin-spin structure on m_l (x) m_s (9x9), then restricted to
  // the optically active m_l = +-1 block.  The transverse terms act with full
  // weight on the orbital Pauli operators: (L_x^2 - L_y^2) and
  // (L_x L_y + L_y L_x) are exactly sigma_x and sigma_y on the m_l = +-1
  // doublet, which is what reproduces the measured A1/A2 splitting of
  // 4 D_perp and the level pattern at 20 mT.
  MatrixXcd h = p.d_par * kron(lz * lz, s.sz * s.sz - (2.0 / 3.0) * i3);
  h -= p.lambda_par * kron(lz, s.sz);
  h += p.d_perp * (kron(lx * lx - ly * ly, s.sy * s.sy - s.sx * s.sx) -
                   kron(lx * ly + ly * lx, s.sy * s.sx + s.sx * s.sy));
  h += p.lambda_perp * (kron(lx * lx - ly * ly, s.sx * s.sz + s.sz * s.sx) -
                        kron(lx * ly + ly * lx, s.sy * s.sz + s.sz * s.sy));
  h += p.mu_b * bz * (p.l_par * kron(lz, i3) + p.g_par * kron(lz * lz, s.sz));

  // m_l basis is (+1, 0, -1); keep rows/cols {0,1,2} (m_l=+1) and {6,7,8} (m_l=-1)
  std::array<int, 6> idx = {0, 1, 2, 6, 7, 8};
  MatrixXcd out(6, 6);
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) out(a, b) = h(idx[a], idx[b]);
  return out;
}

Operator build_esm(const EsmParams& p, const FieldConfig& field) {
  MatrixXcd h6 = build_esm_electronic(p, field);
  MatrixXcd h12 = kron(h6, Eigen::Matrix2cd::Identity());
  std::vector<BasisLabel> basis;
  for (const auto& e : esm_electronic_basis())
    for (int mn2 : {+1, -1}) basis.push_back({e.ml, e.ms, mn2});
  return Operator{h12, basis};
}

GroundLevels ground_levels(const GsmParams& p, const FieldConfig& field) {
  Operator h = build_gsm(p, field);
  GroundLevels g;
  for (int k = 0; k < 6; ++k) g.energy[k] = h.mat(k, k).real();
  for (int ms : {+1, 0, -1}) {
    double bz = field.bz_tesla;
    g.electronic[spin_index(ms)] = p.d_gsm * (ms * ms - 2.0 / 3.0) + p.mu_b * p.g_par * bz * ms;
  }
  return g;
}

std::array<double, 6> default_lifetimes_0mt() { return {7.5, 7.5, 12.1, 12.1, 5.1, 12.1}; }

std::array<double, 6> default_ms_branch_0mt(double low_branch) {
  return {0.38, 0.38, low_branch, low_branch, 0.54, low_branch};
}

namespace {

// Eigen-decomposition with deterministic handling of degenerate clusters:
// inside each cluster the eigenvectors are rotated to diagonalize S_z
// (descending), and residual S_z degeneracy is broken with the orbital
// sigma_x = L_x^2 - L_y^2 (descending).  Phases fixed by making the largest
// component real positive.
struct EsmEigen {
  Eigen::Matrix<double, 6, 1> energies;
  Eigen::Matrix<complex<double>, 6, 6> vectors; // columns
};

EsmEigen diagonalize_sorted(const MatrixXcd& h6) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(h6);
  if (solver.info() != Eigen::Success) throw std::runtime_error("ESM eigensolver failed");
  Eigen::VectorXd ev = solver.eigenvalues();
  MatrixXcd vec = solver.eigenvectors();

  // S_z and orbital sigma_x in the electronic basis (ml,ms) ordering
  auto basis = esm_electronic_basis();
  MatrixXcd sz = MatrixXcd::Zero(6, 6);
  MatrixXcd orb_x = MatrixXcd::Zero(6, 6);
  for (int a = 0; a < 6; ++a) {
    sz(a, a) = basis[a].ms;
    for (int b = 0; b < 6; ++b)
      if (basis[a].ms == basis[b].ms && basis[a].ml == -basis[b].ml) orb_x(a, b) = 1.0;
  }

  const double cluster_tol = ghz(1e-6); // 1 kHz
  auto rotate_cluster = [&](int lo, int hi, const MatrixXcd& opm) {
    int n = hi - lo;
    if (n < 2) return;
    MatrixXcd sub = vec.middleCols(lo, n);
    MatrixXcd restricted = sub.adjoint() * opm * sub;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> rs(restricted);
    // descending in the tie-break operator's expectation value
    MatrixXcd rot(n, n);
    for (int k = 0; k < n; ++k) rot.col(k) = rs.eigenvectors().col(n - 1 - k);
    vec.middleCols(lo, n) = sub * rot;
  };

  int i = 0;
  while (i < 6) {
    int j = i + 1;
    while (j < 6 && ev[j] - ev[i] < cluster_tol) ++j;
    if (j - i > 1) {
      rotate_cluster(i, j, sz);
      // split by spin character and break residual ties with the orbital
      // operator; admixture-level <S_z> (order 1e-3) still counts as a tie
      int a = i;
      while (a < j) {
        int b = a + 1;
        double za = (vec.col(a).adjoint() * sz * vec.col(a))(0).real();
        while (b < j) {
          double zb = (vec.col(b).adjoint() * sz * vec.col(b))(0).real();
          if (std::abs(zb - za) > 0.01) break;
          ++b;
        }
        rotate_cluster(a, b, orb_x);
        a = b;
      }
    }
    i = j;
  }

  for (int k = 0; k < 6; ++k) {
    int imax = 0;
    double amax = 0;
    for (int r = 0; r < 6; ++r)
      if (std::abs(vec(r, k)) > amax) {
        amax = std::abs(vec(r, k));
        imax = r;
      }
    complex<double> phase = vec(imax, k) / std::abs(vec(imax, k));
    vec.col(k) /= phase;
  }

  EsmEigen out;
  out.energies = ev;
  out.vectors = vec;
  return out;
}

} // namespace

LevelTable diagonalize_esm(const EsmParams& esm, const GsmParams& gsm, const FieldConfig& field,
                           const std::array<double, 6>& lifetimes_0mt,
                           const std::array<double, 6>& ms_branch_0mt) {
  MatrixXcd h = build_esm_electronic(esm, field);
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("diagonalize_esm: Hamiltonian is not Hermitian");

  EsmEigen at_field = diagonalize_sorted(h);
  FieldConfig zero{0.0};
  EsmEigen at_zero = diagonalize_sorted(build_esm_electronic(esm, zero));

  // energies relative to the ESM centroid (the Hamiltonian is traceless, so
  // this is a numerical no-op kept as the declared convention)
  double centroid = at_field.energies.sum() / 6.0;

  auto basis = esm_electronic_basis();
  LevelTable table;
  table.bz_tesla = field.bz_tesla;
  table.ground = ground_levels(gsm, field);
  table.lifetimes_0mt_ns = lifetimes_0mt;
  table.ms_branch_0mt = ms_branch_0mt;

  for (int k = 0; k < 6; ++k) {
    EsmLevel& lv = table.levels[k];
    lv.energy = at_field.energies[k] - centroid;
    lv.composition = at_field.vectors.col(k);

    double rate = 0.0, branch = 0.0, wsum = 0.0;
    for (int j = 0; j < 6; ++j) {
      complex<double> ov = (at_zero.vectors.col(j).adjoint() * at_field.vectors.col(k))(0);
      double w = std::norm(ov);
      lv.mixing_weight[j] = w;
      rate += w / lifetimes_0mt[j];
      branch += w * ms_branch_0mt[j];
      wsum += w;
    }
    (void)wsum; // completeness checked in tests
    lv.lifetime_ns = 1.0 / rate;
    lv.ms_branch = branch;

    for (int ms : {+1, 0, -1}) {
      int si = spin_index(ms);
      // absorbing sigma+ raises m_l: GSM m_s couples to the (m_l=+1, m_s) component
      int row_plus = -1, row_minus = -1;
      for (int r = 0; r < 6; ++r) {
        if (basis[r].ms == ms && basis[r].ml == +1) row_plus = r;
        if (basis[r].ms == ms && basis[r].ml == -1) row_minus = r;
      }
      lv.sigma_plus[si] = lv.composition(row_plus);
      lv.sigma_minus[si] = lv.composition(row_minus);
    }
    for (int ms : {+1, 0, -1}) {
      int si = spin_index(ms);
      lv.radiative_dest[si] = std::norm(lv.sigma_plus[si]) + std::norm(lv.sigma_minus[si]);
    }
  }
  return table;
}

LevelTable make_level_table(const FieldConfig& field, double low_branch) {
  return diagonalize_esm(EsmParams{}, GsmParams{}, field, default_lifetimes_0mt(),
                         default_ms_branch_0mt(low_branch));
}

int LevelTable::readout_level() const {
  // the m_s = 0 level with the largest sigma+ amplitude
  int best = 0;
  double amax = -1.0;
  for (int k = 0; k < 6; ++k) {
    double a = std::abs(levels[k].sigma_plus[kSpinZero]);
    if (a > amax) {
      amax = a;
      best = k;
    }
  }
  return best;
}

std::vector<Transition> transition_selection(const LevelTable& table, Polarization pol, int ms,
                                             double amplitude_cutoff) {
  if (ms < -1 || ms > 1) throw std::invalid_argument("transition_selection: invalid m_s");
  int si = spin_index(ms);
  int m4 = table.readout_level();
  double readout_line = table.levels[m4].energy - table.ground.electronic[kSpinZero];

  std::vector<Transition> out;
  for (int k = 0; k < 6; ++k) {
    complex<double> amp = (pol == Polarization::SigmaPlus) ? table.levels[k].sigma_plus[si]
                                                           : table.levels[k].sigma_minus[si];
    if (std::abs(amp) < amplitude_cutoff) continue;
    double line = table.levels[k].energy - table.ground.electronic[si];
    out.push_back({k, amp, line - readout_line});
  }
  std::sort(out.begin(), out.end(),
            [](const Transition& a, const Transition& b) { return std::abs(a.detuning) < std::abs(b.detuning); });
  return out;
}

} // namespace nvdit
