#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nvdit/spin_ops.hpp"

using namespace nvdit;
using Eigen::MatrixXcd;

namespace {
const std::complex<double> I1(0.0, 1.0);
}

TEST_CASE("spin-1 matrices match the printed forms") {
  auto s = spin1_operators();
  CHECK(s.sz(0, 0).real() == doctest::Approx(1.0));
  CHECK(s.sz(1, 1).real() == doctest::Approx(0.0));
  CHECK(s.sz(2, 2).real() == doctest::Approx(-1.0));
  CHECK(std::abs(s.sx(0, 1) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(s.sy(1, 0) - I1 / std::sqrt(2.0)) < 1e-15);

  // raising/lowering recombine into the printed x/y matrices
  CHECK(((s.splus + s.sminus) / 2.0 - s.sx).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(((s.splus - s.sminus) / (2.0 * I1) - s.sy).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("angular momentum algebra") {
  auto s = spin1_operators();
  CHECK((commutator(s.sx, s.sy) - I1 * s.sz).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((commutator(s.sz, s.splus) - s.splus).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((commutator(s.sz, s.sminus) + s.sminus).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("raising the m=-1 state gives sqrt(2) times m=0") {
  auto s = spin1_operators();
  Eigen::Vector3cd down(0, 0, 1);
  Eigen::Vector3cd up = s.splus * down;
  CHECK(std::abs(up(1) - std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(up(0)) + std::abs(up(2)) < 1e-15);
}

TEST_CASE("embed places operators with identities elsewhere") {
  auto s = spin1_operators();
  std::vector<int> dims = {3, 3, 2};
  MatrixXcd sz_full = embed(s.sz, 1, dims);
  REQUIRE(sz_full.rows() == 18);
  // diagonal pattern (1,0,-1) per m_s block, repeated over m_l and m_n
  auto labels = nv_basis();
  for (int k = 0; k < 18; ++k) CHECK(sz_full(k, k).real() == doctest::Approx(labels[k].ms));

  MatrixXcd id = embed(MatrixXcd::Identity(3, 3), 0, dims);
  CHECK((id - MatrixXcd::Identity(18, 18)).cwiseAbs().maxCoeff() == 0.0);

  MatrixXcd up_l = embed(s.splus, 0, dims);
  MatrixXcd dn_l = embed(s.sminus, 0, dims);
  CHECK((up_l.adjoint() - dn_l).cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(embed(s.sz, 2, dims), std::invalid_argument);
}

TEST_CASE("embed preserves spectra with multiplicity") {
  auto s = spin1_operators();
  std::vector<int> dims = {3, 3, 2};
  MatrixXcd m = embed(s.sx, 1, dims);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m);
  // eigenvalues of sx are {-1, 0, +1}, each with multiplicity 6 here
  int count[3] = {0, 0, 0};
  for (int k = 0; k < 18; ++k) {
    double v = es.eigenvalues()(k);
    if (std::abs(v + 1) < 1e-9) count[0]++;
    if (std::abs(v) < 1e-9) count[1]++;
    if (std::abs(v - 1) < 1e-9) count[2]++;
  }
  CHECK(count[0] == 6);
  CHECK(count[1] == 6);
  CHECK(count[2] == 6);
}

TEST_CASE("basis bookkeeping") {
  auto full = nv_basis();
  REQUIRE(full.size() == 18);
  // ordering: m_l outermost, descending everywhere
  CHECK(full[0].ml == +1);
  CHECK(full[17].ml == -1);
  CHECK(full[6].ml == 0); // GSM slice starts at index 6

  auto gsm = gsm_basis();
  REQUIRE(gsm.size() == 6);
  for (int k = 0; k < 6; ++k) {
    CHECK(gsm[k].ml == 0);
    CHECK(full[6 + k].ms == gsm[k].ms);
    CHECK(full[6 + k].mn2 == gsm[k].mn2);
  }
}
