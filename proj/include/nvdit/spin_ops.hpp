#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace nvdit {

using Eigen::MatrixXcd;
using Eigen::Matrix3cd;
using std::complex;

// Quantum numbers of one basis state of the full NV space.
// mn2 stores twice the nuclear projection so everything stays integral.
struct BasisLabel {
  int ml = 0;   // orbital angular momentum projection, {-1,0,+1}
  int ms = 0;   // electron spin projection, {-1,0,+1}
  int mn2 = 1;  // 2*m_n, {-1,+1}

  std::string str() const;
  bool operator==(const BasisLabel&) const = default;
};

// Dense operator over a labeled product basis.
struct Operator {
  MatrixXcd mat;
  std::vector<BasisLabel> basis;

  int dim() const { return static_cast<int>(mat.rows()); }

  // max|A - A^dagger|, the Hermiticity defect
  double hermiticity_defect() const;
  bool is_hermitian(double tol = 1e-12) const { return hermiticity_defect() < tol; }
};

// Spin-1 matrices in the descending basis (+1, 0, -1).
struct Spin1Ops {
  Matrix3cd sx, sy, sz, splus, sminus;
};

Spin1Ops spin1_operators();

// Nuclear spin-1/2 z operator in the descending basis (+1/2, -1/2).
Eigen::Matrix2cd nuclear_iz();

// Kronecker embedding of `op` into slot `slot` of a product space with
// subsystem dimensions `dims`; identities on every other slot.
MatrixXcd embed(const MatrixXcd& op, int slot, const std::vector<int>& dims);

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b);
MatrixXcd commutator(const MatrixXcd& a, const MatrixXcd& b);

// Ordered basis of the full NV space m_l (x) m_s (x) m_n, each descending;
// dimension 18.  The GSM is the m_l = 0 slice, the ESM the m_l = +-1 slices.
std::vector<BasisLabel> nv_basis();

// Basis of the m_s (x) m_n ground space (dimension 6), descending.
std::vector<BasisLabel> gsm_basis();

// Basis of the electronic ESM space (m_l = +-1) (x) m_s (dimension 6),
// ordered (+1,+1),(+1,0),(+1,-1),(-1,+1),(-1,0),(-1,-1) as (ml,ms).
std::vector<BasisLabel> esm_electronic_basis();

} // namespace nvdit
