#include "nvdit/spin_ops.hpp"

namespace nvdit {

std::string BasisLabel::str() const {
  auto sgn = [](int v) { return v > 0 ? std::string("+") + std::to_string(v) : std::to_string(v); };
  return "|ml=" + sgn(ml) + ",ms=" + sgn(ms) + ",mn=" + (mn2 > 0 ? "+1/2" : "-1/2") + ">";
}

double Operator::hermiticity_defect() const {
  return (mat - mat.adjoint()).cwiseAbs().maxCoeff();
}

Spin1Ops spin1_operators() {
  const double r2 = std::sqrt(2.0);
  const complex<double> i(0.0, 1.0);
  Spin1Ops s;
  s.sz = Matrix3cd::Zero();
  s.sz(0, 0) = 1.0;
  s.sz(2, 2) = -1.0;
  s.sx = Matrix3cd::Zero();
  s.sx(0, 1) = s.sx(1, 0) = s.sx(1, 2) = s.sx(2, 1) = 1.0 / r2;
  s.sy = Matrix3cd::Zero();
  s.sy(0, 1) = -i / r2;
  s.sy(1, 0) = i / r2;
  s.sy(1, 2) = -i / r2;
  s.sy(2, 1) = i / r2;
  s.splus = Matrix3cd::Zero();
  s.splus(0, 1) = s.splus(1, 2) = r2;
  s.sminus = Matrix3cd::Zero();
  s.sminus(1, 0) = s.sminus(2, 1) = r2;
  return s;
}

Eigen::Matrix2cd nuclear_iz() {
  Eigen::Matrix2cd iz = Eigen::Matrix2cd::Zero();
  iz(0, 0) = 0.5;
  iz(1, 1) = -0.5;
  return iz;
}

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

MatrixXcd commutator(const MatrixXcd& a, const MatrixXcd& b) { return a * b - b * a; }

MatrixXcd embed(const MatrixXcd& op, int slot, const std::vector<int>& dims) {
  if (slot < 0 || slot >= static_cast<int>(dims.size()))
    throw std::invalid_argument("embed: slot out of range");
  if (op.rows() != op.cols() || op.rows() != dims[slot])
    throw std::invalid_argument("embed: operator dimension does not match dims[slot]");
  MatrixXcd out = MatrixXcd::Identity(1, 1);
  for (int k = 0; k < static_cast<int>(dims.size()); ++k) {
    if (k == slot)
      out = kron(out, op);
    else
      out = kron(out, MatrixXcd::Identity(dims[k], dims[k]));
  }
  return out;
}

std::vector<BasisLabel> nv_basis() {
  std::vector<BasisLabel> b;
  for (int ml : {+1, 0, -1})
    for (int ms : {+1, 0, -1})
      for (int mn2 : {+1, -1}) b.push_back({ml, ms, mn2});
  return b;
}

std::vector<BasisLabel> gsm_basis() {
  std::vector<BasisLabel> b;
  for (int ms : {+1, 0, -1})
    for (int mn2 : {+1, -1}) b.push_back({0, ms, mn2});
  return b;
}

std::vector<BasisLabel> esm_electronic_basis() {
  std::vector<BasisLabel> b;
  for (int ml : {+1, -1})
    for (int ms : {+1, 0, -1}) b.push_back({ml, ms, +1});
  return b;
}

} // namespace nvdit
