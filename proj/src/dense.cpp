#include "hnsim/dense.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace hnsim {

std::optional<EigenDecomposition> decompose(const CMat& a) {
  Eigen::ComplexEigenSolver<CMat> solver(a, true);
  if (solver.info() != Eigen::Success) return std::nullopt;
  EigenDecomposition d;
  d.values = solver.eigenvalues();
  d.right = solver.eigenvectors();
  Eigen::PartialPivLU<CMat> lu(d.right);
  d.right_inverse = lu.inverse();
  if (!d.right_inverse.allFinite()) return std::nullopt;
  const auto norm1 = [](const CMat& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); };
  d.condition = norm1(d.right) * norm1(d.right_inverse);
  if (!std::isfinite(d.condition)) return std::nullopt;
  return d;
}

CMat expm_taylor(const CMat& a, cplx z) {
  const CMat za = z * a;
  const double norm = za.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const CMat b = za / std::ldexp(1.0, squarings);
  const auto n = a.rows();
  CMat result = CMat::Identity(n, n);
  CMat term = CMat::Identity(n, n);
  // ||b|| <= 0.5: 18 terms bring the truncation below 1e-17 relative.
  for (int k = 1; k <= 18; ++k) {
    term = term * b / static_cast<double>(k);
    result += term;
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

CMat expm(const CMat& a, cplx z, double cond_limit, bool* used_eig) {
  if (auto d = decompose(a); d && d->condition < cond_limit) {
    if (used_eig) *used_eig = true;
    CVec e(d->values.size());
    for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = std::exp(z * d->values[i]);
    return d->right * e.asDiagonal() * d->right_inverse;
  }
  if (used_eig) *used_eig = false;
  return expm_taylor(a, z);
}

void require_finite(const CVec& v, const char* where) {
  if (!v.allFinite()) throw NumericalError(std::string(where) + ": non-finite values encountered");
}

void require_finite(const CMat& m, const char* where) {
  if (!m.allFinite()) throw NumericalError(std::string(where) + ": non-finite values encountered");
}

}  // namespace hnsim
