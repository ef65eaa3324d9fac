#pragma once

#include <optional>

#include "hnsim/common.hpp"

namespace hnsim {

/// Diagonalization A = R diag(E) R^{-1} of a general complex matrix.
struct EigenDecomposition {
  CVec values;
  CMat right;
  CMat right_inverse;
  double condition = 0.0;  ///< 1-norm condition number of `right`
};

/// Eigendecomposition with a conditioning estimate. Returns nullopt when the
/// solver fails or the eigenvector matrix is singular in floating point.
std::optional<EigenDecomposition> decompose(const CMat& a);

/// exp(z A) by scaling and squaring a truncated Taylor series.
CMat expm_taylor(const CMat& a, cplx z);

/// exp(z A) through the eigendecomposition when its eigenvector matrix has
/// condition below `cond_limit`, otherwise by Taylor. `used_eig` reports
/// which route ran.
CMat expm(const CMat& a, cplx z, double cond_limit = 1e8, bool* used_eig = nullptr);

/// Throws NumericalError when any entry is non-finite.
void require_finite(const CVec& v, const char* where);
void require_finite(const CMat& m, const char* where);

}  // namespace hnsim
