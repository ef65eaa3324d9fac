#pragma once

#include <vector>

#include "hnsim/basis.hpp"
#include "hnsim/common.hpp"
#include "hnsim/model.hpp"

namespace hnsim {

/// Eigenvalues with biorthogonally paired right and left eigenvectors.
/// Column a of `right` is |a>, column a of `left` is the ket |a>> with
/// H^dagger |a>> = E_a^* |a>>, scaled so that <<a|b> = delta_ab.
struct SpectrumResult {
  CVec eigenvalues;
  CMat right;
  CMat left;
  double biorthogonality_residual = 0.0;  ///< max |<<a|b> - delta_ab|
  std::vector<Eigen::Index> flagged;      ///< pairs matched beyond tolerance
};

struct SpectrumOptions {
  /// Relative tolerance (times spectral radius) for left/right pairing and
  /// for grouping degenerate eigenvalues.
  double pairing_tolerance = 1e-8;
  /// Skip the O(D^3) residual evaluation.
  bool compute_residual = true;
};

/// Dense diagonalization of H and of H^dagger, paired by nearest eigenvalue
/// and biorthonormalized inside every degenerate cluster. Hermitian input
/// uses the self-adjoint solver and left = right.
SpectrumResult full_spectrum(const SparseHamiltonian& h, const SpectrumOptions& opts = {});
SpectrumResult full_spectrum(const CMat& h, bool hermitian, const SpectrumOptions& opts = {});

/// Eigenvalues only. Real matrices go through the real solver, so real
/// eigenvalues come back with an exactly zero imaginary part.
CVec spectrum_values(const SparseHamiltonian& h);

/// c_a = <<a|psi>.
CVec expansion_coefficients(const SpectrumResult& spec, const ManyBodyVector& psi);

/// || sum_a c_a |a> - psi ||.
double reconstruction_error(const SpectrumResult& spec, const ManyBodyVector& psi, const CVec& c);

/// Fraction of eigenvalues with |Im E| > threshold.
double imag_fraction(const CVec& eigenvalues, double threshold = 1e-10);

struct ImagGapStats {
  double top = 0.0;    ///< max Im E
  double tilde = 0.0;  ///< mean of the 2nd..5th largest Im E
  RVec deltas;         ///< 2 (Im E_1 - Im E_nu), nu = 1..D in descending order
};

/// Requires at least 5 eigenvalues. Order is descending Im E, ties broken
/// by ascending Re E.
ImagGapStats imag_gap_stats(const CVec& eigenvalues);

/// Indices sorted by descending Im E (ties: ascending Re E).
std::vector<Eigen::Index> order_by_imag(const CVec& eigenvalues);

}  // namespace hnsim
