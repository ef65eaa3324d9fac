#pragma once

#include <utility>

#include "hnsim/common.hpp"

namespace hnsim {

/// Orbitals of an N-particle Slater determinant, one per column (L x N).
/// Only their span matters; evolution keeps them orthonormal.
struct OrbitalSet {
  CMat phi;
  int sites() const { return static_cast<int>(phi.rows()); }
  int particles() const { return static_cast<int>(phi.cols()); }
};

/// Orbitals of the density-wave product state: unit vectors on sites 0, 2, ...
OrbitalSet density_wave_orbitals(int sites);

/// Propagates every orbital by exp(-i t H1), in substeps of at most
/// `max_substep` followed by a QR re-orthonormalization (span preserving;
/// non-unitary flow otherwise collapses all columns onto the fastest-growing
/// mode). Throws NumericalError when the evolved set loses rank (cond > 1e12).
OrbitalSet evolve_orbitals(const CMat& h1, const OrbitalSet& phi0, double t,
                           double max_substep = 0.25);

/// Full L x L one-particle density matrix C(i, j) = <c_i^dagger c_j> of the
/// normalized Slater state: C = P^T with P = Phi (Phi^dagger Phi)^{-1} Phi^dagger.
CMat correlation_matrix(const OrbitalSet& phi);

/// Leading ell x ell block of correlation_matrix (sites 0..ell-1).
CMat correlation_matrix(const OrbitalSet& phi, int ell);

/// -sum [l ln l + (1-l) ln(1-l)] over the eigenvalues of a correlation block.
/// Eigenvalues outside [-1e-8, 1+1e-8] are rejected as an invalid OPDM.
double ff_entropy(const CMat& c);

/// Asymptotic correlation matrix of the two-fold degenerate long-time state
/// at half filling (sites 0..L-1):
///   C_nm = (1/L) sum_{j=1}^{L/2-1} e^{-2 pi i j (n-m)/L} + (e^{-i pi (n-m)} + 1)/(2L)
///        + (-1)^{L/2} (e^{-i Phi} e^{i pi n} + e^{i Phi} e^{-i pi m})/(2L),
/// Phi = 4 cosh(g) t. Requires even L with L/2 even.
CMat asymptotic_corr_matrix(int sites, double g, double t);

/// lambda_{-,+} = 1/2 -+ (1/2) sqrt((1 + sin(phase)) / 2).
std::pair<double, double> lambda_pm(double phase);

/// Propagator for single-particle vectors under a fixed dense H1. Uses the
/// eigendecomposition when it is well conditioned, otherwise Taylor substeps.
class SingleParticlePropagator {
 public:
  explicit SingleParticlePropagator(const CMat& h1);
  /// Normalized exp(-i t H1) psi0 / ||.||.
  CVec propagate(const CVec& psi0, double t) const;
  bool uses_eigendecomposition() const noexcept { return eig_; }

 private:
  CMat h_;
  bool eig_ = false;
  CVec values_;
  CMat right_;
  CMat right_inverse_;
};

struct WavepacketObservables {
  double mean_x = 0.0;    ///< centroid on the ring, in [-0.5, L-0.5)
  double variance = 0.0;  ///< <x^2> - <x>^2 measured around the centroid
  RVec momentum_density;  ///< |psi_k|^2 on k_m = 2 pi m / L, m = -L/2 .. ; sums to 1
};

/// Centroid and spread measured in a window of width L centred on the density
/// maximum, so a packet straddling the seam is not split in two.
WavepacketObservables wavepacket_observables(const CVec& psi);

/// Unwraps successive ring centroids into a continuous trajectory, assuming
/// the packet moves less than L/2 between updates.
class PositionTracker {
 public:
  explicit PositionTracker(int sites) : sites_(sites) {}
  double update(double wrapped);

 private:
  int sites_;
  bool started_ = false;
  double last_ = 0.0;
};

/// Gaussian packet exp(-d^2 / (4 sinh(g) t)) e^{-i pi (j - j0)/2} with
/// d = j - j0 + 2 cosh(g) t wrapped onto the ring, normalized. The carrier
/// is the k = -pi/2 momentum the packet condenses to. Requires t > 0, g > 0.
CVec trial_wavepacket(int j0, double g, double t, int sites);

/// Second-order eigenenergy in the quasiperiodic potential, with the sign
/// convention of dispersion() (gamma0 = 1):
///   -[2 cosh g (1 + W^2/(16 cosh^2 g)) cos k + 2i sinh g (1 - W^2/(16 sinh^2 g)) sin k].
/// With exact = true, E0(k) + (W^2/4) sum_{b=+-2 pi alpha} 1/(E0(k) - E0(k+b))
/// is returned instead of its large-g approximation.
cplx perturbative_dispersion(double k, double g, double W, double alpha, bool exact = false);

/// Sliding speed 2 cosh g (1 + W^2/(16 cosh^2 g)) of the packet.
double perturbative_sliding_speed(double g, double W);

}  // namespace hnsim
