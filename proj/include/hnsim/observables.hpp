#pragma once

#include "hnsim/basis.hpp"
#include "hnsim/common.hpp"

namespace hnsim {

/// One-particle density matrix, entry (i, j) = <c_i^dagger c_j>.
struct OnePDM {
  CMat matrix;
  int sites() const { return static_cast<int>(matrix.rows()); }
};

/// Site occupations n_j. The state is normalized internally.
RVec density_real(const ManyBodyVector& psi, Exec exec = Exec::serial);

OnePDM one_particle_dm(const ManyBodyVector& psi, Exec exec = Exec::serial);

/// Momentum occupations on k_m = 2 pi m / L, m = -L/2 .. L/2-1, normalized
/// so that they sum to the particle number. Computed by applying plane-wave
/// annihilators to the state, independently of one_particle_dm.
RVec density_momentum(const ManyBodyVector& psi, Exec exec = Exec::serial);

/// n_k = (1/L) sum_{ij} e^{ik(i-j)} <c_i^+ c_j> on the same grid.
RVec momentum_from_opdm(const OnePDM& pdm);

/// Grid momenta matching density_momentum.
RVec momentum_grid(int sites);

/// C(l) = (1/L) sum_j |<c_j^+ c_{(j+l) mod L}>|, l = 1 .. L-1.
RVec correlation_profile(const OnePDM& pdm);

}  // namespace hnsim
