#pragma once

#include "hnsim/basis.hpp"
#include "hnsim/common.hpp"

// Data-parallel kernels behind the observables. Every kernel has a serial
// reference (kernels_serial.cpp) and an OpenMP variant (kernels_omp.cpp)
// that reproduces it bitwise; the tests and the benchmark compare the two.
namespace hnsim::kernels {

/// Fermionic sign of c_i^dagger c_j acting on `s` (bits strictly between).
inline double hop_sign(std::uint32_t s, int i, int j) {
  const int lo = i < j ? i : j;
  const int hi = i < j ? j : i;
  if (hi - lo <= 1) return 1.0;
  const std::uint32_t mask = ((1u << hi) - 1u) & ~((1u << (lo + 1)) - 1u);
  return (__builtin_popcount(s & mask) & 1) ? -1.0 : 1.0;
}

/// <c_i^dagger c_j> for unnormalized amplitudes (caller normalizes).
cplx opdm_entry(const FockBasis& basis, const CVec& amp, int i, int j);

void density_serial(const FockBasis& basis, const CVec& amp, RVec& out);
void density_parallel(const FockBasis& basis, const CVec& amp, RVec& out);

void opdm_serial(const FockBasis& basis, const CVec& amp, CMat& out);
void opdm_parallel(const FockBasis& basis, const CVec& amp, CMat& out);

/// n_k = || c_k psi ||^2 with c_k = L^{-1/2} sum_j e^{-ikj} c_j, evaluated
/// by applying the annihilator to the state (no density matrix involved).
void momentum_density_serial(const FockBasis& basis, const CVec& amp, RVec& out);
void momentum_density_parallel(const FockBasis& basis, const CVec& amp, RVec& out);

}  // namespace hnsim::kernels
