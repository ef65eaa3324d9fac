// OpenMP variants of the data-parallel kernels. Each keeps the per-element
// arithmetic order of its serial reference so outputs match bitwise.

#include "hnsim/kernels.hpp"
#include "hnsim/sparse.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hnsim::kernels {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

void csr_multiply_parallel(const SparseMatrix& a, const CVec& x, CVec& y) {
  const auto n = a.dim();
  y.resize(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < n; ++r) {
    cplx acc{};
    for (auto k = a.row_begin(r); k < a.row_end(r); ++k) acc += a.value(k) * x[a.col(k)];
    y[r] = acc;
  }
}

void density_parallel(const FockBasis& basis, const CVec& amp, RVec& out) {
  const int L = basis.sites();
  const auto n = static_cast<std::int64_t>(basis.size());
  out = RVec::Zero(L);
  // Per-site reduction keeps the summation order of the serial kernel.
#pragma omp parallel for schedule(static)
  for (int j = 0; j < L; ++j) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i)
      if ((basis.state(static_cast<std::size_t>(i)) >> j) & 1u) acc += std::norm(amp[i]);
    out[j] = acc;
  }
}

void opdm_parallel(const FockBasis& basis, const CVec& amp, CMat& out) {
  const int L = basis.sites();
  out = CMat::Zero(L, L);
#pragma omp parallel for schedule(dynamic) collapse(2)
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) out(i, j) = opdm_entry(basis, amp, i, j);
}

}  // namespace hnsim::kernels
