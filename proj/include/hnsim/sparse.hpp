#pragma once

#include <cstdint>
#include <vector>

#include "hnsim/common.hpp"

namespace hnsim {

/// Square complex matrix in compressed-row layout. Immutable once built;
/// concurrent products against it are safe.
class SparseMatrix {
 public:
  struct Triplet {
    std::int64_t row;
    std::int64_t col;
    cplx value;
  };

  SparseMatrix() = default;
  /// Duplicate (row, col) entries are summed; exact zeros are kept only on
  /// the diagonal so every row carries its diagonal slot.
  SparseMatrix(std::int64_t dim, std::vector<Triplet> triplets);

  std::int64_t dim() const noexcept { return dim_; }
  std::size_t nonzeros() const noexcept { return values_.size(); }
  std::int64_t row_begin(std::int64_t r) const { return row_ptr_[r]; }
  std::int64_t row_end(std::int64_t r) const { return row_ptr_[r + 1]; }
  std::int64_t col(std::int64_t k) const { return cols_[k]; }
  cplx value(std::int64_t k) const { return values_[k]; }

  /// y = A x.
  void multiply(const CVec& x, CVec& y, Exec exec = Exec::serial) const;

  SparseMatrix transpose() const;
  SparseMatrix adjoint() const;
  CMat to_dense() const;
  /// True when every stored value has zero imaginary part.
  bool is_real() const;
  /// max |A - A^dagger| over stored entries.
  double hermiticity_defect() const;

 private:
  std::int64_t dim_ = 0;
  std::vector<std::int64_t> row_ptr_{0};
  std::vector<std::int64_t> cols_;
  std::vector<cplx> values_;
};

namespace kernels {

/// Reference CSR product.
void csr_multiply_serial(const SparseMatrix& a, const CVec& x, CVec& y);
/// Row-parallel CSR product; identical arithmetic per row, so results are
/// bitwise equal to the serial kernel.
void csr_multiply_parallel(const SparseMatrix& a, const CVec& x, CVec& y);

/// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int max_threads();
void set_threads(int n);

}  // namespace kernels

}  // namespace hnsim
