#include "hnsim/sparse.hpp"

#include <algorithm>
#include <cmath>

namespace hnsim {

SparseMatrix::SparseMatrix(std::int64_t dim, std::vector<Triplet> triplets) : dim_(dim) {
  for (std::int64_t r = 0; r < dim; ++r) triplets.push_back({r, r, cplx{}});
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  row_ptr_.assign(static_cast<std::size_t>(dim) + 1, 0);
  for (std::size_t i = 0; i < triplets.size();) {
    const auto& t = triplets[i];
    if (t.row < 0 || t.row >= dim || t.col < 0 || t.col >= dim)
      throw DomainError("SparseMatrix: entry out of range");
    cplx sum{};
    std::size_t j = i;
    for (; j < triplets.size() && triplets[j].row == t.row && triplets[j].col == t.col; ++j)
      sum += triplets[j].value;
    if (sum != cplx{} || t.row == t.col) {
      cols_.push_back(t.col);
      values_.push_back(sum);
      ++row_ptr_[static_cast<std::size_t>(t.row) + 1];
    }
    i = j;
  }
  for (std::size_t r = 0; r < static_cast<std::size_t>(dim); ++r) row_ptr_[r + 1] += row_ptr_[r];
}

void SparseMatrix::multiply(const CVec& x, CVec& y, Exec exec) const {
  if (exec == Exec::parallel)
    kernels::csr_multiply_parallel(*this, x, y);
  else
    kernels::csr_multiply_serial(*this, x, y);
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (std::int64_t r = 0; r < dim_; ++r)
    for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) t.push_back({cols_[k], r, values_[k]});
  return SparseMatrix(dim_, std::move(t));
}

SparseMatrix SparseMatrix::adjoint() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (std::int64_t r = 0; r < dim_; ++r)
    for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      t.push_back({cols_[k], r, std::conj(values_[k])});
  return SparseMatrix(dim_, std::move(t));
}

CMat SparseMatrix::to_dense() const {
  CMat m = CMat::Zero(dim_, dim_);
  for (std::int64_t r = 0; r < dim_; ++r)
    for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) m(r, cols_[k]) += values_[k];
  return m;
}

bool SparseMatrix::is_real() const {
  return std::all_of(values_.begin(), values_.end(), [](cplx v) { return v.imag() == 0.0; });
}

double SparseMatrix::hermiticity_defect() const {
  const SparseMatrix adj = adjoint();
  double worst = 0.0;
  for (std::int64_t r = 0; r < dim_; ++r) {
    // Both rows are column-sorted; merge them.
    auto a = row_ptr_[r], ae = row_ptr_[r + 1];
    auto b = adj.row_ptr_[r], be = adj.row_ptr_[r + 1];
    while (a < ae || b < be) {
      if (b >= be || (a < ae && cols_[a] < adj.cols_[b])) {
        worst = std::max(worst, std::abs(values_[a++]));
      } else if (a >= ae || adj.cols_[b] < cols_[a]) {
        worst = std::max(worst, std::abs(adj.values_[b++]));
      } else {
        worst = std::max(worst, std::abs(values_[a++] - adj.values_[b++]));
      }
    }
  }
  return worst;
}

namespace kernels {

void csr_multiply_serial(const SparseMatrix& a, const CVec& x, CVec& y) {
  const auto n = a.dim();
  y.resize(n);
  for (std::int64_t r = 0; r < n; ++r) {
    cplx acc{};
    for (auto k = a.row_begin(r); k < a.row_end(r); ++k) acc += a.value(k) * x[a.col(k)];
    y[r] = acc;
  }
}

}  // namespace kernels

}  // namespace hnsim
