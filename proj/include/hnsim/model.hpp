#pragma once

#include <cmath>
#include <string>

#include "hnsim/basis.hpp"
#include "hnsim/common.hpp"
#include "hnsim/sparse.hpp"

namespace hnsim {

enum class Boundary { periodic, open };

/// Inverse golden ratio (sqrt(5)-1)/2.
inline const double kGoldenAlpha = (std::sqrt(5.0) - 1.0) / 2.0;

/// Rational approximant f_n / f_{n+1} of the inverse golden ratio with
/// f_0 = f_1 = 1.
double fibonacci_alpha(int n);

struct ModelParams {
  int L = 12;
  int N = 6;
  double gamma0 = 1.0;
  double g = 0.0;      ///< non-reciprocity
  double V = 0.0;      ///< nearest-neighbour interaction
  double W = 0.0;      ///< quasiperiodic potential strength
  double alpha = kGoldenAlpha;
  double theta = 0.0;  ///< potential phase
  Boundary boundary = Boundary::periodic;

  double gamma_left() const { return std::exp(g) * gamma0; }
  double gamma_right() const { return std::exp(-g) * gamma0; }
};

/// W_j = W cos(2 pi alpha j + theta), j = 0..L-1.
RVec quasiperiodic_potential(double W, double alpha, double theta, int L);

/// Many-body Hamiltonian on a basis of this chain,
///   H = -sum_j (G_L c_j^+ c_{j+1} + G_R c_{j+1}^+ c_j) + sum_j (V n_j n_{j+1} + W_j n_j).
/// Accepts a fixed sector matching (L, N) or a full basis of L sites.
class SparseHamiltonian {
 public:
  SparseHamiltonian(const ModelParams& params, BasisPtr basis);

  const SparseMatrix& matrix() const noexcept { return matrix_; }
  const ModelParams& params() const noexcept { return params_; }
  const FockBasis& basis() const noexcept { return *basis_; }
  const BasisPtr& basis_ptr() const noexcept { return basis_; }
  std::int64_t dim() const noexcept { return matrix_.dim(); }
  bool hermitian() const noexcept { return hermitian_; }

  void multiply(const CVec& x, CVec& y, Exec exec = Exec::serial) const {
    matrix_.multiply(x, y, exec);
  }
  CMat to_dense() const { return matrix_.to_dense(); }

 private:
  ModelParams params_;
  BasisPtr basis_;
  SparseMatrix matrix_;
  bool hermitian_;
};

SparseHamiltonian build_hamiltonian(const ModelParams& params, BasisPtr basis);

/// Dense L x L single-particle counterpart: H[j][j+1] = -G_L,
/// H[j+1][j] = -G_R, H[j][j] = W_j; the (L-1, 0) bond only under PBC.
CMat single_particle_hamiltonian(const ModelParams& params);

/// eps_k = -2 gamma0 (cosh g cos k + i sinh g sin k).
cplx dispersion(double k, double g, double gamma0 = 1.0);

Boundary parse_boundary(const std::string& s);
std::string to_string(Boundary b);

}  // namespace hnsim
