#include "hnsim/model.hpp"

#include <bit>

#include "hnsim/kernels.hpp"

namespace hnsim {

double fibonacci_alpha(int n) {
  if (n < 0) throw DomainError("fibonacci_alpha: n must be non-negative");
  double a = 1.0, b = 1.0;  // f_0, f_1
  for (int i = 0; i < n; ++i) {
    const double c = a + b;
    a = b;
    b = c;
  }
  return a / b;
}

RVec quasiperiodic_potential(double W, double alpha, double theta, int L) {
  RVec w(L);
  for (int j = 0; j < L; ++j) w[j] = W * std::cos(2.0 * kPi * alpha * j + theta);
  return w;
}

SparseHamiltonian::SparseHamiltonian(const ModelParams& p, BasisPtr basis)
    : params_(p), basis_(std::move(basis)), hermitian_(p.g == 0.0) {
  const FockBasis& b = *basis_;
  if (b.sites() != p.L || (b.fixed_number() && b.particles() != p.N))
    throw DomainError("build_hamiltonian: basis (L=" + std::to_string(b.sites()) +
                      ", N=" + std::to_string(b.particles()) + ") does not match parameters (L=" +
                      std::to_string(p.L) + ", N=" + std::to_string(p.N) + ")");
  const int L = p.L;
  const RVec w = quasiperiodic_potential(p.W, p.alpha, p.theta, L);
  const double gl = p.gamma_left();
  const double gr = p.gamma_right();
  const int bonds = p.boundary == Boundary::periodic ? L : L - 1;

  std::vector<SparseMatrix::Triplet> trip;
  trip.reserve(b.size() * static_cast<std::size_t>(bonds + 1));
  for (std::size_t a = 0; a < b.size(); ++a) {
    const std::uint32_t s = b.state(a);
    const auto row = static_cast<std::int64_t>(a);
    double diag = 0.0;
    for (int j = 0; j < L; ++j) {
      if ((s >> j) & 1u) diag += w[j];
    }
    for (int j = 0; j < bonds; ++j) {
      const int jp = (j + 1) % L;
      const bool nj = (s >> j) & 1u;
      const bool njp = (s >> jp) & 1u;
      if (nj && njp) diag += p.V;
      // -G_L c_j^+ c_{j+1}: particle moves jp -> j.
      if (njp && !nj) {
        const std::uint32_t t = (s & ~(1u << jp)) | (1u << j);
        trip.push_back({static_cast<std::int64_t>(b.rank(t)), row,
                        -gl * kernels::hop_sign(s, j, jp)});
      }
      // -G_R c_{j+1}^+ c_j: particle moves j -> jp.
      if (nj && !njp) {
        const std::uint32_t t = (s & ~(1u << j)) | (1u << jp);
        trip.push_back({static_cast<std::int64_t>(b.rank(t)), row,
                        -gr * kernels::hop_sign(s, jp, j)});
      }
    }
    trip.push_back({row, row, diag});
  }
  matrix_ = SparseMatrix(static_cast<std::int64_t>(b.size()), std::move(trip));
}

SparseHamiltonian build_hamiltonian(const ModelParams& params, BasisPtr basis) {
  return SparseHamiltonian(params, std::move(basis));
}

CMat single_particle_hamiltonian(const ModelParams& p) {
  if (p.L < 2) throw DomainError("single_particle_hamiltonian: L must be at least 2");
  const int L = p.L;
  const RVec w = quasiperiodic_potential(p.W, p.alpha, p.theta, L);
  CMat h = CMat::Zero(L, L);
  const int bonds = p.boundary == Boundary::periodic ? L : L - 1;
  for (int j = 0; j < L; ++j) h(j, j) = w[j];
  for (int j = 0; j < bonds; ++j) {
    const int jp = (j + 1) % L;
    h(j, jp) += -p.gamma_left();
    h(jp, j) += -p.gamma_right();
  }
  return h;
}

cplx dispersion(double k, double g, double gamma0) {
  return -2.0 * gamma0 * cplx(std::cosh(g) * std::cos(k), std::sinh(g) * std::sin(k));
}

Boundary parse_boundary(const std::string& s) {
  if (s == "periodic" || s == "pbc") return Boundary::periodic;
  if (s == "open" || s == "obc") return Boundary::open;
  throw ConfigError("unknown boundary '" + s + "' (expected periodic|open)");
}

std::string to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "open"; }

}  // namespace hnsim
