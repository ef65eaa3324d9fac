#include "hnsim/basis.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "hnsim/rng.hpp"

namespace hnsim {

namespace {

// Pascal table up to kMaxSites, shared by ranking and sizing.
const std::array<std::array<std::uint64_t, kMaxSites + 2>, kMaxSites + 2>& pascal() {
  static const auto table = [] {
    std::array<std::array<std::uint64_t, kMaxSites + 2>, kMaxSites + 2> t{};
    for (int n = 0; n <= kMaxSites + 1; ++n) {
      t[n][0] = 1;
      for (int k = 1; k <= n; ++k) t[n][k] = t[n - 1][k - 1] + (k < n ? t[n - 1][k] : 0);
    }
    return t;
  }();
  return table;
}

// Next larger integer with the same popcount (Gosper's hack).
std::uint32_t next_same_popcount(std::uint32_t v) {
  const std::uint32_t t = v | (v - 1);
  return (t + 1) | (((~t & -~t) - 1) >> (std::countr_zero(v) + 1));
}

}  // namespace

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  if (n <= kMaxSites + 1) return pascal()[n][k];
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<std::uint64_t>(std::llround(r));
}

FockBasis FockBasis::sector(int sites, int particles) {
  if (sites > kMaxSites)
    throw CapacityError("basis: L=" + std::to_string(sites) + " exceeds the supported maximum " +
                        std::to_string(kMaxSites));
  if (sites < 2) throw DomainError("basis: L must be at least 2, got " + std::to_string(sites));
  if (particles < 0 || particles > sites)
    throw DomainError("basis: N=" + std::to_string(particles) + " outside [0, L]");

  FockBasis b(sites, particles);
  const auto count = binomial(sites, particles);
  b.states_.reserve(count);
  if (particles == 0) {
    b.states_.push_back(0);
    return b;
  }
  std::uint32_t v = (particles == 32) ? ~0u : ((1u << particles) - 1u);
  for (std::uint64_t i = 0; i < count; ++i) {
    b.states_.push_back(v);
    if (i + 1 < count) v = next_same_popcount(v);
  }
  return b;
}

FockBasis FockBasis::full(int sites) {
  if (sites > 20)
    throw CapacityError("full basis: L=" + std::to_string(sites) + " exceeds the supported maximum 20");
  if (sites < 1) throw DomainError("full basis: L must be positive");
  FockBasis b(sites, -1);
  b.states_.resize(std::size_t{1} << sites);
  std::iota(b.states_.begin(), b.states_.end(), 0u);
  return b;
}

std::size_t FockBasis::rank(std::uint32_t pattern) const noexcept {
  if (!fixed_number()) return pattern;
  return colex_rank(pattern);
}

std::size_t colex_rank(std::uint32_t pattern) noexcept {
  // Colex rank: sum over set bits (ascending positions p_i) of C(p_i, i+1).
  std::size_t r = 0;
  int i = 0;
  while (pattern) {
    const int p = std::countr_zero(pattern);
    r += pascal()[p][i + 1];
    pattern &= pattern - 1;
    ++i;
  }
  return r;
}

std::optional<std::size_t> FockBasis::index_of(std::uint32_t pattern) const {
  if (sites_ < 32 && (pattern >> sites_) != 0) return std::nullopt;
  if (fixed_number() && std::popcount(pattern) != particles_) return std::nullopt;
  return rank(pattern);
}

ManyBodyVector::ManyBodyVector(BasisPtr basis) : basis_(std::move(basis)) {
  amp_ = CVec::Zero(static_cast<Eigen::Index>(basis_->size()));
}

ManyBodyVector::ManyBodyVector(BasisPtr basis, CVec amplitudes)
    : basis_(std::move(basis)), amp_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amp_.size()) != basis_->size())
    throw DomainError("ManyBodyVector: amplitude length does not match basis size");
}

double ManyBodyVector::normalize() {
  const double n = amp_.norm();
  if (!std::isfinite(n) || n == 0.0)
    throw NumericalError("ManyBodyVector: cannot normalize a vector with norm " + std::to_string(n));
  amp_ /= n;
  return n;
}

ManyBodyVector prepare_fock_state(BasisPtr basis, std::uint32_t pattern) {
  const auto idx = basis->index_of(pattern);
  if (!idx) throw DomainError("prepare_fock_state: pattern not in basis");
  ManyBodyVector v(std::move(basis));
  v.amplitudes()[static_cast<Eigen::Index>(*idx)] = 1.0;
  return v;
}

ManyBodyVector prepare_density_wave(BasisPtr basis) {
  const int L = basis->sites();
  if (L % 2 != 0 || basis->particles() != L / 2)
    throw DomainError("prepare_density_wave: requires even L at half filling");
  std::uint32_t pattern = 0;
  for (int j = 0; j < L; j += 2) pattern |= 1u << j;
  return prepare_fock_state(std::move(basis), pattern);
}

ManyBodyVector apply_creation(const ManyBodyVector& in, std::span<const cplx> orbital,
                              BasisPtr target) {
  const FockBasis& src = in.basis();
  const int L = src.sites();
  if (static_cast<int>(orbital.size()) != L || target->sites() != L)
    throw DomainError("apply_creation: orbital/basis size mismatch");
  if (src.fixed_number() != target->fixed_number() ||
      (src.fixed_number() && target->particles() != src.particles() + 1))
    throw DomainError("apply_creation: target basis must be the N+1 sector or the full basis");

  ManyBodyVector out(std::move(target));
  const auto& a = in.amplitudes();
  auto& b = out.amplitudes();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const cplx ai = a[static_cast<Eigen::Index>(i)];
    if (ai == cplx{}) continue;
    const std::uint32_t s = src.state(i);
    for (int j = 0; j < L; ++j) {
      if ((s >> j) & 1u) continue;
      const std::uint32_t below = s & ((1u << j) - 1u);
      const double sign = (std::popcount(below) & 1) ? -1.0 : 1.0;
      const std::uint32_t t = s | (1u << j);
      b[static_cast<Eigen::Index>(out.basis().rank(t))] += sign * orbital[j] * ai;
    }
  }
  return out;
}

std::vector<int> momentum_labels(int sites) {
  std::vector<int> m(sites);
  const int lo = -(sites / 2);
  std::iota(m.begin(), m.end(), lo);
  return m;
}

CVec plane_wave(int sites, int m) {
  CVec v(sites);
  const double k = 2.0 * kPi * m / sites;
  const double s = 1.0 / std::sqrt(static_cast<double>(sites));
  for (int j = 0; j < sites; ++j) v[j] = std::polar(s, k * j);
  return v;
}

ManyBodyVector prepare_mixed_filling(int sites, std::uint64_t seed) {
  if (sites > 14)
    throw CapacityError("prepare_mixed_filling: L=" + std::to_string(sites) +
                        " exceeds the supported maximum 14");
  auto full = std::make_shared<const FockBasis>(FockBasis::full(sites));
  Rng rng(seed);
  const auto labels = momentum_labels(sites);
  std::vector<CVec> waves;
  for (int m : labels) waves.push_back(plane_wave(sites, m));

  ManyBodyVector total(full);
  const double weight = 1.0 / std::sqrt(static_cast<double>(sites + 1));
  for (int q = 0; q <= sites; ++q) {
    // Uniform Q-subset by partial Fisher-Yates, created in ascending m order.
    std::vector<int> pool(sites);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < q; ++i) {
      const auto j = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(sites - i)));
      std::swap(pool[i], pool[j]);
    }
    std::vector<int> chosen(pool.begin(), pool.begin() + q);
    std::sort(chosen.begin(), chosen.end());

    ManyBodyVector state = prepare_fock_state(full, 0u);
    for (int idx : chosen) {
      state = apply_creation(state, std::span<const cplx>(waves[idx].data(), sites), full);
    }
    total.amplitudes() += weight * state.amplitudes();
  }
  return total;
}

}  // namespace hnsim
