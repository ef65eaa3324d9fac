#include <bit>
#include <unordered_map>
#include <vector>

#include "hnsim/kernels.hpp"

namespace hnsim::kernels {

cplx opdm_entry(const FockBasis& basis, const CVec& amp, int i, int j) {
  const auto n = basis.size();
  cplx acc{};
  if (i == j) {
    for (std::size_t a = 0; a < n; ++a)
      if ((basis.state(a) >> j) & 1u) acc += std::norm(amp[static_cast<Eigen::Index>(a)]);
    return acc;
  }
  for (std::size_t a = 0; a < n; ++a) {
    const std::uint32_t s = basis.state(a);
    if (!((s >> j) & 1u) || ((s >> i) & 1u)) continue;
    const std::uint32_t t = (s & ~(1u << j)) | (1u << i);
    const auto b = basis.rank(t);
    acc += hop_sign(s, i, j) * std::conj(amp[static_cast<Eigen::Index>(b)]) *
           amp[static_cast<Eigen::Index>(a)];
  }
  return acc;
}

void density_serial(const FockBasis& basis, const CVec& amp, RVec& out) {
  const int L = basis.sites();
  const auto n = static_cast<std::int64_t>(basis.size());
  out = RVec::Zero(L);
  for (int j = 0; j < L; ++j) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i)
      if ((basis.state(static_cast<std::size_t>(i)) >> j) & 1u) acc += std::norm(amp[i]);
    out[j] = acc;
  }
}

void opdm_serial(const FockBasis& basis, const CVec& amp, CMat& out) {
  const int L = basis.sites();
  out = CMat::Zero(L, L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) out(i, j) = opdm_entry(basis, amp, i, j);
}

namespace {

// || c_k psi ||^2 for one momentum. The image of c_k lives on patterns with
// one particle fewer; accumulate it in a dense buffer indexed by the
// target's rank (sector N-1 colex rank, or the pattern itself for a full
// basis).
double annihilated_norm(const FockBasis& basis, const CVec& amp, double k,
                        std::vector<cplx>& buffer) {
  const int L = basis.sites();
  const bool fixed = basis.fixed_number();
  const FockBasis* lower = nullptr;
  static thread_local std::unordered_map<std::uint64_t, FockBasis> cache;
  if (fixed) {
    if (basis.particles() == 0) return 0.0;
    const std::uint64_t key = (static_cast<std::uint64_t>(L) << 32) | (basis.particles() - 1);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, FockBasis::sector(L, basis.particles() - 1)).first;
    lower = &it->second;
    buffer.assign(lower->size(), cplx{});
  } else {
    buffer.assign(basis.size(), cplx{});
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(L));
  std::vector<cplx> phase(L);
  for (int j = 0; j < L; ++j) phase[j] = std::polar(scale, -k * j);

  for (std::size_t a = 0; a < basis.size(); ++a) {
    const cplx v = amp[static_cast<Eigen::Index>(a)];
    if (v == cplx{}) continue;
    const std::uint32_t s = basis.state(a);
    std::uint32_t bits = s;
    int below = 0;
    while (bits) {
      const int j = std::countr_zero(bits);
      const std::uint32_t t = s & ~(1u << j);
      const std::size_t idx = fixed ? lower->rank(t) : t;
      buffer[idx] += ((below & 1) ? -1.0 : 1.0) * phase[j] * v;
      bits &= bits - 1;
      ++below;
    }
  }
  double acc = 0.0;
  for (const auto& c : buffer) acc += std::norm(c);
  return acc;
}

}  // namespace

void momentum_density_serial(const FockBasis& basis, const CVec& amp, RVec& out) {
  const int L = basis.sites();
  const auto labels = momentum_labels(L);
  out = RVec::Zero(L);
  std::vector<cplx> buffer;
  for (int m = 0; m < L; ++m)
    out[m] = annihilated_norm(basis, amp, 2.0 * kPi * labels[m] / L, buffer);
}

void momentum_density_parallel(const FockBasis& basis, const CVec& amp, RVec& out) {
  const int L = basis.sites();
  const auto labels = momentum_labels(L);
  out = RVec::Zero(L);
#pragma omp parallel
  {
    std::vector<cplx> buffer;
#pragma omp for schedule(static)
    for (int m = 0; m < L; ++m)
      out[m] = annihilated_norm(basis, amp, 2.0 * kPi * labels[m] / L, buffer);
  }
}

}  // namespace hnsim::kernels
