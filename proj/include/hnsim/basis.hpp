#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "hnsim/common.hpp"

namespace hnsim {

/// Largest chain length representable; patterns are 32-bit words and the
/// index tables stay comfortably in memory up to this size.
inline constexpr int kMaxSites = 24;

/// Occupation patterns of L spinless-fermion sites. Site j is bit j.
///
/// A sector basis holds the C(L,N) patterns with exactly N set bits in
/// ascending integer order; its index map is the colexicographic rank, so
/// no lookup table is stored. A full basis holds all 2^L patterns (used for
/// direct sums over particle-number sectors) and index == pattern.
class FockBasis {
 public:
  /// Fixed-particle-number sector. Throws CapacityError for L > kMaxSites,
  /// DomainError for L < 2 or N outside [0, L].
  static FockBasis sector(int sites, int particles);

  /// All 2^L patterns, ascending. L is limited to 20.
  static FockBasis full(int sites);

  int sites() const noexcept { return sites_; }
  /// Particle count, or -1 for a full basis.
  int particles() const noexcept { return particles_; }
  bool fixed_number() const noexcept { return particles_ >= 0; }

  std::size_t size() const noexcept { return states_.size(); }
  std::uint32_t state(std::size_t i) const { return states_[i]; }
  std::span<const std::uint32_t> states() const noexcept { return states_; }

  /// Ordinal of a pattern, or nullopt when it is not in this basis.
  std::optional<std::size_t> index_of(std::uint32_t pattern) const;

  /// Ordinal of a pattern known to be in the basis (no checks).
  std::size_t rank(std::uint32_t pattern) const noexcept;

  bool operator==(const FockBasis& other) const noexcept {
    return sites_ == other.sites_ && particles_ == other.particles_;
  }

 private:
  FockBasis(int sites, int particles) : sites_(sites), particles_(particles) {}

  int sites_;
  int particles_;
  std::vector<std::uint32_t> states_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

std::uint64_t binomial(int n, int k);

/// Position of `pattern` among all patterns with the same popcount in
/// ascending order (colexicographic rank of its set-bit positions).
std::size_t colex_rank(std::uint32_t pattern) noexcept;

/// Complex amplitudes over a shared, immutable basis.
class ManyBodyVector {
 public:
  ManyBodyVector() = default;
  explicit ManyBodyVector(BasisPtr basis);
  ManyBodyVector(BasisPtr basis, CVec amplitudes);

  const FockBasis& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const noexcept { return basis_; }
  const CVec& amplitudes() const noexcept { return amp_; }
  CVec& amplitudes() noexcept { return amp_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(amp_.size()); }

  double norm() const { return amp_.norm(); }
  /// Rescales to unit norm and returns the norm before rescaling.
  /// Throws NumericalError on a zero or non-finite norm.
  double normalize();

 private:
  BasisPtr basis_;
  CVec amp_;
};

/// |1010...10>: sites 0, 2, 4, ... occupied. Requires even L and N = L/2.
ManyBodyVector prepare_density_wave(BasisPtr basis);

/// Single occupation pattern as a unit vector.
ManyBodyVector prepare_fock_state(BasisPtr basis, std::uint32_t pattern);

/// Applies c^dagger(phi) = sum_j phi_j c_j^dagger to `in`, producing a
/// vector over `target` (the N+1 sector, or the same full basis). Signs
/// follow the Jordan-Wigner string counted from site 0.
ManyBodyVector apply_creation(const ManyBodyVector& in, std::span<const cplx> orbital,
                              BasisPtr target);

/// Plane-wave orbital e^{ikj}/sqrt(L) on the momentum grid k_m = 2 pi m / L.
CVec plane_wave(int sites, int m);

/// Momentum labels m = -floor(L/2) ... L-1-floor(L/2); for even L this is
/// -L/2 ... L/2-1.
std::vector<int> momentum_labels(int sites);

/// Equal-weight superposition over fillings Q = 0..L of one momentum-space
/// Fock state per filling, each drawn uniformly among the C(L,Q) momentum
/// occupations with a generator seeded by `seed`. Lives on the full basis.
ManyBodyVector prepare_mixed_filling(int sites, std::uint64_t seed);

}  // namespace hnsim
