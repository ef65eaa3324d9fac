#include <doctest.h>

#include <bit>

#include "hnsim/basis.hpp"
#include "hnsim/observables.hpp"
#include "oracles.hpp"

using namespace hnsim;

TEST_SUITE("basis") {
  TEST_CASE("sector sizes and ordering") {
    const auto b = FockBasis::sector(4, 2);
    const std::vector<std::uint32_t> expect = {0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100};
    REQUIRE(b.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) CHECK(b.state(i) == expect[i]);
    CHECK(FockBasis::sector(12, 6).size() == 924);
    CHECK(FockBasis::sector(8, 0).size() == 1);
    CHECK(FockBasis::sector(8, 8).size() == 1);
  }

  TEST_CASE("round trip and brute-force enumeration") {
    for (int L = 2; L <= 12; ++L) {
      for (int N = 0; N <= L; ++N) {
        const auto b = FockBasis::sector(L, N);
        const auto brute = oracle::sector_patterns(L, N);
        REQUIRE(b.size() == brute.size());
        CHECK(b.size() == binomial(L, N));
        for (std::size_t i = 0; i < b.size(); ++i) {
          CHECK(b.state(i) == static_cast<std::uint32_t>(brute[i]));
          CHECK(std::popcount(b.state(i)) == N);
          CHECK(b.index_of(b.state(i)).value() == i);
        }
      }
    }
  }

  TEST_CASE("index_of rejects foreign patterns") {
    const auto b = FockBasis::sector(6, 3);
    CHECK_FALSE(b.index_of(0b1).has_value());
    CHECK_FALSE(b.index_of(0b1000111).has_value());
    const auto f = FockBasis::full(5);
    CHECK(f.size() == 32);
    CHECK(f.index_of(19).value() == 19);
  }

  TEST_CASE("range and capacity errors are distinguished") {
    CHECK_THROWS_AS(FockBasis::sector(25, 3), CapacityError);
    CHECK_THROWS_AS(FockBasis::sector(1, 0), DomainError);
    CHECK_THROWS_AS(FockBasis::sector(6, 7), DomainError);
    CHECK_THROWS_AS(FockBasis::sector(6, -1), DomainError);
    CHECK_THROWS_AS(FockBasis::full(21), CapacityError);
    CHECK_NOTHROW(FockBasis::sector(24, 1));
  }

  TEST_CASE("density wave") {
    const auto b = oracle::sector(4, 2);
    const auto dw = prepare_density_wave(b);
    CHECK(dw.norm() == doctest::Approx(1.0));
    CHECK(dw.amplitudes()[static_cast<Eigen::Index>(b->index_of(0b0101).value())] == cplx(1.0));
    CHECK(dw.amplitudes().cwiseAbs().sum() == doctest::Approx(1.0));
    CHECK_THROWS_AS(prepare_density_wave(oracle::sector(4, 1)), DomainError);
    CHECK_THROWS_AS(prepare_density_wave(oracle::sector(5, 2)), DomainError);

    // Eigenvector of every n_j with eigenvalues 1, 0, 1, 0, ...
    const auto b10 = oracle::sector(10, 5);
    const RVec n = density_real(prepare_density_wave(b10));
    for (int j = 0; j < 10; ++j) CHECK(n[j] == (j % 2 == 0 ? 1.0 : 0.0));
  }

  TEST_CASE("normalize reports the previous norm") {
    ManyBodyVector v(oracle::sector(4, 2));
    CHECK_THROWS_AS(v.normalize(), NumericalError);
    v.amplitudes()[0] = 3.0;
    v.amplitudes()[1] = cplx(0, 4.0);
    CHECK(v.normalize() == doctest::Approx(5.0));
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(ManyBodyVector(oracle::sector(4, 2), CVec::Zero(5)), DomainError);
  }

  TEST_CASE("creation operator matches the operator-algebra oracle") {
    const int L = 5;
    const auto full = std::make_shared<const FockBasis>(FockBasis::full(L));
    const auto psi = oracle::random_state(full, 3);
    CVec phi = CVec::Random(L);
    const ManyBodyVector out = apply_creation(psi, std::span<const cplx>(phi.data(), L), full);
    CVec expect = CVec::Zero(1 << L);
    for (int j = 0; j < L; ++j) expect += phi[j] * (oracle::annihilator(L, j).adjoint() * psi.amplitudes());
    CHECK((out.amplitudes() - expect).norm() < 1e-13);

    // Sector version lands in N+1.
    const auto s2 = oracle::sector(L, 2), s3 = oracle::sector(L, 3);
    const auto v = oracle::random_state(s2, 5);
    const auto w = apply_creation(v, std::span<const cplx>(phi.data(), L), s3);
    CHECK(w.size() == s3->size());
    CHECK_THROWS_AS(apply_creation(v, std::span<const cplx>(phi.data(), L), s2), DomainError);
  }

  TEST_CASE("mixed filling state") {
    const auto a = prepare_mixed_filling(8, 42);
    const auto b = prepare_mixed_filling(8, 42);
    const auto c = prepare_mixed_filling(8, 43);
    CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.amplitudes() == b.amplitudes());
    CHECK((a.amplitudes() - c.amplitudes()).norm() > 1e-6);
    CHECK_FALSE(a.basis().fixed_number());
    CHECK_THROWS_AS(prepare_mixed_filling(15, 1), CapacityError);

    // Each filling sector carries weight 1/(L+1) and is a momentum eigenstate:
    // total n_k of the sector sums to its filling Q.
    const int L = 8;
    std::vector<double> weight(L + 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
      weight[std::popcount(a.basis().state(i))] += std::norm(a.amplitudes()[static_cast<Eigen::Index>(i)]);
    for (double w : weight) CHECK(w == doctest::Approx(1.0 / (L + 1)).epsilon(1e-12));
    const RVec nk = density_momentum(a);
    CHECK(nk.sum() == doctest::Approx(L / 2.0).epsilon(1e-12));
    for (double x : nk) {
      CHECK(x >= -1e-12);
      CHECK(x <= 1.0 + 1e-12);
    }
  }

  TEST_CASE("plane waves and labels") {
    const auto m = momentum_labels(6);
    CHECK(m.front() == -3);
    CHECK(m.back() == 2);
    const CVec p = plane_wave(6, -1);
    CHECK(p.norm() == doctest::Approx(1.0));
    CHECK(std::abs(p.dot(plane_wave(6, 2))) < 1e-14);
  }
}
