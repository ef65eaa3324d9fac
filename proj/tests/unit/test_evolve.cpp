#include <doctest.h>

#include "hnsim/evolve.hpp"
#include "hnsim/observables.hpp"
#include "oracles.hpp"

using namespace hnsim;

namespace {

ModelParams params(int L, double g, double V, double W) {
  ModelParams p;
  p.L = L;
  p.N = L / 2;
  p.g = g;
  p.V = V;
  p.W = W;
  p.theta = 1.234;
  return p;
}

// Normalized exp(-iHt) psi by brute-force Taylor substeps of the dense matrix.
CVec taylor_reference(const CMat& h, CVec v, double t) {
  const int steps = static_cast<int>(std::ceil(t / 0.01));
  const double dt = t / steps;
  for (int s = 0; s < steps; ++s) {
    CVec term = v, acc = v;
    for (int k = 1; k < 30; ++k) {
      term = (cplx(0, -dt) / double(k)) * (h * term);
      acc += term;
    }
    v = acc / acc.norm();
  }
  return v;
}

}  // namespace

TEST_SUITE("evolve") {
  TEST_CASE("Hermitian step is unitary and matches the spectral propagator") {
    const auto p = params(8, 0.0, 1.0, 1.0);
    const auto b = oracle::sector(8, 4);
    const SparseHamiltonian h(p, b);
    KrylovConfig cfg;
    cfg.renorm_each_step = false;
    auto psi = prepare_density_wave(b);
    ArnoldiPropagator prop(h, cfg);
    for (int i = 0; i < 20; ++i) {
      const auto info = prop.step(psi, 0.05);
      CHECK(std::abs(info.growth - 1.0) < 1e-12);
    }
    CHECK(std::abs(psi.norm() - 1.0) < 1e-11);
    Eigen::SelfAdjointEigenSolver<CMat> es(h.to_dense());
    const CVec c = es.eigenvectors().adjoint() * prepare_density_wave(b).amplitudes();
    const CVec ref = es.eigenvectors() * (c.array() * (cplx(0, -1.0) * es.eigenvalues().array().cast<cplx>()).exp()).matrix();
    CHECK((psi.amplitudes() - ref).norm() < 1e-9);
  }

  TEST_CASE("non-Hermitian trajectory agrees with two independent references") {
    for (double W : {0.5, 4.0}) {
      const auto p = params(8, 0.5, 1.0, W);
      const auto b = oracle::sector(8, 4);
      const SparseHamiltonian h(p, b);
      RecordSpec rs;
      rs.times = {0.0, 0.5, 2.0, 5.0};
      rs.keep_states = true;
      const auto traj = evolve_trajectory(h, prepare_density_wave(b), KrylovConfig{}, rs);
      REQUIRE(traj.states.size() == 4);
      const CMat hd = h.to_dense();
      for (std::size_t i = 0; i < rs.times.size(); ++i) {
        OracleInfo info;
        const auto oracle_state = dense_propagate_oracle(hd, prepare_density_wave(b), rs.times[i], &info);
        const CVec tay = taylor_reference(hd, prepare_density_wave(b).amplitudes(), rs.times[i]);
        CHECK((traj.states[i].amplitudes() - oracle_state.amplitudes()).norm() < 1e-8);
        CHECK((traj.states[i].amplitudes() - tay).norm() < 1e-8);
        CHECK(traj.state_norms[static_cast<Eigen::Index>(i)] == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("record times are hit exactly and observables recorded") {
    const auto p = params(8, 0.5, 1.0, 1.0);
    const auto b = oracle::sector(8, 4);
    const SparseHamiltonian h(p, b);
    RecordSpec rs;
    rs.times = {0.0, 0.013, 0.1, 0.37};
    rs.corr = true;
    rs.ells = {2, 4};
    const auto traj = evolve_trajectory(h, prepare_density_wave(b), KrylovConfig{}, rs);
    for (std::size_t i = 0; i < rs.times.size(); ++i) CHECK(traj.times[static_cast<Eigen::Index>(i)] == rs.times[i]);
    CHECK(traj.nj.size() == 4);
    CHECK(traj.nk.size() == 4);
    CHECK(traj.corr.size() == 4);
    CHECK(traj.sent.rows() == 4);
    CHECK(traj.sent.cols() == 2);
    CHECK(traj.sent(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(traj.nj[0][0] == 1.0);
    CHECK(traj.nj[3].sum() == doctest::Approx(4.0));
    CHECK(traj.steps >= 8);
    RecordSpec bad = rs;
    bad.times = {0.5, 0.2};
    CHECK_THROWS_AS(evolve_trajectory(h, prepare_density_wave(b), KrylovConfig{}, bad), DomainError);
  }

  TEST_CASE("serial and parallel trajectories are identical") {
    const auto p = params(10, 0.5, 1.0, 2.0);
    const auto b = oracle::sector(10, 5);
    const SparseHamiltonian h(p, b);
    RecordSpec rs;
    rs.times = {0.0, 1.0, 3.0};
    rs.ells = {5};
    KrylovConfig a, c;
    c.exec = Exec::parallel;
    RecordSpec rp = rs;
    rp.exec = Exec::parallel;
    const auto t1 = evolve_trajectory(h, prepare_density_wave(b), a, rs);
    const auto t2 = evolve_trajectory(h, prepare_density_wave(b), c, rp);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(t1.nj[i] == t2.nj[i]);
      CHECK(t1.nk[i] == t2.nk[i]);
    }
    CHECK(t1.sent == t2.sent);
  }

  TEST_CASE("happy breakdown in a tiny space") {
    ModelParams p = params(2, 0.3, 0.0, 0.0);
    p.N = 1;
    const auto b = oracle::sector(2, 1);
    const SparseHamiltonian h(p, b);
    KrylovConfig cfg;
    cfg.M = 15;
    StepInfo info;
    const auto out = arnoldi_step(h, prepare_fock_state(b, 0b01), cfg, &info);
    CHECK(info.krylov_dim <= 2);
    const auto ref = dense_propagate_oracle(h.to_dense(), prepare_fock_state(b, 0b01), cfg.dt);
    CHECK((out.amplitudes() - ref.amplitudes()).norm() < 1e-12);
  }

  TEST_CASE("step size convergence") {
    const auto p = params(8, 0.5, 2.0, 1.0);
    const auto b = oracle::sector(8, 4);
    const SparseHamiltonian h(p, b);
    const auto ref = dense_propagate_oracle(h.to_dense(), prepare_density_wave(b), 3.0);
    for (double dt : {0.2, 0.05}) {
      KrylovConfig cfg;
      cfg.dt = dt;
      cfg.M = 10;
      RecordSpec rs;
      rs.times = {3.0};
      rs.keep_states = true;
      rs.nj = rs.nk = false;
      const auto t = evolve_trajectory(h, prepare_density_wave(b), cfg, rs);
      CHECK((t.states[0].amplitudes() - ref.amplitudes()).norm() < 1e-7);
    }
  }

  TEST_CASE("time grid") {
    const auto g = log_time_grid(0.1, 1000.0, 5);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == 0.1);
    CHECK(g.back() == 1000.0);
    CHECK(g[2] == doctest::Approx(10.0));
    CHECK_THROWS_AS(log_time_grid(0.0, 1.0, 3), DomainError);
  }
}
