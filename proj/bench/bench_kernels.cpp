// Serial reference vs OpenMP kernels on one Hamiltonian and state.
//   bench_kernels [L=16] [repeats=20]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "hnsim/evolve.hpp"
#include "hnsim/kernels.hpp"
#include "hnsim/model.hpp"
#include "hnsim/observables.hpp"

using namespace hnsim;

namespace {

double time_ms(int repeats, const std::function<void()>& f) {
  f();  // warm-up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() / repeats;
}

void row(const char* name, double serial, double parallel, double diff) {
  std::printf("%-22s %12.3f %12.3f %9.2fx %12.3g\n", name, serial, parallel, serial / parallel, diff);
}

}  // namespace

int main(int argc, char** argv) {
  const int L = argc > 1 ? std::atoi(argv[1]) : 16;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 20;

  ModelParams p;
  p.L = L;
  p.N = L / 2;
  p.g = 0.5;
  p.V = 2.0;
  p.W = 3.0;
  auto basis = std::make_shared<const FockBasis>(FockBasis::sector(L, L / 2));
  const SparseHamiltonian h(p, basis);
  ManyBodyVector psi = prepare_density_wave(basis);
  KrylovConfig kc;
  ArnoldiPropagator prop(h, kc);
  prop.step(psi, 0.5);  // spread the amplitudes

  std::printf("L=%d  dim=%zu  nnz=%zu  threads=%d\n", L, basis->size(), h.matrix().nonzeros(),
              kernels::max_threads());
  std::printf("%-22s %12s %12s %10s %12s\n", "kernel", "serial ms", "parallel ms", "speedup", "max |diff|");

  CVec ys, yp;
  const double mv_s = time_ms(repeats, [&] { h.multiply(psi.amplitudes(), ys, Exec::serial); });
  const double mv_p = time_ms(repeats, [&] { h.multiply(psi.amplitudes(), yp, Exec::parallel); });
  row("csr multiply", mv_s, mv_p, (ys - yp).cwiseAbs().maxCoeff());

  RVec ds, dp;
  const double d_s = time_ms(repeats, [&] { ds = density_real(psi, Exec::serial); });
  const double d_p = time_ms(repeats, [&] { dp = density_real(psi, Exec::parallel); });
  row("density n_j", d_s, d_p, (ds - dp).cwiseAbs().maxCoeff());

  const int slow = std::max(1, repeats / 10);
  OnePDM os, op;
  const double o_s = time_ms(slow, [&] { os = one_particle_dm(psi, Exec::serial); });
  const double o_p = time_ms(slow, [&] { op = one_particle_dm(psi, Exec::parallel); });
  row("one-particle dm", o_s, o_p, (os.matrix - op.matrix).cwiseAbs().maxCoeff());

  RVec ks, kp;
  const double k_s = time_ms(slow, [&] { ks = density_momentum(psi, Exec::serial); });
  const double k_p = time_ms(slow, [&] { kp = density_momentum(psi, Exec::parallel); });
  row("momentum n_k", k_s, k_p, (ks - kp).cwiseAbs().maxCoeff());

  KrylovConfig ks_cfg = kc, kp_cfg = kc;
  ks_cfg.exec = Exec::serial;
  kp_cfg.exec = Exec::parallel;
  ArnoldiPropagator ps(h, ks_cfg), pp(h, kp_cfg);
  ManyBodyVector a = psi, b = psi;
  const double s_s = time_ms(slow, [&] { ps.step(a, 0.05); });
  const double s_p = time_ms(slow, [&] { pp.step(b, 0.05); });
  row("krylov step", s_s, s_p, (a.amplitudes() - b.amplitudes()).cwiseAbs().maxCoeff());
  return 0;
}
