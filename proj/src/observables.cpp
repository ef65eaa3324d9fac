#include "hnsim/observables.hpp"

#include "hnsim/kernels.hpp"

namespace hnsim {

namespace {
double norm2(const ManyBodyVector& psi) {
  const double n = psi.amplitudes().squaredNorm();
  if (!(n > 0.0)) throw NumericalError("observable of a zero vector");
  return n;
}
}  // namespace

RVec density_real(const ManyBodyVector& psi, Exec exec) {
  RVec out;
  if (exec == Exec::parallel)
    kernels::density_parallel(psi.basis(), psi.amplitudes(), out);
  else
    kernels::density_serial(psi.basis(), psi.amplitudes(), out);
  return out / norm2(psi);
}

OnePDM one_particle_dm(const ManyBodyVector& psi, Exec exec) {
  OnePDM pdm;
  if (exec == Exec::parallel)
    kernels::opdm_parallel(psi.basis(), psi.amplitudes(), pdm.matrix);
  else
    kernels::opdm_serial(psi.basis(), psi.amplitudes(), pdm.matrix);
  pdm.matrix /= norm2(psi);
  return pdm;
}

RVec density_momentum(const ManyBodyVector& psi, Exec exec) {
  RVec out;
  if (exec == Exec::parallel)
    kernels::momentum_density_parallel(psi.basis(), psi.amplitudes(), out);
  else
    kernels::momentum_density_serial(psi.basis(), psi.amplitudes(), out);
  return out / norm2(psi);
}

RVec momentum_grid(int sites) {
  const auto labels = momentum_labels(sites);
  RVec k(sites);
  for (int m = 0; m < sites; ++m) k[m] = 2.0 * kPi * labels[m] / sites;
  return k;
}

RVec momentum_from_opdm(const OnePDM& pdm) {
  const int L = pdm.sites();
  const RVec k = momentum_grid(L);
  RVec out(L);
  for (int m = 0; m < L; ++m) {
    cplx acc{};
    for (int i = 0; i < L; ++i)
      for (int j = 0; j < L; ++j) acc += std::polar(1.0, k[m] * (i - j)) * pdm.matrix(i, j);
    out[m] = acc.real() / L;
  }
  return out;
}

RVec correlation_profile(const OnePDM& pdm) {
  const int L = pdm.sites();
  RVec c = RVec::Zero(L - 1);
  for (int l = 1; l < L; ++l) {
    double acc = 0.0;
    for (int j = 0; j < L; ++j) acc += std::abs(pdm.matrix(j, (j + l) % L));
    c[l - 1] = acc / L;
  }
  return c;
}

}  // namespace hnsim
