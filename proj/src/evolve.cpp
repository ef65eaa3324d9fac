#include "hnsim/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hnsim/dense.hpp"
#include "hnsim/entanglement.hpp"
#include "hnsim/observables.hpp"
#include "hnsim/spectral.hpp"

namespace hnsim {

ArnoldiPropagator::ArnoldiPropagator(const SparseHamiltonian& h, KrylovConfig cfg)
    : h_(h), cfg_(cfg) {
  if (cfg_.M < 1) throw DomainError("Krylov: M must be at least 1");
  if (!(cfg_.dt > 0.0)) throw DomainError("Krylov: dt must be positive");
  cfg_.M = static_cast<int>(std::min<std::int64_t>(cfg_.M, h.dim()));
  v_.resize(h.dim(), cfg_.M);
  hm_.resize(cfg_.M, cfg_.M);
}

StepInfo ArnoldiPropagator::step(ManyBodyVector& psi, double dt) {
  if (static_cast<std::int64_t>(psi.size()) != h_.dim())
    throw DomainError("Krylov: state dimension does not match the Hamiltonian");
  if (!(dt > 0.0)) throw DomainError("Krylov: dt must be positive");
  StepInfo info;
  const double beta = psi.norm();
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw NumericalError("Krylov: input state has norm " + std::to_string(beta));

  const int M = cfg_.M;
  hm_.setZero();
  v_.col(0) = psi.amplitudes() / beta;
  int m = M;
  for (int j = 0; j < M; ++j) {
    h_.multiply(v_.col(j), w_, cfg_.exec);
    // Modified Gram-Schmidt with one reorthogonalization pass.
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= j; ++i) {
        const cplx c = v_.col(i).dot(w_);
        hm_(i, j) += c;
        w_ -= c * v_.col(i);
      }
    }
    if (j + 1 == M) break;
    const double hn = w_.norm();
    if (hn < cfg_.breakdown_tol) {
      m = j + 1;
      info.breakdown = true;
      break;
    }
    hm_(j + 1, j) = hn;
    v_.col(j + 1) = w_ / hn;
  }
  info.krylov_dim = m;

  const CMat e = expm(hm_.topLeftCorner(m, m), cplx(0.0, -dt), 1e8, &info.used_eig);
  const CVec y = e.col(0);
  psi.amplitudes() = beta * (v_.leftCols(m) * y);
  require_finite(psi.amplitudes(), "Krylov step (try a smaller dt)");
  info.growth = y.norm();
  if (cfg_.renorm_each_step) psi.normalize();
  return info;
}

ManyBodyVector arnoldi_step(const SparseHamiltonian& h, const ManyBodyVector& psi,
                            const KrylovConfig& cfg, StepInfo* info) {
  ArnoldiPropagator prop(h, cfg);
  ManyBodyVector out = psi;
  const StepInfo si = prop.step(out, cfg.dt);
  if (info) *info = si;
  return out;
}

ManyBodyVector dense_propagate_oracle(const CMat& h, const ManyBodyVector& psi0, double t,
                                      OracleInfo* info) {
  if (h.rows() != static_cast<Eigen::Index>(psi0.size()))
    throw DomainError("dense oracle: dimension mismatch");
  OracleInfo local;
  ManyBodyVector out = psi0;
  if (t == 0.0) {
    if (info) *info = local;
    return out;
  }
  const bool hermitian = (h - h.adjoint()).cwiseAbs().maxCoeff() == 0.0;
  SpectrumResult spec = full_spectrum(h, hermitian);
  local.biorthogonality_residual = spec.biorthogonality_residual;
  if (spec.flagged.empty() && spec.biorthogonality_residual < 1e-8) {
    const CVec c = spec.left.adjoint() * psi0.amplitudes();
    // Shift by the largest growth rate so nothing overflows; the overall
    // scale drops out in the renormalization.
    const double top = spec.eigenvalues.imag().maxCoeff();
    CVec phase(c.size());
    for (Eigen::Index a = 0; a < c.size(); ++a)
      phase[a] = c[a] * std::exp(cplx(0.0, -t) * spec.eigenvalues[a] - top * t);
    out.amplitudes() = spec.right * phase;
  } else {
    local.used_eigendecomposition = false;
    const double hnorm = h.cwiseAbs().colwise().sum().maxCoeff();
    const int n = std::max(1, static_cast<int>(std::ceil(std::abs(t) * hnorm / 4.0)));
    local.taylor_substeps = n;
    const CMat u = expm_taylor(h, cplx(0.0, -t / n));
    for (int i = 0; i < n; ++i) {
      out.amplitudes() = u * out.amplitudes();
      out.normalize();
    }
  }
  require_finite(out.amplitudes(), "dense oracle");
  out.normalize();
  if (info) *info = local;
  return out;
}

std::vector<double> log_time_grid(double t_min, double t_max, int n) {
  if (!(t_min > 0.0) || !(t_max > t_min) || n < 2)
    throw DomainError("log_time_grid: need 0 < t_min < t_max and n >= 2");
  std::vector<double> t(static_cast<std::size_t>(n));
  const double a = std::log(t_min), b = std::log(t_max);
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
  t.front() = t_min;
  t.back() = t_max;
  return t;
}

TrajectoryRecord evolve_trajectory(const SparseHamiltonian& h, const ManyBodyVector& psi0,
                                   const KrylovConfig& cfg, const RecordSpec& spec) {
  for (std::size_t i = 0; i < spec.times.size(); ++i) {
    if (spec.times[i] < 0.0 || (i > 0 && !(spec.times[i] > spec.times[i - 1])))
      throw DomainError("evolve_trajectory: record times must be non-negative and increasing");
  }
  TrajectoryRecord rec;
  rec.ells = spec.ells;
  const auto nt = static_cast<Eigen::Index>(spec.times.size());
  rec.times = Eigen::Map<const RVec>(spec.times.data(), nt);
  rec.sent = RMat::Zero(nt, static_cast<Eigen::Index>(spec.ells.size()));
  rec.state_norms.resize(nt);

  ArnoldiPropagator prop(h, cfg);
  ManyBodyVector psi = psi0;
  psi.normalize();
  double t = 0.0;
  for (Eigen::Index r = 0; r < nt; ++r) {
    const double target = spec.times[static_cast<std::size_t>(r)];
    while (t < target) {
      // Take a full step unless it would overshoot, and avoid leaving a
      // sliver shorter than a millionth of dt.
      double h_step = std::min(cfg.dt, target - t);
      if (target - t - h_step < 1e-6 * cfg.dt) h_step = target - t;
      const StepInfo si = prop.step(psi, h_step);
      rec.norm_drift += std::abs(si.growth - 1.0);
      ++rec.steps;
      t = (h_step == target - t) ? target : t + h_step;
    }
    if (!cfg.renorm_each_step) psi.normalize();
    rec.state_norms[r] = psi.norm();
    if (spec.nj) rec.nj.push_back(density_real(psi, spec.exec));
    if (spec.nk) rec.nk.push_back(density_momentum(psi, spec.exec));
    if (spec.corr) rec.corr.push_back(correlation_profile(one_particle_dm(psi, spec.exec)));
    for (std::size_t c = 0; c < spec.ells.size(); ++c)
      rec.sent(r, static_cast<Eigen::Index>(c)) = entanglement_entropy(psi, spec.ells[c]);
    if (spec.keep_states) rec.states.push_back(psi);
  }
  return rec;
}

}  // namespace hnsim
