#include "hnsim/entanglement.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace hnsim {

namespace {

void check_cut(int L, int ell) {
  if (ell < 1 || ell > L - 1)
    throw DomainError("entanglement: ell=" + std::to_string(ell) + " outside [1, " +
                      std::to_string(L - 1) + "]");
}

RVec singular_values(const CMat& m) {
  if (m.rows() == 0 || m.cols() == 0) return {};
  if (std::min(m.rows(), m.cols()) <= 16) {
    Eigen::JacobiSVD<CMat> svd(m);
    return svd.singularValues();
  }
  Eigen::BDCSVD<CMat> svd(m);
  return svd.singularValues();
}

// Amplitudes as a 2^ell x 2^(L-ell) matrix indexed by the raw patterns of A
// and B. Jordan-Wigner ordering from site 0 makes A (the leading sites) a
// plain tensor factor, so no signs enter.
CMat reshape_full(const FockBasis& basis, const CVec& amp, int ell) {
  const int L = basis.sites();
  const std::uint32_t mask = (1u << ell) - 1u;
  CMat m = CMat::Zero(Eigen::Index{1} << ell, Eigen::Index{1} << (L - ell));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto s = basis.state(i);
    m(s & mask, s >> ell) = amp[static_cast<Eigen::Index>(i)];
  }
  return m;
}

double entropy_of_probabilities(const RVec& p) {
  double s = 0.0;
  for (double x : p)
    if (x > 0.0) s -= x * std::log(x);
  return s;
}

}  // namespace

RVec schmidt_spectrum(const ManyBodyVector& psi, int ell) {
  const FockBasis& basis = psi.basis();
  const int L = basis.sites();
  check_cut(L, ell);
  const double nrm2 = psi.amplitudes().squaredNorm();
  if (!(nrm2 > 0.0) || !std::isfinite(nrm2))
    throw NumericalError("entanglement: state norm is zero or non-finite");

  std::vector<double> probs;
  const auto push = [&](const RVec& sv) {
    for (double s : sv) probs.push_back(s * s / nrm2);
  };

  if (!basis.fixed_number()) {
    push(singular_values(reshape_full(basis, psi.amplitudes(), ell)));
  } else {
    const int N = basis.particles();
    const int lo = std::max(0, N - (L - ell));
    const int hi = std::min(ell, N);
    std::vector<CMat> blocks;
    for (int na = lo; na <= hi; ++na)
      blocks.push_back(CMat::Zero(static_cast<Eigen::Index>(binomial(ell, na)),
                                  static_cast<Eigen::Index>(binomial(L - ell, N - na))));
    const std::uint32_t mask = (1u << ell) - 1u;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const auto s = basis.state(i);
      const std::uint32_t a = s & mask;
      const std::uint32_t b = s >> ell;
      blocks[static_cast<std::size_t>(std::popcount(a) - lo)](
          static_cast<Eigen::Index>(colex_rank(a)), static_cast<Eigen::Index>(colex_rank(b))) =
          psi.amplitudes()[static_cast<Eigen::Index>(i)];
    }
    for (const auto& blk : blocks) push(singular_values(blk));
  }
  std::sort(probs.begin(), probs.end(), std::greater<>());
  return Eigen::Map<RVec>(probs.data(), static_cast<Eigen::Index>(probs.size()));
}

double entanglement_entropy(const ManyBodyVector& psi, int ell) {
  return entropy_of_probabilities(schmidt_spectrum(psi, ell));
}

CMat reduced_density_matrix(const ManyBodyVector& psi, int ell) {
  const FockBasis& basis = psi.basis();
  check_cut(basis.sites(), ell);
  if (ell > 14) throw CapacityError("reduced_density_matrix: ell above 14");
  const CMat m = reshape_full(basis, psi.amplitudes(), ell);
  const double nrm2 = psi.amplitudes().squaredNorm();
  if (!(nrm2 > 0.0)) throw NumericalError("reduced_density_matrix: zero state");
  return (m * m.adjoint()) / nrm2;
}

double entropy_from_rdm(const CMat& rho) {
  Eigen::SelfAdjointEigenSolver<CMat> es(rho, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("entropy_from_rdm: eigensolver failed");
  double s = 0.0;
  for (double x : es.eigenvalues())
    if (x > 1e-15) s -= x * std::log(x);
  return s;
}

EntanglementCurve summarize_entanglement(const RVec& times, const RVec& values, int ell) {
  if (times.size() == 0) throw DomainError("entanglement scan: empty trajectory");
  if (times.size() != values.size()) throw DomainError("entanglement scan: length mismatch");
  EntanglementCurve c;
  c.ell = ell;
  c.times = times;
  c.values = values;
  Eigen::Index arg = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i)
    if (values[i] > values[arg]) arg = i;
  c.s_max = values[arg];
  c.t0 = times[arg];

  const double start = times[times.size() - 1] / 10.0;
  std::vector<double> window;
  for (Eigen::Index i = 0; i < times.size(); ++i)
    if (times[i] >= start) window.push_back(values[i]);
  double mean = 0.0;
  for (double v : window) mean += v;
  mean /= static_cast<double>(window.size());
  double var = 0.0;
  for (double v : window) var += (v - mean) * (v - mean);
  c.s_inf = mean;
  c.s_inf_points = window.size();
  c.s_inf_std = window.size() > 1 ? std::sqrt(var / static_cast<double>(window.size() - 1)) : 0.0;
  return c;
}

EntanglementCurve entanglement_scan(const TrajectoryRecord& traj, int ell) {
  if (traj.times.size() == 0) throw DomainError("entanglement scan: empty trajectory");
  const auto it = std::find(traj.ells.begin(), traj.ells.end(), ell);
  if (it != traj.ells.end())
    return summarize_entanglement(traj.times, traj.sent.col(it - traj.ells.begin()), ell);
  if (traj.states.size() != static_cast<std::size_t>(traj.times.size()))
    throw DomainError("entanglement scan: cut not recorded and states not kept");
  RVec s(traj.times.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    s[i] = entanglement_entropy(traj.states[static_cast<std::size_t>(i)], ell);
  return summarize_entanglement(traj.times, s, ell);
}

EigenstateEntropy eigenstate_entropy(const SpectrumResult& spec, const BasisPtr& basis,
                                     Eigen::Index alpha, int ell, EntropyVariant variant) {
  if (alpha < 0 || alpha >= spec.eigenvalues.size())
    throw DomainError("eigenstate_entropy: eigenstate index out of range");
  if (static_cast<Eigen::Index>(basis->size()) != spec.right.rows())
    throw DomainError("eigenstate_entropy: basis does not match spectrum");
  EigenstateEntropy out;
  if (variant == EntropyVariant::RR || variant == EntropyVariant::LL) {
    const CVec& v = variant == EntropyVariant::RR ? spec.right.col(alpha) : spec.left.col(alpha);
    out.value = entanglement_entropy(ManyBodyVector(basis, v), ell);
    return out;
  }

  check_cut(basis->sites(), ell);
  const CMat r = reshape_full(*basis, spec.right.col(alpha), ell);
  const CMat l = reshape_full(*basis, spec.left.col(alpha), ell);
  const CMat rho = l * r.adjoint();
  const cplx tr = rho.trace();
  if (std::abs(tr) < 1e-300) throw NumericalError("eigenstate_entropy: RL trace vanishes");
  Eigen::ComplexEigenSolver<CMat> es(rho / tr, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigenstate_entropy: eigensolver failed");
  cplx s{};
  for (const cplx& lam : es.eigenvalues()) {
    if (std::abs(lam) < 1e-12) {
      ++out.dropped;
      continue;
    }
    if (lam.real() < 0.0 && std::abs(lam.imag()) <= 1e-12 * std::abs(lam)) out.flagged = true;
    s -= lam * std::log(lam);
  }
  if (out.dropped > 0) out.flagged = true;
  out.value = s;
  return out;
}

}  // namespace hnsim
