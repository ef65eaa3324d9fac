#include "hnsim/freefermion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "hnsim/basis.hpp"
#include "hnsim/dense.hpp"
#include "hnsim/model.hpp"

namespace hnsim {

OrbitalSet density_wave_orbitals(int sites) {
  if (sites < 2 || sites % 2 != 0) throw DomainError("density_wave_orbitals: L must be even");
  OrbitalSet o;
  o.phi = CMat::Zero(sites, sites / 2);
  for (int a = 0; a < sites / 2; ++a) o.phi(2 * a, a) = 1.0;
  return o;
}

namespace {

// Orthonormal basis of the span of `phi`; throws if the span has collapsed.
CMat orthonormalize(const CMat& phi) {
  Eigen::HouseholderQR<CMat> qr(phi);
  const CMat r = qr.matrixQR().topRows(phi.cols()).triangularView<Eigen::Upper>();
  double lo = std::abs(r(0, 0)), hi = lo;
  for (Eigen::Index i = 1; i < r.rows(); ++i) {
    lo = std::min(lo, std::abs(r(i, i)));
    hi = std::max(hi, std::abs(r(i, i)));
  }
  if (!(lo > 1e-12 * hi))
    throw NumericalError("evolve_orbitals: orbital set lost rank (diag(R) ratio " +
                         std::to_string(lo / hi) + "); use a shorter substep");
  return qr.householderQ() * CMat::Identity(phi.rows(), phi.cols());
}

}  // namespace

OrbitalSet evolve_orbitals(const CMat& h1, const OrbitalSet& phi0, double t, double max_substep) {
  if (h1.rows() != phi0.phi.rows()) throw DomainError("evolve_orbitals: dimension mismatch");
  if (t < 0.0 || !(max_substep > 0.0)) throw DomainError("evolve_orbitals: invalid time step");
  if (t == 0.0) return phi0;
  OrbitalSet out{orthonormalize(phi0.phi)};
  const int n = std::max(1, static_cast<int>(std::ceil(t / max_substep)));
  const CMat u = expm(h1, cplx(0.0, -t / n));
  for (int i = 0; i < n; ++i) out.phi = orthonormalize(u * out.phi);
  require_finite(out.phi, "evolve_orbitals");
  return out;
}

CMat correlation_matrix(const OrbitalSet& phi) {
  const CMat gram = phi.phi.adjoint() * phi.phi;
  Eigen::FullPivLU<CMat> lu(gram);
  if (!lu.isInvertible()) throw NumericalError("correlation_matrix: singular Gram matrix");
  const CMat p = phi.phi * lu.solve(phi.phi.adjoint());
  return p.transpose();
}

CMat correlation_matrix(const OrbitalSet& phi, int ell) {
  if (ell < 1 || ell > phi.sites()) throw DomainError("correlation_matrix: ell out of range");
  return correlation_matrix(phi).topLeftCorner(ell, ell);
}

double ff_entropy(const CMat& c) {
  const CMat herm = 0.5 * (c + c.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(herm, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("ff_entropy: eigensolver failed");
  double s = 0.0;
  for (double l : es.eigenvalues()) {
    if (l < -1e-8 || l > 1.0 + 1e-8)
      throw NumericalError("ff_entropy: correlation eigenvalue " + std::to_string(l) +
                           " outside [0, 1]");
    l = std::clamp(l, 0.0, 1.0);
    if (l > 0.0) s -= l * std::log(l);
    if (l < 1.0) s -= (1.0 - l) * std::log1p(-l);
  }
  return s;
}

CMat asymptotic_corr_matrix(int sites, double g, double t) {
  if (sites < 4 || sites % 4 != 0)
    throw DomainError("asymptotic_corr_matrix: needs even L with L/2 even, got L=" +
                      std::to_string(sites));
  const int L = sites;
  const double phase = 4.0 * std::cosh(g) * t;
  const double sign = (L / 2) % 2 == 0 ? 1.0 : -1.0;
  CMat c(L, L);
  for (int n = 0; n < L; ++n) {
    for (int m = 0; m < L; ++m) {
      cplx sea{};
      for (int j = 1; j <= L / 2 - 1; ++j) sea += std::polar(1.0, -2.0 * kPi * j * (n - m) / L);
      const cplx pair = (std::polar(1.0, -kPi * (n - m)) + 1.0) / (2.0 * L);
      const cplx osc = sign * (std::polar(1.0, kPi * n - phase) + std::polar(1.0, phase - kPi * m)) /
                       (2.0 * L);
      c(n, m) = sea / static_cast<double>(L) + pair + osc;
    }
  }
  return c;
}

std::pair<double, double> lambda_pm(double phase) {
  const double r = 0.5 * std::sqrt(std::max(0.0, (1.0 + std::sin(phase)) / 2.0));
  return {0.5 - r, 0.5 + r};
}

SingleParticlePropagator::SingleParticlePropagator(const CMat& h1) : h_(h1) {
  if (auto d = decompose(h1); d && d->condition < 1e8) {
    eig_ = true;
    values_ = std::move(d->values);
    right_ = std::move(d->right);
    right_inverse_ = std::move(d->right_inverse);
  }
}

CVec SingleParticlePropagator::propagate(const CVec& psi0, double t) const {
  if (psi0.size() != h_.rows()) throw DomainError("propagate: dimension mismatch");
  CVec out;
  if (eig_) {
    const CVec c = right_inverse_ * psi0;
    const double top = values_.imag().maxCoeff();
    CVec ph(c.size());
    for (Eigen::Index a = 0; a < c.size(); ++a)
      ph[a] = c[a] * std::exp(cplx(0.0, -t) * values_[a] - top * t);
    out = right_ * ph;
  } else {
    const double hnorm = h_.cwiseAbs().colwise().sum().maxCoeff();
    const int n = std::max(1, static_cast<int>(std::ceil(std::abs(t) * hnorm / 4.0)));
    const CMat u = expm_taylor(h_, cplx(0.0, -t / n));
    out = psi0;
    for (int i = 0; i < n; ++i) {
      out = u * out;
      out.normalize();
    }
  }
  require_finite(out, "single-particle propagation");
  const double nrm = out.norm();
  if (!(nrm > 0.0)) throw NumericalError("single-particle propagation: state vanished");
  return out / nrm;
}

WavepacketObservables wavepacket_observables(const CVec& psi) {
  const auto L = static_cast<int>(psi.size());
  if (L < 1) throw DomainError("wavepacket_observables: empty state");
  const RVec d = psi.cwiseAbs2() / psi.squaredNorm();
  Eigen::Index jm = 0;
  d.maxCoeff(&jm);
  double m1 = 0.0, m2 = 0.0;
  for (int j = 0; j < L; ++j) {
    // Signed offset from the maximum in [-L/2, L/2).
    int rel = ((j - static_cast<int>(jm)) % L + L + L / 2) % L - L / 2;
    m1 += rel * d[j];
    m2 += static_cast<double>(rel) * rel * d[j];
  }
  WavepacketObservables o;
  o.mean_x = static_cast<double>(jm) + m1;
  if (o.mean_x >= L - 0.5) o.mean_x -= L;
  if (o.mean_x < -0.5) o.mean_x += L;
  o.variance = m2 - m1 * m1;

  const auto labels = momentum_labels(L);
  o.momentum_density.resize(L);
  for (int m = 0; m < L; ++m) {
    const double k = 2.0 * kPi * labels[static_cast<std::size_t>(m)] / L;
    cplx acc{};
    for (int j = 0; j < L; ++j) acc += std::polar(1.0, -k * j) * psi[j];
    o.momentum_density[m] = std::norm(acc) / L / psi.squaredNorm();
  }
  return o;
}

double PositionTracker::update(double wrapped) {
  if (!started_) {
    started_ = true;
    last_ = wrapped;
    return last_;
  }
  double x = wrapped + sites_ * std::round((last_ - wrapped) / sites_);
  last_ = x;
  return x;
}

CVec trial_wavepacket(int j0, double g, double t, int sites) {
  if (!(t > 0.0) || !(g > 0.0)) throw DomainError("trial_wavepacket: needs t > 0 and g > 0");
  const double width = 4.0 * std::sinh(g) * t;
  const double shift = 2.0 * std::cosh(g) * t;
  CVec psi(sites);
  for (int j = 0; j < sites; ++j) {
    double d = std::fmod(j - j0 + shift, static_cast<double>(sites));
    if (d < 0) d += sites;
    if (d >= sites / 2.0) d -= sites;
    psi[j] = std::polar(std::exp(-d * d / width), -kPi * (j - j0) / 2.0);
  }
  return psi / psi.norm();
}

cplx perturbative_dispersion(double k, double g, double W, double alpha, bool exact) {
  if (exact) {
    const cplx e0 = dispersion(k, g);
    const double beta = 2.0 * kPi * alpha;
    const cplx e2 = W * W / 4.0 *
                    (1.0 / (e0 - dispersion(k + beta, g)) + 1.0 / (e0 - dispersion(k - beta, g)));
    return e0 + e2;
  }
  const double ch = std::cosh(g), sh = std::sinh(g);
  return -cplx(2.0 * ch * (1.0 + W * W / (16.0 * ch * ch)) * std::cos(k),
               2.0 * sh * (1.0 - W * W / (16.0 * sh * sh)) * std::sin(k));
}

double perturbative_sliding_speed(double g, double W) {
  const double ch = std::cosh(g);
  return 2.0 * ch * (1.0 + W * W / (16.0 * ch * ch));
}

}  // namespace hnsim
