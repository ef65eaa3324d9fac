#include "hnsim/spectral.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/Eigenvalues>

#ifdef HNSIM_HAVE_LAPACKE
#include <lapacke.h>
#endif

namespace hnsim {

namespace {

struct Eig {
  CVec values;
  CMat vectors;
};

Eig general_eig(const CMat& a) {
  const bool real = a.imag().isZero(0.0);
  if (real) {
    Eigen::EigenSolver<RMat> s(a.real(), true);
    if (s.info() != Eigen::Success) throw NumericalError("full_spectrum: real eigensolver failed");
    return {s.eigenvalues(), s.eigenvectors()};
  }
  Eigen::ComplexEigenSolver<CMat> s(a, true);
  if (s.info() != Eigen::Success) throw NumericalError("full_spectrum: complex eigensolver failed");
  return {s.eigenvalues(), s.eigenvectors()};
}

}  // namespace

SpectrumResult full_spectrum(const SparseHamiltonian& h, const SpectrumOptions& opts) {
  return full_spectrum(h.to_dense(), h.hermitian(), opts);
}

SpectrumResult full_spectrum(const CMat& h, bool hermitian, const SpectrumOptions& opts) {
  const auto n = h.rows();
  SpectrumResult out;
  if (hermitian) {
    Eigen::SelfAdjointEigenSolver<CMat> s(h);
    if (s.info() != Eigen::Success) throw NumericalError("full_spectrum: Hermitian solver failed");
    out.eigenvalues = s.eigenvalues().cast<cplx>();
    out.right = s.eigenvectors();
    out.left = out.right;
  } else {
    Eig r = general_eig(h);
    Eig l = general_eig(h.adjoint());
    for (Eigen::Index a = 0; a < n; ++a) r.vectors.col(a).normalize();

    const double radius = std::max(1.0, r.values.cwiseAbs().maxCoeff());
    const double tol = opts.pairing_tolerance * radius;

    // Greedy nearest pairing of E_a with conj(mu_b).
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    out.left.resize(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
      Eigen::Index best = -1;
      double dist = 0.0;
      for (Eigen::Index b = 0; b < n; ++b) {
        if (used[static_cast<std::size_t>(b)]) continue;
        const double d = std::abs(std::conj(l.values[b]) - r.values[a]);
        if (best < 0 || d < dist) {
          best = b;
          dist = d;
        }
      }
      used[static_cast<std::size_t>(best)] = true;
      out.left.col(a) = l.vectors.col(best);
      if (dist > tol) out.flagged.push_back(a);
    }
    out.eigenvalues = r.values;
    out.right = std::move(r.vectors);

    // Degenerate clusters (transitive closure within tol): biorthonormalize
    // the block so that L_c^dagger R_c = I.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto x, auto y) {
      const auto ex = out.eigenvalues[x], ey = out.eigenvalues[y];
      return ex.real() != ey.real() ? ex.real() < ey.real() : ex.imag() < ey.imag();
    });
    std::vector<int> cluster(static_cast<std::size_t>(n), -1);
    int nclusters = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto a = order[static_cast<std::size_t>(i)];
      if (cluster[static_cast<std::size_t>(a)] >= 0) continue;
      cluster[static_cast<std::size_t>(a)] = nclusters;
      std::vector<Eigen::Index> stack{a};
      while (!stack.empty()) {
        const auto c = stack.back();
        stack.pop_back();
        // Only neighbours within tol in real part can be within tol overall.
        for (Eigen::Index j = i + 1; j < n; ++j) {
          const auto b = order[static_cast<std::size_t>(j)];
          if (out.eigenvalues[b].real() - out.eigenvalues[c].real() > tol) {
            if (out.eigenvalues[b].real() - out.eigenvalues[a].real() > tol * n) break;
            continue;
          }
          if (cluster[static_cast<std::size_t>(b)] < 0 &&
              std::abs(out.eigenvalues[b] - out.eigenvalues[c]) <= tol) {
            cluster[static_cast<std::size_t>(b)] = nclusters;
            stack.push_back(b);
          }
        }
      }
      ++nclusters;
    }
    std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(nclusters));
    for (Eigen::Index a = 0; a < n; ++a) members[static_cast<std::size_t>(cluster[a])].push_back(a);
    for (const auto& m : members) {
      const auto c = static_cast<Eigen::Index>(m.size());
      CMat rc(n, c), lc(n, c);
      for (Eigen::Index i = 0; i < c; ++i) {
        rc.col(i) = out.right.col(m[i]);
        lc.col(i) = out.left.col(m[i]);
      }
      const CMat overlap = lc.adjoint() * rc;
      Eigen::FullPivLU<CMat> lu(overlap);
      if (!lu.isInvertible()) {
        for (auto a : m) out.flagged.push_back(a);
        continue;
      }
      lc = lc * lu.inverse().adjoint();
      for (Eigen::Index i = 0; i < c; ++i) out.left.col(m[i]) = lc.col(i);
    }
    std::sort(out.flagged.begin(), out.flagged.end());
    out.flagged.erase(std::unique(out.flagged.begin(), out.flagged.end()), out.flagged.end());
  }
  if (opts.compute_residual) {
    const CMat overlap = out.left.adjoint() * out.right;
    out.biorthogonality_residual = (overlap - CMat::Identity(n, n)).cwiseAbs().maxCoeff();
  }
  return out;
}

CVec spectrum_values(const SparseHamiltonian& h) {
  const CMat dense = h.to_dense();
  if (h.hermitian()) {
    Eigen::SelfAdjointEigenSolver<CMat> s(dense, Eigen::EigenvaluesOnly);
    if (s.info() != Eigen::Success) throw NumericalError("spectrum_values: Hermitian solver failed");
    return s.eigenvalues().cast<cplx>();
  }
  if (dense.imag().isZero(0.0)) {
#ifdef HNSIM_HAVE_LAPACKE
    RMat a = dense.real();
    const auto n = static_cast<lapack_int>(a.rows());
    RVec wr(n), wi(n);
    const lapack_int info =
        LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, wr.data(), wi.data(), nullptr, 1, nullptr, 1);
    if (info != 0) throw NumericalError("spectrum_values: dgeev failed, info=" + std::to_string(info));
    CVec ev(n);
    for (lapack_int i = 0; i < n; ++i) ev[i] = cplx(wr[i], wi[i]);
    return ev;
#endif
    Eigen::EigenSolver<RMat> s(dense.real(), false);
    if (s.info() != Eigen::Success) throw NumericalError("spectrum_values: real eigensolver failed");
    return s.eigenvalues();
  }
  Eigen::ComplexEigenSolver<CMat> s(dense, false);
  if (s.info() != Eigen::Success) throw NumericalError("spectrum_values: complex eigensolver failed");
  return s.eigenvalues();
}

CVec expansion_coefficients(const SpectrumResult& spec, const ManyBodyVector& psi) {
  if (spec.left.rows() != static_cast<Eigen::Index>(psi.size()))
    throw DomainError("expansion_coefficients: dimension mismatch");
  return spec.left.adjoint() * psi.amplitudes();
}

double reconstruction_error(const SpectrumResult& spec, const ManyBodyVector& psi, const CVec& c) {
  return (spec.right * c - psi.amplitudes()).norm();
}

double imag_fraction(const CVec& eigenvalues, double threshold) {
  if (eigenvalues.size() == 0) return 0.0;
  Eigen::Index count = 0;
  for (const auto& e : eigenvalues)
    if (std::abs(e.imag()) > threshold) ++count;
  return static_cast<double>(count) / static_cast<double>(eigenvalues.size());
}

std::vector<Eigen::Index> order_by_imag(const CVec& eigenvalues) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(eigenvalues.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) {
    const auto ea = eigenvalues[a], eb = eigenvalues[b];
    return ea.imag() != eb.imag() ? ea.imag() > eb.imag() : ea.real() < eb.real();
  });
  return idx;
}

ImagGapStats imag_gap_stats(const CVec& eigenvalues) {
  if (eigenvalues.size() < 5)
    throw DomainError("imag_gap_stats: needs at least 5 eigenvalues, got " +
                      std::to_string(eigenvalues.size()));
  const auto idx = order_by_imag(eigenvalues);
  ImagGapStats s;
  s.top = eigenvalues[idx[0]].imag();
  double acc = 0.0;
  for (int nu = 1; nu <= 4; ++nu) acc += eigenvalues[idx[static_cast<std::size_t>(nu)]].imag();
  s.tilde = acc / 4.0;
  s.deltas.resize(eigenvalues.size());
  for (Eigen::Index nu = 0; nu < eigenvalues.size(); ++nu)
    s.deltas[nu] = 2.0 * (s.top - eigenvalues[idx[static_cast<std::size_t>(nu)]].imag());
  return s;
}

}  // namespace hnsim
