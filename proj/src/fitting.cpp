#include "hnsim/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hnsim/freefermion.hpp"
#include "hnsim/model.hpp"

namespace hnsim {

double FitResult::operator[](const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return params[i];
  throw DomainError("FitResult: no parameter named " + name);
}

double chord_length(int ell, int sites) {
  if (ell < 1 || ell > sites - 1) throw DomainError("chord_length: ell outside [1, L-1]");
  return 2.0 * sites * std::sin(kPi * ell / sites);
}

FitResult fit_ceff(const std::vector<std::pair<int, double>>& s_of_ell, int sites, bool keep_edges) {
  FitResult r;
  r.names = {"c_eff", "const"};
  std::vector<double> x, y;
  std::set<int> ells;
  for (const auto& [ell, s] : s_of_ell) {
    if (!keep_edges && (ell == 1 || ell == sites - 1)) {
      ++r.excluded;
      continue;
    }
    x.push_back(std::log(chord_length(ell, sites)) / 3.0);
    y.push_back(s);
    ells.insert(ell);
  }
  if (ells.size() < 3) throw DomainError("fit_ceff: needs at least 3 distinct ell values");
  const auto n = static_cast<Eigen::Index>(x.size());
  RMat a(n, 2);
  RVec b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = x[static_cast<std::size_t>(i)];
    a(i, 1) = 1.0;
    b[i] = y[static_cast<std::size_t>(i)];
  }
  const RMat ata = a.transpose() * a;
  Eigen::FullPivLU<RMat> lu(ata);
  const double xspread = a.col(0).maxCoeff() - a.col(0).minCoeff();
  if (!lu.isInvertible() || !(xspread > 1e-12))
    throw DomainError("fit_ceff: degenerate design (all chord lengths equal)");
  const RVec sol = a.colPivHouseholderQr().solve(b);
  const RVec res = b - a * sol;
  r.params = {sol[0], sol[1]};
  r.points = static_cast<std::size_t>(n);
  r.residual_rms = std::sqrt(res.squaredNorm() / static_cast<double>(n));
  if (n > 2) r.covariance = lu.inverse() * (res.squaredNorm() / static_cast<double>(n - 2));
  return r;
}

double golden_section(const std::function<double(double)>& f, double a, double b, double tol,
                      int max_iter) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < max_iter && std::abs(b - a) > tol * (1.0 + std::abs(a) + std::abs(b)); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

FitResult fit_nk_relaxation(const std::vector<std::pair<double, double>>& series, double k, double g) {
  std::size_t informative = 0;
  double mean = 0.0;
  for (const auto& [t, n] : series) {
    if (std::min(n, 1.0 - n) > 1e-3) ++informative;
    mean += n;
  }
  if (series.empty() || informative < 2)
    throw DomainError("fit_nk_relaxation: series is saturated everywhere, nothing to fit");
  mean /= static_cast<double>(series.size());
  // Growing modes relax to 1, decaying ones to 0; fit log|r| with that sign.
  const double sign = mean >= 0.5 ? 1.0 : -1.0;
  const auto loss = [&](double logr) {
    const double r = sign * std::exp(logr);
    double s = 0.0;
    for (const auto& [t, n] : series) {
      const double d = n - 1.0 / (1.0 + std::exp(-r * t));
      s += d * d;
    }
    return s;
  };
  // Coarse scan brackets the minimum before the golden refinement.
  const double lo = std::log(1e-6), hi = std::log(1e3);
  const int grid = 400;
  int best = 0;
  double fbest = loss(lo);
  for (int i = 1; i <= grid; ++i) {
    const double v = loss(lo + (hi - lo) * i / grid);
    if (v < fbest) {
      fbest = v;
      best = i;
    }
  }
  const double step = (hi - lo) / grid;
  const double logr = golden_section(loss, lo + step * std::max(0, best - 1),
                                     lo + step * std::min(grid, best + 1), 1e-12);
  FitResult r;
  r.names = {"r", "ratio"};
  const double rate = sign * std::exp(logr);
  const double im = std::abs(dispersion(k, g).imag());
  r.params = {rate, im > 0.0 ? std::abs(rate) / (2.0 * im) : std::nan("")};
  r.points = series.size();
  r.residual_rms = std::sqrt(loss(logr) / static_cast<double>(series.size()));
  return r;
}

FitResult fit_oscillation_phase(const RVec& times, const RVec& lam_lo, const RVec& lam_hi,
                                double omega) {
  if (times.size() == 0 || times.size() != lam_lo.size() || times.size() != lam_hi.size())
    throw DomainError("fit_oscillation_phase: empty or mismatched series");
  const auto n = times.size();
  const auto loss = [&](double phi) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto [lo, hi] = lambda_pm(omega * times[i] + phi);
      s += (lam_lo[i] - lo) * (lam_lo[i] - lo) + (lam_hi[i] - hi) * (lam_hi[i] - hi);
    }
    return s;
  };
  const int grid = 720;
  int best = 0;
  double fbest = loss(0.0);
  for (int i = 1; i < grid; ++i) {
    const double v = loss(2.0 * kPi * i / grid);
    if (v < fbest) {
      fbest = v;
      best = i;
    }
  }
  const double step = 2.0 * kPi / grid;
  double phi = golden_section(loss, step * (best - 1), step * (best + 1), 1e-12);
  const double f = loss(phi);
  phi = std::fmod(phi, 2.0 * kPi);
  if (phi < 0) phi += 2.0 * kPi;
  FitResult r;
  r.names = {"phi"};
  r.params = {phi};
  r.points = static_cast<std::size_t>(n);
  r.residual_rms = std::sqrt(f / (2.0 * static_cast<double>(n)));
  return r;
}

double dominant_frequency(const RVec& times, const RVec& values, double omega_min,
                          double omega_max, int grid) {
  if (times.size() < 4 || times.size() != values.size())
    throw DomainError("dominant_frequency: needs at least 4 matching samples");
  if (!(omega_max > omega_min && omega_min >= 0.0) || grid < 2)
    throw DomainError("dominant_frequency: invalid frequency window");
  const double mean = values.mean();
  const auto power = [&](double w) {
    cplx acc{};
    for (Eigen::Index i = 0; i < times.size(); ++i)
      acc += (values[i] - mean) * std::polar(1.0, -w * times[i]);
    return -std::norm(acc);
  };
  int best = 0;
  double pbest = power(omega_min);
  for (int i = 1; i <= grid; ++i) {
    const double v = power(omega_min + (omega_max - omega_min) * i / grid);
    if (v < pbest) {
      pbest = v;
      best = i;
    }
  }
  const double step = (omega_max - omega_min) / grid;
  return golden_section(power, omega_min + step * std::max(0, best - 1),
                        omega_min + step * std::min(grid, best + 1), 1e-12);
}

}  // namespace hnsim
