#include "hnsim/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hnsim/model.hpp"
#include "hnsim/observables.hpp"

namespace hnsim {

double gge_nk(double k, double g, double t, double lambda, bool factor2) {
  double im = dispersion(k, g).imag();
  if (factor2) im *= 2.0;
  return 1.0 / (1.0 + std::exp(lambda - 2.0 * im * t));
}

double entropy_density(double n) {
  if (!(n >= 0.0 && n <= 1.0)) throw DomainError("entropy_density: n=" + std::to_string(n) + " outside [0, 1]");
  double s = 0.0;
  if (n > 0.0) s -= n * std::log(n);
  if (n < 1.0) s -= (1.0 - n) * std::log1p(-n);
  return s;
}

double straddle_weight(double x, int ell, int sites) {
  const double L = sites;
  return std::max(0.0, std::min({x, static_cast<double>(ell), L - x, L - ell})) / L;
}

namespace {
void check(int sites, int ell) {
  if (ell < 1 || ell > sites - 1)
    throw DomainError("quasiparticle entropy: ell=" + std::to_string(ell) + " outside [1, L-1]");
}

double weight_sum(int sites, double g, double t, bool tdw, bool factor2) {
  const RVec k = momentum_grid(sites);
  double s = 0.0;
  for (double kk : k) s += tdw ? entropy_density(gge_nk(kk, g, t, 0.0, factor2)) : std::log(2.0);
  return s;
}
}  // namespace

double qpp_entropy(int sites, int ell, double g, double t, bool tdw, bool factor2) {
  check(sites, ell);
  const RVec k = momentum_grid(sites);
  double s = 0.0;
  for (double kk : k) {
    const double v = -2.0 * std::cosh(g) * std::sin(kk);
    const double x = std::fmod(2.0 * std::abs(v) * t, static_cast<double>(sites));
    const double sk = tdw ? entropy_density(gge_nk(kk, g, t, 0.0, factor2)) : std::log(2.0);
    s += sk * straddle_weight(x, ell, sites);
  }
  return s;
}

double qpp_plateau(int sites, int ell, double g, double t, bool tdw, bool factor2) {
  check(sites, ell);
  return std::min(ell, sites - ell) / static_cast<double>(sites) * weight_sum(sites, g, t, tdw, factor2);
}

double qpp_revival_period(int sites, double g) { return sites / (4.0 * std::cosh(g)); }

}  // namespace hnsim
