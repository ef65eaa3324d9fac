#pragma once

#include "hnsim/common.hpp"

namespace hnsim {

/// GGE occupation 1/(1 + e^{lambda - 2 Im(eps) t}) with eps = dispersion(k, g)
/// (gamma0 = 1), or 2 eps when `factor2` is set.
double gge_nk(double k, double g, double t, double lambda = 0.0, bool factor2 = true);

/// Binary entropy -n ln n - (1-n) ln(1-n). Throws DomainError outside [0, 1].
double entropy_density(double n);

/// Probability-like weight that exactly one end of a pair with ring
/// separation x lies in a block of ell sites: min(x, ell, L-x, L-ell) / L.
double straddle_weight(double x, int ell, int sites);

/// Quasiparticle entropy on the ring,
///   S(t) = sum_k s_k(t) P((2|v_k| t) mod L, ell, L),  v_k = -2 cosh(g) sin k,
/// over k_m = 2 pi m / L. s_k is the entropy density of gge_nk(k, g, t, 0,
/// factor2) when `time_dependent_weights`, else ln 2.
double qpp_entropy(int sites, int ell, double g, double t, bool time_dependent_weights,
                   bool factor2 = true);

/// Plateau value min(ell, L-ell)/L * sum_k s_k reached while every pair
/// straddles the cut, with weights frozen at time t (ln 2 each when
/// time_dependent_weights is false).
double qpp_plateau(int sites, int ell, double g, double t, bool time_dependent_weights,
                   bool factor2 = true);

/// Revival period L / (2 max|v|) = L / (4 cosh g).
double qpp_revival_period(int sites, double g);

}  // namespace hnsim
