#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hnsim/common.hpp"

namespace hnsim {

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> params;
  RMat covariance;            ///< empty when not estimable
  double residual_rms = 0.0;
  std::size_t points = 0;     ///< points used
  std::size_t excluded = 0;   ///< points supplied but left out by the fit's rules

  double operator[](const std::string& name) const;
};

/// Chord distance 2 L sin(pi ell / L).
double chord_length(int ell, int sites);

/// Least squares S = (c_eff / 3) ln(2 L sin(pi ell / L)) + const. Points at
/// ell = 1 and ell = L-1 are excluded unless `keep_edges`; exclusions are
/// counted in the result. Parameters: "c_eff", "const".
FitResult fit_ceff(const std::vector<std::pair<int, double>>& s_of_ell, int sites,
                   bool keep_edges = false);

/// Minimum of a unimodal f on [a, b] by golden-section search.
double golden_section(const std::function<double(double)>& f, double a, double b,
                      double tol = 1e-10, int max_iter = 200);

/// One-parameter logistic fit n(t) = 1/(1 + e^{-r t}). Parameters: "r" and
/// "ratio" = r / (2 |Im eps_k|) with eps_k = dispersion(k, g).
FitResult fit_nk_relaxation(const std::vector<std::pair<double, double>>& series, double k,
                            double g);

/// Phase phi minimizing the RMS between observed eigenvalue pairs (lo, hi)
/// and lambda_pm(omega t + phi). Parameters: "phi" in [0, 2 pi).
FitResult fit_oscillation_phase(const RVec& times, const RVec& lam_lo, const RVec& lam_hi,
                                double omega);

/// Angular frequency in [omega_min, omega_max] maximizing the periodogram
/// |sum_i (y_i - mean) e^{-i omega t_i}|^2: grid scan then golden refinement.
double dominant_frequency(const RVec& times, const RVec& values, double omega_min,
                          double omega_max, int grid = 4000);

}  // namespace hnsim
