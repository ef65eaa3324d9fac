#pragma once

#include <vector>

#include "hnsim/basis.hpp"
#include "hnsim/common.hpp"
#include "hnsim/evolve.hpp"
#include "hnsim/spectral.hpp"

namespace hnsim {

/// Squared Schmidt coefficients of the cut between sites 0..ell-1 and the
/// rest, descending. The state is normalized internally.
RVec schmidt_spectrum(const ManyBodyVector& psi, int ell);

/// Von Neumann entropy (nats) of subsystem A = sites 0..ell-1, from the
/// singular values of the amplitude matrix. Fixed-N states are split into
/// blocks of definite particle number in A.
double entanglement_entropy(const ManyBodyVector& psi, int ell);

/// Omega_A = Tr_B |psi><psi| / <psi|psi> over the 2^ell patterns of A
/// (index = occupation pattern). Limited to ell <= 14.
CMat reduced_density_matrix(const ManyBodyVector& psi, int ell);

/// -Tr rho ln rho of a Hermitian density matrix; eigenvalues below 1e-15
/// contribute nothing.
double entropy_from_rdm(const CMat& rho);

/// Entanglement time series of one trajectory and its summaries.
struct EntanglementCurve {
  int ell = 0;
  RVec times;
  RVec values;
  double s_max = 0.0;
  double t0 = 0.0;          ///< first time at which s_max is attained
  double s_inf = 0.0;       ///< mean over the final decade t >= t_last / 10
  double s_inf_std = 0.0;   ///< sample standard deviation over that window
  std::size_t s_inf_points = 0;
};

/// Builds the summaries from a recorded series. Throws DomainError on an
/// empty or mismatched series.
EntanglementCurve summarize_entanglement(const RVec& times, const RVec& values, int ell);

/// Curve for cut `ell` from a trajectory: the recorded entropies when that
/// cut was recorded, otherwise computed from the kept states.
EntanglementCurve entanglement_scan(const TrajectoryRecord& traj, int ell);

enum class EntropyVariant { RR, LL, RL };

struct EigenstateEntropy {
  cplx value;
  int dropped = 0;      ///< RL eigenvalues with |lambda| < 1e-12 left out
  bool flagged = false; ///< dropped terms or eigenvalues on the negative real axis
};

/// Entropy of eigenstate `alpha` from its right (RR), left (LL) or mixed
/// (RL) density matrix. RL uses Tr_B |a>><a| normalized to unit trace and
/// the principal-branch logarithm, so it may be complex.
EigenstateEntropy eigenstate_entropy(const SpectrumResult& spec, const BasisPtr& basis,
                                     Eigen::Index alpha, int ell, EntropyVariant variant);

}  // namespace hnsim
