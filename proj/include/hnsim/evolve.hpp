#pragma once

#include <cstdint>
#include <vector>

#include "hnsim/basis.hpp"
#include "hnsim/common.hpp"
#include "hnsim/model.hpp"

namespace hnsim {

struct KrylovConfig {
  double dt = 0.05;
  int M = 15;                   ///< Krylov subspace dimension
  double breakdown_tol = 1e-12; ///< happy-breakdown threshold on the new basis vector
  bool renorm_each_step = true;
  Exec exec = Exec::serial;     ///< kernel used for H x
};

struct StepInfo {
  int krylov_dim = 0;    ///< dimension actually used (< M after breakdown)
  bool breakdown = false;
  double growth = 1.0;   ///< ||psi(t+dt)|| / ||psi(t)|| before renormalization
  bool used_eig = true;  ///< small exponential by eigendecomposition (else Taylor)
};

/// Arnoldi propagator psi -> V_M exp(-i dt H_M) V_M^dagger psi for one
/// Hamiltonian. Holds its own workspace: create one per worker thread.
class ArnoldiPropagator {
 public:
  ArnoldiPropagator(const SparseHamiltonian& h, KrylovConfig cfg);

  /// Advances psi in place by dt (dt > 0), renormalizing when configured.
  StepInfo step(ManyBodyVector& psi, double dt);

  const KrylovConfig& config() const noexcept { return cfg_; }

 private:
  const SparseHamiltonian& h_;
  KrylovConfig cfg_;
  CMat v_;   // D x M orthonormal basis
  CMat hm_;  // M x M Hessenberg projection
  CVec w_;
};

/// One renormalized step of length cfg.dt.
ManyBodyVector arnoldi_step(const SparseHamiltonian& h, const ManyBodyVector& psi,
                            const KrylovConfig& cfg, StepInfo* info = nullptr);

struct OracleInfo {
  bool used_eigendecomposition = true;
  double biorthogonality_residual = 0.0;
  int taylor_substeps = 0;
};

/// Reference propagation through the full biorthogonal spectrum,
/// sum_a <<a|psi0> e^{-i E_a t} |a>, renormalized. Falls back to substepped
/// Taylor propagation when the eigenvectors are too poorly conditioned.
ManyBodyVector dense_propagate_oracle(const CMat& h, const ManyBodyVector& psi0, double t,
                                      OracleInfo* info = nullptr);

/// Which observables to record, and when.
struct RecordSpec {
  std::vector<double> times;  ///< strictly increasing, >= 0
  bool nj = true;
  bool nk = true;
  bool corr = false;
  std::vector<int> ells;      ///< entanglement cuts
  bool keep_states = false;
  Exec exec = Exec::serial;   ///< kernel used for observables
};

/// n points log-spaced on [t_min, t_max], both ends included.
std::vector<double> log_time_grid(double t_min, double t_max, int n);

struct SampleTag {
  int index = 0;
  std::uint64_t seed = 0;
  double theta = 0.0;
};

struct TrajectoryRecord {
  SampleTag sample;
  RVec times;
  std::vector<RVec> nj;
  std::vector<RVec> nk;
  std::vector<RVec> corr;
  std::vector<int> ells;
  RMat sent;                 ///< times x ells, nats
  std::vector<ManyBodyVector> states;
  RVec state_norms;          ///< norm of each recorded (renormalized) state
  double norm_drift = 0.0;   ///< sum over steps of |growth - 1|
  std::int64_t steps = 0;
};

/// Repeated Arnoldi steps, shortened where needed to land exactly on every
/// requested record time.
TrajectoryRecord evolve_trajectory(const SparseHamiltonian& h, const ManyBodyVector& psi0,
                                   const KrylovConfig& cfg, const RecordSpec& spec);

}  // namespace hnsim
