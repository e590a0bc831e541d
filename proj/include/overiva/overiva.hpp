#pragma once

#include <functional>

#include "overiva/core.hpp"
#include "overiva/types.hpp"

namespace overiva {

struct IterationDiagnostics {
  double objective = 0.0;  // monitor value at sweep end
  double max_orthogonality_residual = 0.0;  // max_f ||W C U^H||_F / ||C||_F
  double max_normalization_error = 0.0;     // max |w^H V w - 1|
};

struct SeparationResult {
  SpectrogramTensor sources;  // n_src x bins x frames
  DemixingState state;
  std::vector<IterationDiagnostics> trace;  // one entry per sweep
  std::vector<double> update_trace;  // per-update objective, when recorded
  int iterations_run = 0;
};

/// Called at the end of each sweep with the current state and sources.
using SweepObserver = std::function<void(
    int sweep, const DemixingState& state, const SpectrogramTensor& sources)>;

/// Variance surrogates from the demixed sources:
///   Gauss:   r_{kn} = (1/F) sum_f |s_{kfn}|^2
///   Laplace: r_{kn} = 2 sqrt(sum_f |s_{kfn}|^2)
/// floored elementwise at activation_floor.
SourceActivations update_activations(const SpectrogramTensor& Y,
                                     SourceModel model,
                                     double activation_floor);

/// V_{kf} = (1/N) sum_n x_{fn} x_{fn}^H / r_{kn}, symmetrized Hermitian.
CMat weighted_covariance(const CMat& X_f, const Eigen::Ref<const RVec>& r_k);

/// One iterative-projection row update: solve (What_f V) w = e_k, then
/// rescale so that w^H V w = 1. Retries once with a ridge of
/// eps_c * trace(V)/n_chan when the system is near singular.
CVec update_demix_vector(const DemixingState& state, const CMat& V, int k,
                         int f, double eps_c);

/// Background update keeping the noise subspace orthogonal to the sources:
///   J_f = (E2 C_f W_f^H) (E1 C_f W_f^H)^{-1}.
/// Returns the empty matrix when n_src == n_chan.
CMat update_background(const DemixingState& state, int f, double eps_c);

/// Full alternating solver. Per sweep, per source k: refresh r_{k.}, then
/// per frequency: V_{kf}, row solve, rescale, refresh s_{kf.}, refresh J_f.
/// Initialization is W_f = [I_K 0], J_f = 0. The recorded objective is the
/// Gauss-model monitor; under the Laplace model it tracks the surrogate.
SeparationResult overiva_run(const SpectrogramTensor& X,
                             const SeparationConfig& cfg,
                             const SweepObserver& observer = {});

/// Single-source extraction: overiva_run restricted to n_src == 1.
SeparationResult ive_run(const SpectrogramTensor& X,
                         const SeparationConfig& cfg,
                         const SweepObserver& observer = {});

}  // namespace overiva
