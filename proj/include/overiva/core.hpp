#pragma once

#include "overiva/types.hpp"

namespace overiva {

/// Per-frequency demixing parametrization. The full demixing matrix is
///   What_f = [W_f; U_f]   with   U_f = [J_f  -I],
/// so only W_f (n_src x n_chan) and J_f ((n_chan-n_src) x n_src) are stored,
/// together with the cached input covariance C_f.
struct DemixingState {
  std::vector<CMat> W;  // per bin: n_src x n_chan, rows are w_{kf}^H
  std::vector<CMat> J;  // per bin: (n_chan - n_src) x n_src
  std::vector<CMat> C;  // per bin: n_chan x n_chan, Hermitian PSD
  int n_src = 0;
  int n_chan = 0;

  int n_bins() const { return static_cast<int>(W.size()); }

  /// Densely assembled What_f (n_chan x n_chan).
  CMat assembled(int f) const;

  /// U_f = [J_f  -I], (n_chan - n_src) x n_chan. Empty when n_src == n_chan.
  CMat background(int f) const;

  /// W_f = [I_K 0], J_f = 0, C_f computed from X.
  static DemixingState identity_init(const SpectrogramTensor& X, int n_src);
};

/// (1/N) X_f X_f^H, symmetrized to be exactly Hermitian.
CMat compute_covariance(const CMat& X_f);

/// s_{kfn} = w_{kf}^H x_{fn}: apply the top block per frequency.
SpectrogramTensor demix(const DemixingState& state,
                        const SpectrogramTensor& X);

/// z_{fn} = U_f x_{fn}: apply the background block per frequency.
/// Returns an empty (0-channel) tensor when n_src == n_chan.
SpectrogramTensor background_demix(const DemixingState& state,
                                   const SpectrogramTensor& X);

/// log |det A| via LU. Throws NumericDegeneracyError on a singular factor.
double log_abs_det(const CMat& A, int frequency);

/// Negative log-likelihood of the observed data under the separation model:
///   -2N sum_f log|det What_f|
///   + sum_{kn} (F log r_{kn} + |s_{kn}|^2 / r_{kn})      (Gauss)
///     or sum_{kn} ||s_{kn}||_2                           (Laplace)
///   + sum_f ( N log|det R_f| + sum_n z_{fn}^H R_f^{-1} z_{fn} ),
/// with R_f = U_f C_f U_f^H. Near-singular R_f gets eps_c * I added before
/// inversion; this function is a diagnostic monitor, the solver itself never
/// inverts R_f.
double negative_log_likelihood(const DemixingState& state,
                               const SpectrogramTensor& X,
                               const SourceActivations& activations,
                               SourceModel model, double eps_c = 1e-10);

/// Same quantity on the background-stationary form: the quadratic background
/// term is replaced by its closed-form value N * (n_chan - n_src) per
/// frequency. Used as the per-update objective monitor inside the solvers;
/// source_sq_norms is the n_src x frames matrix of sum_f |s_{kfn}|^2.
double monitor_objective(const DemixingState& state,
                         const RMat& source_sq_norms, const RMat& r,
                         double eps_c = 1e-10);

}  // namespace overiva
