#include "overiva/overiva.hpp"

#include <Eigen/LU>

#include <cmath>
#include <utility>

namespace overiva {

namespace {

// Relative Frobenius residual of the orthogonal constraint W C U^H = 0.
double orthogonality_residual(const DemixingState& state, int f) {
  const CMat& C = state.C[static_cast<size_t>(f)];
  const CMat residual =
      state.W[static_cast<size_t>(f)] * C * state.background(f).adjoint();
  return residual.norm() / std::max(C.norm(), 1e-300);
}

void validate_config(const SpectrogramTensor& X, const SeparationConfig& cfg) {
  if (cfg.n_src < 1 || cfg.n_src > X.channels()) {
    throw InvalidInputError("need 1 <= n_src <= channels, got n_src = " +
                            std::to_string(cfg.n_src) + " with " +
                            std::to_string(X.channels()) + " channels");
  }
  if (X.frames() < 1) throw InvalidInputError("need at least one frame");
  if (cfg.max_iters < 1) throw InvalidInputError("max_iters must be >= 1");
  if (cfg.activation_floor <= 0.0 || cfg.solve_regularization <= 0.0) {
    throw InvalidInputError("floors must be strictly positive");
  }
}

}  // namespace

SourceActivations update_activations(const SpectrogramTensor& Y,
                                     SourceModel model,
                                     double activation_floor) {
  RMat sq_norms = RMat::Zero(Y.channels(), Y.frames());
  for (int f = 0; f < Y.bins(); ++f) sq_norms += Y.bin(f).cwiseAbs2();
  SourceActivations out;
  if (model == SourceModel::kGauss) {
    out.r = (sq_norms / Y.bins()).cwiseMax(activation_floor);
  } else {
    out.r = (2.0 * sq_norms.cwiseSqrt()).cwiseMax(activation_floor);
  }
  return out;
}

CMat weighted_covariance(const CMat& X_f, const Eigen::Ref<const RVec>& r_k) {
  const Eigen::Index N = X_f.cols();
  const CMat weighted =
      X_f * (r_k.cwiseInverse() / static_cast<double>(N))
                .cast<Complex>().asDiagonal();
  CMat V = weighted * X_f.adjoint();
  return 0.5 * (V + V.adjoint());
}

CVec update_demix_vector(const DemixingState& state, const CMat& V, int k,
                         int f, double eps_c) {
  const int M = state.n_chan;
  CMat system = state.assembled(f) * V;
  Eigen::PartialPivLU<CMat> lu(system);
  if (lu.rcond() < 1e-12) {
    // one ridge retry before giving up
    const double ridge = eps_c * V.trace().real() / M;
    system = state.assembled(f) * (V + ridge * CMat::Identity(M, M));
    lu.compute(system);
  }
  CVec w = lu.solve(CVec::Unit(M, k));
  const double quad = (w.adjoint() * V * w).real()(0, 0);
  if (!w.allFinite() || !(quad > 0.0) || !std::isfinite(quad)) {
    throw NumericDegeneracyError("demixing row solve degenerated", f, k);
  }
  return w / std::sqrt(quad);
}

CMat update_background(const DemixingState& state, int f, double eps_c) {
  const int K = state.n_src;
  const int n_bg = state.n_chan - K;
  if (n_bg == 0) return CMat(0, K);
  const CMat G = state.C[static_cast<size_t>(f)] *
                 state.W[static_cast<size_t>(f)].adjoint();  // M x K
  // J = G_bottom * G_top^{-1}, via the transposed system
  CMat top_t = G.topRows(K).transpose();
  Eigen::PartialPivLU<CMat> lu(top_t);
  if (lu.rcond() < 1e-12) {
    const double ridge = eps_c * std::abs(G.topRows(K).trace()) / K;
    top_t += ridge * CMat::Identity(K, K);
    lu.compute(top_t);
  }
  const CMat J = lu.solve(G.bottomRows(n_bg).transpose()).transpose();
  if (!J.allFinite()) {
    throw NumericDegeneracyError("background update solve degenerated", f);
  }
  return J;
}

SeparationResult overiva_run(const SpectrogramTensor& X,
                             const SeparationConfig& cfg,
                             const SweepObserver& observer) {
  validate_config(X, cfg);
  const int K = cfg.n_src;
  const int M = X.channels();
  const int F = X.bins();
  const int N = X.frames();

  SeparationResult result;
  result.state = DemixingState::identity_init(X, K);
  result.sources = X.top_channels(K);
  DemixingState& state = result.state;
  SpectrogramTensor& Y = result.sources;

  RMat r = RMat::Ones(K, N);
  RMat sq_norms(K, N);
  const auto recompute_sq_norms = [&] {
    sq_norms.setZero();
    for (int f = 0; f < F; ++f) sq_norms += Y.bin(f).cwiseAbs2();
  };
  const auto record_update = [&] {
    if (!cfg.record_update_trace) return;
    recompute_sq_norms();
    result.update_trace.push_back(
        monitor_objective(state, sq_norms, r, cfg.solve_regularization));
  };

  std::vector<CMat> previous_W;
  for (int sweep = 0; sweep < cfg.max_iters; ++sweep) {
    if (cfg.convergence_tol > 0.0) previous_W = state.W;
    IterationDiagnostics diag;
    try {
      for (int k = 0; k < K; ++k) {
        RMat k_sq = RMat::Zero(1, N);
        for (int f = 0; f < F; ++f) {
          k_sq += Y.bin(f).row(k).cwiseAbs2();
        }
        if (cfg.model == SourceModel::kGauss) {
          r.row(k) = (k_sq / F).cwiseMax(cfg.activation_floor);
        } else {
          r.row(k) = (2.0 * k_sq.cwiseSqrt()).cwiseMax(cfg.activation_floor);
        }
        record_update();
        for (int f = 0; f < F; ++f) {
          const CMat V = weighted_covariance(X.bin(f), r.row(k).transpose());
          const CVec w =
              update_demix_vector(state, V, k, f, cfg.solve_regularization);
          state.W[static_cast<size_t>(f)].row(k) = w.adjoint();
          diag.max_normalization_error =
              std::max(diag.max_normalization_error,
                       std::abs((w.adjoint() * V * w).real()(0, 0) - 1.0));
          Y.bin(f).row(k) = w.adjoint() * X.bin(f);
          record_update();
          if (K < M) {
            state.J[static_cast<size_t>(f)] =
                update_background(state, f, cfg.solve_regularization);
            diag.max_orthogonality_residual =
                std::max(diag.max_orthogonality_residual,
                         orthogonality_residual(state, f));
            record_update();
          }
        }
      }
    } catch (const NumericDegeneracyError& e) {
      throw NumericDegeneracyError(e.message(), e.frequency(), e.source(),
                                   sweep);
    }

    recompute_sq_norms();
    diag.objective =
        monitor_objective(state, sq_norms, r, cfg.solve_regularization);
    result.trace.push_back(diag);
    result.iterations_run = sweep + 1;
    if (observer) observer(sweep, state, Y);

    if (cfg.convergence_tol > 0.0) {
      double delta = 0.0;
      for (int f = 0; f < F; ++f) {
        delta = std::max(delta, (state.W[static_cast<size_t>(f)] -
                                 previous_W[static_cast<size_t>(f)])
                                    .cwiseAbs().maxCoeff());
      }
      if (delta < cfg.convergence_tol) break;
    }
  }
  return result;
}

SeparationResult ive_run(const SpectrogramTensor& X,
                         const SeparationConfig& cfg,
                         const SweepObserver& observer) {
  if (cfg.n_src != 1) {
    throw InvalidInputError("ive_run extracts a single source; n_src must be 1");
  }
  return overiva_run(X, cfg, observer);
}

}  // namespace overiva
