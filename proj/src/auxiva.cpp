#include "overiva/auxiva.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace overiva {

SeparationResult auxiva_run(const SpectrogramTensor& X,
                            const SeparationConfig& cfg,
                            const SweepObserver& observer) {
  const int M = X.channels();
  const int F = X.bins();
  const int N = X.frames();
  if (M < 1 || N < 1) throw InvalidInputError("empty input");
  if (cfg.max_iters < 1) throw InvalidInputError("max_iters must be >= 1");
  if (cfg.activation_floor <= 0.0 || cfg.solve_regularization <= 0.0) {
    throw InvalidInputError("floors must be strictly positive");
  }

  SeparationResult result;
  result.state = DemixingState::identity_init(X, M);  // square, J empty
  result.sources = X;
  DemixingState& state = result.state;
  SpectrogramTensor& Y = result.sources;

  RMat r = RMat::Ones(M, N);
  RMat sq_norms(M, N);
  std::vector<CMat> previous_W;
  for (int sweep = 0; sweep < cfg.max_iters; ++sweep) {
    if (cfg.convergence_tol > 0.0) previous_W = state.W;
    IterationDiagnostics diag;
    try {
      for (int k = 0; k < M; ++k) {
        RMat k_sq = RMat::Zero(1, N);
        for (int f = 0; f < F; ++f) k_sq += Y.bin(f).row(k).cwiseAbs2();
        if (cfg.model == SourceModel::kGauss) {
          r.row(k) = (k_sq / F).cwiseMax(cfg.activation_floor);
        } else {
          r.row(k) = (2.0 * k_sq.cwiseSqrt()).cwiseMax(cfg.activation_floor);
        }
        for (int f = 0; f < F; ++f) {
          const CMat V = weighted_covariance(X.bin(f), r.row(k).transpose());
          const CVec w =
              update_demix_vector(state, V, k, f, cfg.solve_regularization);
          state.W[static_cast<size_t>(f)].row(k) = w.adjoint();
          diag.max_normalization_error =
              std::max(diag.max_normalization_error,
                       std::abs((w.adjoint() * V * w).real()(0, 0) - 1.0));
          Y.bin(f).row(k) = w.adjoint() * X.bin(f);
        }
      }
    } catch (const NumericDegeneracyError& e) {
      throw NumericDegeneracyError(e.message(), e.frequency(), e.source(),
                                   sweep);
    }

    sq_norms.setZero();
    for (int f = 0; f < F; ++f) sq_norms += Y.bin(f).cwiseAbs2();
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

PowerSelection select_by_power(const SpectrogramTensor& Y, int n_keep) {
  const int M = Y.channels();
  if (n_keep < 1 || n_keep > M) {
    throw InvalidInputError("need 1 <= n_keep <= channels");
  }
  RVec power = RVec::Zero(M);
  for (int f = 0; f < Y.bins(); ++f) {
    power += Y.bin(f).cwiseAbs2().rowwise().sum();
  }
  std::vector<int> order(static_cast<size_t>(M));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return power[a] > power[b];  // stable: ties keep the lower index first
  });
  order.resize(static_cast<size_t>(n_keep));
  std::sort(order.begin(), order.end());

  PowerSelection out;
  out.indices = order;
  out.selected = SpectrogramTensor(n_keep, Y.bins(), Y.frames(),
                                   Y.frame_size(), Y.hop(), Y.sample_rate());
  for (int f = 0; f < Y.bins(); ++f) {
    for (int i = 0; i < n_keep; ++i) {
      out.selected.bin(f).row(i) = Y.bin(f).row(order[static_cast<size_t>(i)]);
    }
  }
  return out;
}

PcaReduction pca_reduce(const SpectrogramTensor& X, int n_keep) {
  const int M = X.channels();
  if (n_keep < 1 || n_keep > M) {
    throw InvalidInputError("need 1 <= n_keep <= channels");
  }
  PcaReduction out;
  out.reduced = SpectrogramTensor(n_keep, X.bins(), X.frames(), X.frame_size(),
                                  X.hop(), X.sample_rate());
  out.projections.reserve(static_cast<size_t>(X.bins()));
  for (int f = 0; f < X.bins(); ++f) {
    const CMat C = compute_covariance(X.bin(f));
    Eigen::SelfAdjointEigenSolver<CMat> eig(C);  // ascending eigenvalues
    CMat basis(M, n_keep);
    for (int i = 0; i < n_keep; ++i) {
      CVec v = eig.eigenvectors().col(M - 1 - i);
      // phase convention: first nonzero component real positive
      for (Eigen::Index j = 0; j < v.size(); ++j) {
        const double mag = std::abs(v[j]);
        if (mag > 1e-12) {
          v *= std::conj(v[j]) / mag;
          break;
        }
      }
      basis.col(i) = v;
    }
    out.projections.push_back(basis.adjoint());  // n_keep x M
    out.reduced.bin(f) = out.projections.back() * X.bin(f);
  }
  return out;
}

}  // namespace overiva
