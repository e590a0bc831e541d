#include "overiva/core.hpp"

#include <Eigen/LU>

#include <cmath>

namespace overiva {

namespace {

void check_shapes(const DemixingState& state, const SpectrogramTensor& X) {
  if (state.n_chan != X.channels() || state.n_bins() != X.bins()) {
    throw InvalidInputError("demixing state does not match input shape");
  }
}

// Hermitian-symmetrized U C U^H for one frequency.
CMat background_covariance(const DemixingState& state, int f) {
  const CMat U = state.background(f);
  CMat R = U * state.C[static_cast<size_t>(f)] * U.adjoint();
  return 0.5 * (R + R.adjoint());
}

}  // namespace

CMat DemixingState::assembled(int f) const {
  CMat full(n_chan, n_chan);
  full.topRows(n_src) = W[static_cast<size_t>(f)];
  if (n_chan > n_src) full.bottomRows(n_chan - n_src) = background(f);
  return full;
}

CMat DemixingState::background(int f) const {
  const int n_bg = n_chan - n_src;
  CMat U(n_bg, n_chan);
  U.leftCols(n_src) = J[static_cast<size_t>(f)];
  U.rightCols(n_bg) = -CMat::Identity(n_bg, n_bg);
  return U;
}

DemixingState DemixingState::identity_init(const SpectrogramTensor& X,
                                           int n_src) {
  if (n_src < 1 || n_src > X.channels()) {
    throw InvalidInputError("need 1 <= n_src <= channels, got n_src = " +
                            std::to_string(n_src) + " with " +
                            std::to_string(X.channels()) + " channels");
  }
  DemixingState state;
  state.n_src = n_src;
  state.n_chan = X.channels();
  const int n_bg = state.n_chan - n_src;
  state.W.reserve(static_cast<size_t>(X.bins()));
  state.J.reserve(static_cast<size_t>(X.bins()));
  state.C.reserve(static_cast<size_t>(X.bins()));
  for (int f = 0; f < X.bins(); ++f) {
    CMat w = CMat::Zero(n_src, state.n_chan);
    w.leftCols(n_src) = CMat::Identity(n_src, n_src);
    state.W.push_back(std::move(w));
    state.J.push_back(CMat::Zero(n_bg, n_src));
    state.C.push_back(compute_covariance(X.bin(f)));
  }
  return state;
}

CMat compute_covariance(const CMat& X_f) {
  if (X_f.cols() < 1) {
    throw InvalidInputError("covariance needs at least one frame");
  }
  CMat C = X_f * X_f.adjoint() / static_cast<double>(X_f.cols());
  return 0.5 * (C + C.adjoint());
}

SpectrogramTensor demix(const DemixingState& state,
                        const SpectrogramTensor& X) {
  check_shapes(state, X);
  SpectrogramTensor Y(state.n_src, X.bins(), X.frames(), X.frame_size(),
                      X.hop(), X.sample_rate());
  for (int f = 0; f < X.bins(); ++f) {
    Y.bin(f) = state.W[static_cast<size_t>(f)] * X.bin(f);
  }
  return Y;
}

SpectrogramTensor background_demix(const DemixingState& state,
                                   const SpectrogramTensor& X) {
  check_shapes(state, X);
  const int n_bg = state.n_chan - state.n_src;
  SpectrogramTensor Z(n_bg, X.bins(), X.frames(), X.frame_size(), X.hop(),
                      X.sample_rate());
  for (int f = 0; f < X.bins(); ++f) {
    Z.bin(f) = state.J[static_cast<size_t>(f)] * X.bin(f).topRows(state.n_src)
               - X.bin(f).bottomRows(n_bg);
  }
  return Z;
}

double log_abs_det(const CMat& A, int frequency) {
  if (A.rows() == 0) return 0.0;
  Eigen::PartialPivLU<CMat> lu(A);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    sum += std::log(std::abs(lu.matrixLU()(i, i)));
  }
  if (!std::isfinite(sum)) {
    throw NumericDegeneracyError("singular matrix in log|det|", frequency);
  }
  return sum;
}

double negative_log_likelihood(const DemixingState& state,
                               const SpectrogramTensor& X,
                               const SourceActivations& activations,
                               SourceModel model, double eps_c) {
  check_shapes(state, X);
  const RMat& r = activations.r;
  if (r.rows() != state.n_src || r.cols() != X.frames()) {
    throw InvalidInputError("activations shape does not match");
  }
  if ((r.array() <= 0.0).any()) {
    throw InvalidInputError("activations must be strictly positive");
  }

  const int F = X.bins();
  const int N = X.frames();
  const int n_bg = state.n_chan - state.n_src;

  const SpectrogramTensor Y = demix(state, X);
  RMat sq_norms = RMat::Zero(state.n_src, N);  // sum_f |s_{kfn}|^2
  for (int f = 0; f < F; ++f) sq_norms += Y.bin(f).cwiseAbs2();

  double value = 0.0;
  for (int f = 0; f < F; ++f) value += -2.0 * N * log_abs_det(state.assembled(f), f);

  if (model == SourceModel::kGauss) {
    value += (F * r.array().log() + sq_norms.array() / r.array()).sum();
  } else {
    value += sq_norms.array().sqrt().sum();
  }

  if (n_bg > 0) {
    const SpectrogramTensor Z = background_demix(state, X);
    for (int f = 0; f < F; ++f) {
      CMat R = background_covariance(state, f);
      Eigen::PartialPivLU<CMat> lu(R);
      if (lu.rcond() < 1e-12) {  // monitor-only ridge on degenerate R_f
        R += eps_c * CMat::Identity(n_bg, n_bg);
        lu.compute(R);
      }
      double log_det = 0.0;
      for (int i = 0; i < n_bg; ++i) {
        log_det += std::log(std::abs(lu.matrixLU()(i, i)));
      }
      const CMat solved = lu.solve(Z.bin(f));
      const double quad = Z.bin(f).cwiseProduct(solved.conjugate())
                              .real().sum();
      if (!std::isfinite(log_det) || !std::isfinite(quad)) {
        throw NumericDegeneracyError("degenerate background covariance", f);
      }
      value += N * log_det + quad;
    }
  }
  return value;
}

double monitor_objective(const DemixingState& state,
                         const RMat& source_sq_norms, const RMat& r,
                         double eps_c) {
  const int F = state.n_bins();
  const int N = static_cast<int>(r.cols());
  const int n_bg = state.n_chan - state.n_src;

  double value = 0.0;
  for (int f = 0; f < F; ++f) {
    value += -2.0 * N * log_abs_det(state.assembled(f), f);
    if (n_bg > 0) {
      CMat R = background_covariance(state, f);
      Eigen::PartialPivLU<CMat> lu(R);
      if (lu.rcond() < 1e-12) {
        R += eps_c * CMat::Identity(n_bg, n_bg);
        lu.compute(R);
      }
      double log_det = 0.0;
      for (int i = 0; i < n_bg; ++i) {
        log_det += std::log(std::abs(lu.matrixLU()(i, i)));
      }
      if (!std::isfinite(log_det)) {
        throw NumericDegeneracyError("degenerate background covariance", f);
      }
      value += N * log_det + static_cast<double>(N) * n_bg;
    }
  }
  value += (F * r.array().log() + source_sq_norms.array() / r.array()).sum();
  return value;
}

}  // namespace overiva
