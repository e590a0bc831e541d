#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "overiva/types.hpp"

namespace overiva::testing {

inline Complex random_cnormal(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  return {g(rng), g(rng)};
}

inline CMat random_cmatrix(std::mt19937_64& rng, int rows, int cols) {
  CMat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = random_cnormal(rng);
  }
  return m;
}

inline CMat random_psd(std::mt19937_64& rng, int dim) {
  const CMat a = random_cmatrix(rng, dim, 2 * dim);
  CMat c = a * a.adjoint() / (2.0 * dim);
  return 0.5 * (c + c.adjoint());
}

struct MixtureFixture {
  SpectrogramTensor X;            // M x F x N
  std::vector<CMat> mixing;       // per bin: M x K
};

/// Frequency-domain mixture of K envelope-modulated complex Gaussian sources
/// through per-bin random mixing, plus white background noise. When
/// instantaneous is set, the same mixing matrix is used at every bin.
/// envelope_log_sd controls the per-frame variance spread of the sources;
/// 0.5 keeps the weighted covariances well conditioned.
inline MixtureFixture frequency_domain_mixture(int n_chan, int n_src,
                                               int n_bins, int n_frames,
                                               double noise_sd,
                                               std::uint64_t seed,
                                               bool instantaneous = false,
                                               double envelope_log_sd = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);

  RMat envelope(n_src, n_frames);
  for (int k = 0; k < n_src; ++k) {
    for (int n = 0; n < n_frames; ++n) {
      envelope(k, n) = std::exp(envelope_log_sd * g(rng));
    }
  }

  MixtureFixture fx;
  fx.X = SpectrogramTensor(n_chan, n_bins, n_frames, 2 * (n_bins - 1),
                           n_bins - 1);
  const CMat shared = random_cmatrix(rng, n_chan, n_src);
  for (int f = 0; f < n_bins; ++f) {
    const CMat A =
        instantaneous ? shared : random_cmatrix(rng, n_chan, n_src);
    fx.mixing.push_back(A);
    CMat S(n_src, n_frames);
    for (int k = 0; k < n_src; ++k) {
      for (int n = 0; n < n_frames; ++n) {
        S(k, n) = envelope(k, n) * random_cnormal(rng);
      }
    }
    fx.X.bin(f) = A * S;
    if (noise_sd > 0.0) {
      fx.X.bin(f) += noise_sd * random_cmatrix(rng, n_chan, n_frames);
    }
  }
  return fx;
}

}  // namespace overiva::testing
