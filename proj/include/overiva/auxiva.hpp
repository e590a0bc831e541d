#pragma once

#include "overiva/overiva.hpp"

namespace overiva {

/// Determined IVA on all channels: iterative-projection updates over every
/// row of the square W_f. Ignores cfg.n_src; the returned state always has
/// n_src == channels. The config's model, iteration and floor settings apply.
SeparationResult auxiva_run(const SpectrogramTensor& X,
                            const SeparationConfig& cfg,
                            const SweepObserver& observer = {});

struct PowerSelection {
  SpectrogramTensor selected;  // n_keep x bins x frames
  std::vector<int> indices;    // chosen channels, ascending
};

/// Keep the n_keep outputs with the largest total power sum_{fn} |y|^2.
/// Ties break toward the lower index.
PowerSelection select_by_power(const SpectrogramTensor& Y, int n_keep);

struct PcaReduction {
  SpectrogramTensor reduced;      // n_keep x bins x frames
  std::vector<CMat> projections;  // per bin: n_keep x channels
};

/// Project each frequency onto the n_keep leading eigenvectors of its input
/// covariance (descending eigenvalues; each eigenvector phase-normalized so
/// its first nonzero component is real positive).
PcaReduction pca_reduce(const SpectrogramTensor& X, int n_keep);

}  // namespace overiva
