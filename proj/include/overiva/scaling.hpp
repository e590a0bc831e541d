#pragma once

#include "overiva/types.hpp"

namespace overiva {

/// Resolve the per-source per-frequency scale ambiguity by least-squares
/// fitting each separated source to the first microphone:
///   c_{kf} = sum_n x_{0fn} conj(y_{kfn}) / max(sum_n |y_{kfn}|^2, floor)
/// and y <- c_{kf} y. Idempotent; invariant to per-source rescaling of Y.
SpectrogramTensor projection_back(const SpectrogramTensor& Y,
                                  const SpectrogramTensor& X,
                                  double floor = 1e-10);

}  // namespace overiva
