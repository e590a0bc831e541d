#pragma once

#include "overiva/types.hpp"

namespace overiva::stft {

/// Periodic Hann window of the given length.
RVec hann_window(int size);

/// Canonical dual of an analysis window for overlap-add at the given hop:
/// dual[i] = window[i] / sum_m window[i - m*hop]^2. Overlap-adding
/// dual-weighted inverse transforms of window-weighted frames reconstructs
/// the input exactly wherever frame coverage is complete.
RVec dual_window(const RVec& window, int hop);

/// Hann-windowed short-time Fourier transform at half overlap. Keeps the
/// nonnegative bins only (frame_size/2 + 1); frames that would run past the
/// end of the signal are dropped.
SpectrogramTensor analyze(const AudioBuffer& audio, int frame_size);

/// Overlap-add inverse of analyze using the numerically computed dual
/// window. Output covers the analyzed span, (frames-1)*hop + frame_size
/// samples; the first and last frame_size samples have incomplete overlap
/// coverage and are not exact.
AudioBuffer synthesize(const SpectrogramTensor& spec);

}  // namespace overiva::stft
