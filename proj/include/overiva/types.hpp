#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "overiva/errors.hpp"

namespace overiva {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

/// Multichannel time-domain audio, one row per channel.
struct AudioBuffer {
  RMat samples;  // channels x time samples
  double sample_rate = 16000.0;

  int channels() const { return static_cast<int>(samples.rows()); }
  Eigen::Index length() const { return samples.cols(); }
};

/// Complex time-frequency data x_{mfn}, dims channels x bins x frames.
/// Stored per frequency bin as a channels x frames matrix, the layout every
/// per-frequency solver step operates on directly.
class SpectrogramTensor {
 public:
  SpectrogramTensor() = default;
  SpectrogramTensor(int channels, int bins, int frames, int frame_size,
                    int hop, double sample_rate = 16000.0)
      : bins_(static_cast<size_t>(bins), CMat::Zero(channels, frames)),
        channels_(channels),
        frames_(frames),
        frame_size_(frame_size),
        hop_(hop),
        sample_rate_(sample_rate) {}

  int channels() const { return channels_; }
  int bins() const { return static_cast<int>(bins_.size()); }
  int frames() const { return frames_; }
  int frame_size() const { return frame_size_; }
  int hop() const { return hop_; }
  double sample_rate() const { return sample_rate_; }

  CMat& bin(int f) { return bins_[static_cast<size_t>(f)]; }
  const CMat& bin(int f) const { return bins_[static_cast<size_t>(f)]; }

  Complex at(int channel, int f, int frame) const {
    return bins_[static_cast<size_t>(f)](channel, frame);
  }

  /// New tensor holding channels [0, count) of this one.
  SpectrogramTensor top_channels(int count) const {
    SpectrogramTensor out(count, bins(), frames_, frame_size_, hop_,
                          sample_rate_);
    for (int f = 0; f < bins(); ++f) out.bin(f) = bin(f).topRows(count);
    return out;
  }

 private:
  std::vector<CMat> bins_;
  int channels_ = 0;
  int frames_ = 0;
  int frame_size_ = 0;
  int hop_ = 0;
  double sample_rate_ = 16000.0;
};

enum class SourceModel { kGauss, kLaplace };

/// Nonnegative per-source per-frame variance surrogates r_{kn}.
/// Every entry is kept at or above the configured activation floor.
struct SourceActivations {
  RMat r;  // n_src x frames
};

struct SeparationConfig {
  int n_src = 1;
  SourceModel model = SourceModel::kGauss;
  int max_iters = 100;
  double activation_floor = 1e-10;      // floor on r_{kn} denominators
  double solve_regularization = 1e-10;  // ridge used on near-singular solves
  double convergence_tol = 0.0;  // early stop on max |dW| per sweep; 0 = off
  bool record_update_trace = false;  // objective after every single update
};

}  // namespace overiva
