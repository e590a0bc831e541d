#include "overiva/stft.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>

namespace overiva::stft {

namespace {

// RAII around the FFTW buffers and plans for one frame size.
class FftPair {
 public:
  explicit FftPair(int frame_size)
      : frame_size_(frame_size), n_bins_(frame_size / 2 + 1) {
    real_ = fftw_alloc_real(static_cast<size_t>(frame_size_));
    spec_ = fftw_alloc_complex(static_cast<size_t>(n_bins_));
    forward_ = fftw_plan_dft_r2c_1d(frame_size_, real_, spec_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(frame_size_, spec_, real_, FFTW_ESTIMATE);
  }

  ~FftPair() {
    fftw_destroy_plan(inverse_);
    fftw_destroy_plan(forward_);
    fftw_free(spec_);
    fftw_free(real_);
  }

  FftPair(const FftPair&) = delete;
  FftPair& operator=(const FftPair&) = delete;

  double* real() { return real_; }
  Complex* spec() { return reinterpret_cast<Complex*>(spec_); }
  void forward() { fftw_execute(forward_); }
  void inverse() { fftw_execute(inverse_); }  // unnormalized, scale 1/size
  int n_bins() const { return n_bins_; }

 private:
  int frame_size_;
  int n_bins_;
  double* real_;
  fftw_complex* spec_;
  fftw_plan forward_;
  fftw_plan inverse_;
};

void check_frame_size(int frame_size) {
  if (frame_size < 4 || frame_size % 2 != 0) {
    throw InvalidInputError("frame_size must be even and >= 4, got " +
                            std::to_string(frame_size));
  }
}

}  // namespace

RVec hann_window(int size) {
  RVec w(size);
  for (int i = 0; i < size; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / size);
  }
  return w;
}

RVec dual_window(const RVec& window, int hop) {
  const int size = static_cast<int>(window.size());
  if (hop < 1 || size % hop != 0) {
    throw InvalidInputError("hop must divide the window length");
  }
  // sum_m window[i - m*hop]^2 is hop-periodic; accumulate one period.
  RVec denom = RVec::Zero(hop);
  for (int start = 0; start < size; start += hop) {
    denom += window.segment(start, hop).cwiseAbs2();
  }
  if ((denom.array() <= 0.0).any()) {
    throw InvalidInputError("window has no overlap coverage at this hop");
  }
  RVec dual(size);
  for (int i = 0; i < size; ++i) dual[i] = window[i] / denom[i % hop];
  return dual;
}

SpectrogramTensor analyze(const AudioBuffer& audio, int frame_size) {
  check_frame_size(frame_size);
  const Eigen::Index T = audio.length();
  if (audio.channels() < 1 || T < frame_size) {
    throw InvalidInputError("audio must have >= 1 channel and at least one "
                            "full frame of samples");
  }
  if (!audio.samples.allFinite()) {
    throw InvalidInputError("audio contains non-finite samples");
  }

  const int hop = frame_size / 2;
  const int n_frames =
      static_cast<int>((T - frame_size) / hop) + 1;
  const RVec window = hann_window(frame_size);

  FftPair fft(frame_size);
  SpectrogramTensor out(audio.channels(), fft.n_bins(), n_frames, frame_size,
                        hop, audio.sample_rate);
  for (int m = 0; m < audio.channels(); ++m) {
    for (int n = 0; n < n_frames; ++n) {
      const Eigen::Index start = static_cast<Eigen::Index>(n) * hop;
      Eigen::Map<RVec>(fft.real(), frame_size) =
          audio.samples.row(m).segment(start, frame_size).transpose()
              .cwiseProduct(window);
      fft.forward();
      for (int f = 0; f < fft.n_bins(); ++f) out.bin(f)(m, n) = fft.spec()[f];
    }
  }
  return out;
}

AudioBuffer synthesize(const SpectrogramTensor& spec) {
  const int frame_size = spec.frame_size();
  check_frame_size(frame_size);
  if (spec.hop() != frame_size / 2 ||
      spec.bins() != frame_size / 2 + 1 || spec.frames() < 1) {
    throw InvalidInputError("spectrogram frame_size/hop/bins are inconsistent");
  }

  const int hop = spec.hop();
  const int n_frames = spec.frames();
  const int n_chan = spec.channels();
  const Eigen::Index T =
      static_cast<Eigen::Index>(n_frames - 1) * hop + frame_size;
  const RVec dual = dual_window(hann_window(frame_size), hop);
  const double fft_scale = 1.0 / frame_size;

  FftPair fft(frame_size);
  AudioBuffer out;
  out.sample_rate = spec.sample_rate();
  out.samples = RMat::Zero(n_chan, T);
  for (int m = 0; m < n_chan; ++m) {
    for (int n = 0; n < n_frames; ++n) {
      for (int f = 0; f < spec.bins(); ++f) fft.spec()[f] = spec.at(m, f, n);
      fft.inverse();
      out.samples.row(m).segment(static_cast<Eigen::Index>(n) * hop,
                                 frame_size) +=
          Eigen::Map<RVec>(fft.real(), frame_size).transpose()
              .cwiseProduct(dual.transpose()) * fft_scale;
    }
  }
  return out;
}

}  // namespace overiva::stft
