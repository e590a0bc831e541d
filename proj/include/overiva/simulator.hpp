#pragma once

#include <cstdint>
#include <utility>

#include "overiva/types.hpp"

namespace overiva {

enum class SourceKind { kLaplacianNoise, kModulatedNoise, kWavFiles };

/// Description of a synthetic convolutive mixture. Targets and interferers
/// are convolved with independent random exponentially-decaying FIR filters;
/// interferer and sensor-noise gains are solved from the target SNR/SINR:
///   SNR  = (1/K) sum_k sigma_k^2 / sigma_n^2
///   SINR = sum_k sigma_k^2 / (Q sigma_i^2 + sigma_n^2)
/// with target variances fixed to sigma_k^2 = 1 at the reference microphone.
struct MixtureSpec {
  int n_mics = 2;
  int n_targets = 1;
  int n_interferers = 0;
  int filter_length = 64;
  double target_snr_db = 60.0;
  double target_sinr_db = 10.0;
  SourceKind source_kind = SourceKind::kModulatedNoise;
  std::uint64_t seed = 0;
  double duration_s = 20.0;
  double sample_rate = 16000.0;
  // Used when source_kind == kWavFiles: targets first, then interferers.
  std::vector<RVec> wav_sources;
};

struct GroundTruth {
  std::vector<RVec> source_images_ref;  // clean target images at mic 0
  std::vector<RMat> mixing_filters;     // per target: n_mics x filter_length
  double realized_snr_db = 0.0;
  double realized_sinr_db = 0.0;
  // Full decomposition, mix = sum_k source_images[k] + background:
  std::vector<RMat> source_images;  // per target: n_mics x T
  RMat background;                  // interferers + sensor noise, n_mics x T
  std::vector<RVec> sources;        // scaled dry target signals
};

struct GainPlan {
  double noise_var = 0.0;       // sigma_n^2
  double interferer_var = 0.0;  // sigma_i^2 (0 when n_interferers == 0)
};

/// Solve sigma_n^2 and sigma_i^2 from the SNR/SINR definitions above.
/// With no interferers the SINR constraint is dropped and only the SNR
/// fixes the noise gain. Throws InvalidInputError on infeasible targets.
GainPlan solve_gain_plan(const MixtureSpec& spec);

/// Generate the mixture and its ground truth. Deterministic in (spec, seed).
std::pair<AudioBuffer, GroundTruth> generate_mixture(const MixtureSpec& spec);

}  // namespace overiva
