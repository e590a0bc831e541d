#pragma once

#include "overiva/types.hpp"

namespace overiva {

inline constexpr double kSdrCapDb = 100.0;

/// Stand-in for the 512-tap allowed-distortion convention of full bss_eval.
inline constexpr int kDefaultDistortionTaps = 512;

/// Scale-invariant SDR: project the estimate onto the reference with a
/// single scalar, then 10 log10(||proj||^2 / ||estimate - proj||^2),
/// capped at +-100 dB. Throws InvalidInputError on a zero reference.
double si_sdr(const Eigen::Ref<const RVec>& estimate,
              const Eigen::Ref<const RVec>& reference);

/// SDR after least-squares fitting an L-tap filter from the reference to the
/// estimate. Rank-deficient normal equations are ridge-regularized with
/// eps_c, never an error. filter_taps == 1 reduces to si_sdr.
double filtered_sdr(const Eigen::Ref<const RVec>& estimate,
                    const Eigen::Ref<const RVec>& reference,
                    int filter_taps = kDefaultDistortionTaps,
                    double eps_c = 1e-10);

struct SdrImprovement {
  std::vector<double> per_source_db;  // indexed by reference
  std::vector<int> assignment;        // separated index matched to each ref
};

/// Best-permutation SI-SDR improvement over the mixture reference channel.
/// Evaluates all K! assignments and keeps the one maximizing the mean SDR;
/// refuses K > 8.
SdrImprovement sdr_improvement(const std::vector<RVec>& separated,
                               const RVec& mixture_ref,
                               const std::vector<RVec>& references);

}  // namespace overiva
