#include "overiva/simulator.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace overiva {

namespace {

constexpr double kTinyPower = 1e-300;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

double mean_power(const Eigen::Ref<const RVec>& x) {
  return x.squaredNorm() / static_cast<double>(x.size());
}

// i.i.d. unit-variance Laplacian by inverse CDF.
RVec laplacian_source(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  RVec out(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double u = uniform(rng) - 0.5;
    out[t] = -std::copysign(1.0, u) * std::log(1.0 - 2.0 * std::abs(u)) /
             std::numbers::sqrt2;
  }
  return out;
}

// White Gaussian noise under a slowly varying log-normal envelope; the
// envelope is a one-pole lowpass of white noise (cutoff ~4 Hz), normalized
// to unit standard deviation before exponentiation.
RVec modulated_source(std::mt19937_64& rng, Eigen::Index n,
                      double sample_rate) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double pole = std::exp(-2.0 * std::numbers::pi * 4.0 / sample_rate);
  RVec envelope(n);
  double acc = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    acc = pole * acc + (1.0 - pole) * gauss(rng);
    envelope[t] = acc;
  }
  const double mean = envelope.mean();
  const double sd = std::sqrt(
      (envelope.array() - mean).square().sum() / static_cast<double>(n));
  envelope = ((envelope.array() - mean) / std::max(sd, 1e-12)).exp() * 1.2;
  RVec out(n);
  for (Eigen::Index t = 0; t < n; ++t) out[t] = envelope[t] * gauss(rng);
  return out;
}

// Random FIR decaying to exp(-3) over filter_length taps.
RVec decaying_filter(std::mt19937_64& rng, int taps) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  RVec h(taps);
  for (int t = 0; t < taps; ++t) {
    h[t] = gauss(rng) * std::exp(-3.0 * t / taps);
  }
  return h;
}

RVec convolve_same(const Eigen::Ref<const RVec>& x,
                   const Eigen::Ref<const RVec>& h) {
  const Eigen::Index T = x.size();
  RVec y = RVec::Zero(T);
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    if (h[i] != 0.0) y.tail(T - i) += h[i] * x.head(T - i);
  }
  return y;
}

void validate(const MixtureSpec& spec) {
  if (spec.n_mics < spec.n_targets || spec.n_targets < 1) {
    throw InvalidInputError("need n_mics >= n_targets >= 1");
  }
  if (spec.n_interferers < 0) throw InvalidInputError("n_interferers < 0");
  if (spec.filter_length < 1) throw InvalidInputError("filter_length < 1");
  if (spec.n_interferers > 0 && spec.target_snr_db < spec.target_sinr_db) {
    throw InvalidInputError("need SNR >= SINR when interferers are present");
  }
  if (spec.source_kind != SourceKind::kWavFiles) {
    if (spec.duration_s <= 0.0 || spec.sample_rate <= 0.0) {
      throw InvalidInputError("duration and sample_rate must be positive");
    }
  }
}

}  // namespace

GainPlan solve_gain_plan(const MixtureSpec& spec) {
  validate(spec);
  const double K = spec.n_targets;  // sum of unit target variances
  GainPlan plan;
  plan.noise_var = 1.0 / db_to_linear(spec.target_snr_db);  // (1/K)*K / SNR
  if (spec.n_interferers > 0) {
    const double denom_power = K / db_to_linear(spec.target_sinr_db);
    plan.interferer_var =
        (denom_power - plan.noise_var) / spec.n_interferers;
    if (plan.interferer_var < 0.0) {
      throw InvalidInputError("SNR/SINR targets are infeasible: interferer "
                              "variance would be negative");
    }
  }
  return plan;
}

std::pair<AudioBuffer, GroundTruth> generate_mixture(const MixtureSpec& spec) {
  validate(spec);
  const GainPlan plan = solve_gain_plan(spec);
  const int M = spec.n_mics;
  const int K = spec.n_targets;
  const int Q = spec.n_interferers;

  Eigen::Index T = 0;
  if (spec.source_kind == SourceKind::kWavFiles) {
    if (static_cast<int>(spec.wav_sources.size()) < K + Q) {
      throw InvalidInputError("need " + std::to_string(K + Q) +
                              " source signals, got " +
                              std::to_string(spec.wav_sources.size()));
    }
    T = spec.wav_sources.front().size();
    for (const RVec& s : spec.wav_sources) T = std::min(T, s.size());
    if (T < spec.filter_length) {
      throw InvalidInputError("source signals shorter than the mixing filter");
    }
  } else {
    T = static_cast<Eigen::Index>(spec.duration_s * spec.sample_rate);
    if (T < spec.filter_length) {
      throw InvalidInputError("duration shorter than the mixing filter");
    }
  }

  std::mt19937_64 rng(spec.seed);
  AudioBuffer mix;
  mix.sample_rate = spec.sample_rate;
  mix.samples = RMat::Zero(M, T);

  GroundTruth truth;
  truth.background = RMat::Zero(M, T);
  double interferer_power = 0.0;  // sum of per-interferer powers at mic 0

  // Draw order is fixed: per source (dry signal, then M filters), then noise.
  for (int k = 0; k < K + Q; ++k) {
    RVec dry;
    switch (spec.source_kind) {
      case SourceKind::kLaplacianNoise:
        dry = laplacian_source(rng, T);
        break;
      case SourceKind::kModulatedNoise:
        dry = modulated_source(rng, T, spec.sample_rate);
        break;
      case SourceKind::kWavFiles:
        dry = spec.wav_sources[static_cast<size_t>(k)].head(T);
        break;
    }
    RMat filters(M, spec.filter_length);
    RMat images(M, T);
    for (int m = 0; m < M; ++m) {
      filters.row(m) = decaying_filter(rng, spec.filter_length).transpose();
      images.row(m) = convolve_same(dry, filters.row(m).transpose());
    }
    const double ref_power = std::max(mean_power(images.row(0)), kTinyPower);
    const double target_var = k < K ? 1.0 : plan.interferer_var;
    const double gain = std::sqrt(target_var / ref_power);
    images *= gain;
    mix.samples += images;
    if (k < K) {
      truth.sources.push_back(gain * dry);
      truth.mixing_filters.push_back(filters);
      truth.source_images_ref.push_back(images.row(0));
      truth.source_images.push_back(std::move(images));
    } else {
      interferer_power += mean_power(images.row(0));
      truth.background += images;
    }
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  RMat noise(M, T);
  for (int m = 0; m < M; ++m) {
    for (Eigen::Index t = 0; t < T; ++t) noise(m, t) = gauss(rng);
  }
  noise *= std::sqrt(plan.noise_var /
                     std::max(mean_power(noise.row(0)), kTinyPower));
  mix.samples += noise;
  truth.background += noise;

  // Realized ratios from the generated per-component powers at mic 0,
  // mirroring the definitions (variances of components, not of their sum).
  double target_power = 0.0;
  for (const RVec& image : truth.source_images_ref) {
    target_power += mean_power(image);
  }
  const double noise_power = mean_power(noise.row(0));
  truth.realized_snr_db = linear_to_db(target_power / K / noise_power);
  truth.realized_sinr_db =
      linear_to_db(target_power / (interferer_power + noise_power));
  return {std::move(mix), std::move(truth)};
}

}  // namespace overiva
