// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit code is the failure count.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../unit/helpers.hpp"
#include "overiva/auxiva.hpp"
#include "overiva/metrics.hpp"
#include "overiva/overiva.hpp"
#include "overiva/scaling.hpp"
#include "overiva/simulator.hpp"
#include "overiva/stft.hpp"

using namespace overiva;
using namespace overiva::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// Shared monotonicity-suite runs for criteria 1, 2 and 9: M=4, K=2, F=33,
// N=128, Gauss model, 100 sweeps, 20 seeds, objective recorded after every
// update. The activation floor matches the mixtures' per-frame noise floor
// so that the 1e-10 normalization check stays resolvable in doubles.
struct MonotonicityRuns {
  double worst_increase = 0.0;       // relative, over all updates
  double worst_orthogonality = 0.0;  // over all sweeps and bins
  double worst_normalization = 0.0;  // over all row updates
  double runtime_s = 0.0;
  bool ran = false;
};

const MonotonicityRuns& monotonicity_runs() {
  static MonotonicityRuns runs = [] {
    MonotonicityRuns r;
    const auto start = std::chrono::steady_clock::now();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto fx = frequency_domain_mixture(4, 2, 33, 128, 0.3, seed);
      SeparationConfig cfg;
      cfg.n_src = 2;
      cfg.max_iters = 100;
      cfg.activation_floor = 1e-3;
      cfg.record_update_trace = true;
      const SeparationResult res = overiva_run(fx.X, cfg);
      for (size_t i = 1; i < res.update_trace.size(); ++i) {
        const double rel =
            (res.update_trace[i] - res.update_trace[i - 1]) /
            std::abs(res.update_trace[i - 1]);
        r.worst_increase = std::max(r.worst_increase, rel);
      }
      for (const IterationDiagnostics& d : res.trace) {
        r.worst_orthogonality =
            std::max(r.worst_orthogonality, d.max_orthogonality_residual);
        r.worst_normalization =
            std::max(r.worst_normalization, d.max_normalization_error);
      }
    }
    r.runtime_s = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start).count();
    r.ran = true;
    return r;
  }();
  return runs;
}

Outcome criterion_monotonicity() {
  const MonotonicityRuns& r = monotonicity_runs();
  Outcome out;
  out.pass = r.worst_increase <= 1e-6 && r.runtime_s < 30.0;
  out.detail = "worst relative increase " + fmt(r.worst_increase) +
               " (tol 1e-6), runtime " + fmt(r.runtime_s) + " s (< 30 s)";
  return out;
}

Outcome criterion_orthogonality() {
  const MonotonicityRuns& r = monotonicity_runs();
  Outcome out;
  out.pass = r.worst_orthogonality <= 1e-8;
  out.detail =
      "worst residual " + fmt(r.worst_orthogonality) + " (tol 1e-8)";
  return out;
}

Outcome criterion_trace_identity() {
  std::mt19937_64 rng(404);
  double worst = 0.0;
  const int combos[5][2] = {{4, 2}, {5, 2}, {5, 3}, {3, 1}, {6, 4}};
  for (int trial = 0; trial < 10; ++trial) {
    const int M = combos[trial % 5][0];
    const int K = combos[trial % 5][1];
    const int F = 6, N = 48;
    SpectrogramTensor X(M, F, N, 2 * (F - 1), F - 1);
    for (int f = 0; f < F; ++f) X.bin(f) = random_cmatrix(rng, M, N);
    DemixingState state = DemixingState::identity_init(X, K);
    for (int f = 0; f < F; ++f) {
      state.W[static_cast<size_t>(f)] = random_cmatrix(rng, K, M);
      state.J[static_cast<size_t>(f)] = random_cmatrix(rng, M - K, K);
    }
    const SpectrogramTensor Z = background_demix(state, X);
    for (int f = 0; f < F; ++f) {
      const CMat U = state.background(f);
      const CMat R = U * state.C[static_cast<size_t>(f)] * U.adjoint();
      const double quad =
          Z.bin(f).cwiseProduct(R.partialPivLu().solve(Z.bin(f)).conjugate())
              .real().sum();
      const double expected = static_cast<double>(N) * (M - K);
      worst = std::max(worst, std::abs(quad - expected) / expected);
    }
  }
  Outcome out;
  out.pass = worst <= 1e-8;
  out.detail = "worst relative deviation from N(M-K): " + fmt(worst) +
               " (tol 1e-8, 10 states)";
  return out;
}

Outcome criterion_determined_equivalence() {
  const auto fx = frequency_domain_mixture(3, 3, 16, 96, 0.2, 777);
  SeparationConfig cfg;
  cfg.n_src = 3;
  cfg.max_iters = 50;
  std::vector<std::vector<CMat>> a, b;
  (void)overiva_run(fx.X, cfg, [&](int, const DemixingState& s,
                                   const SpectrogramTensor&) {
    a.push_back(s.W);
  });
  (void)auxiva_run(fx.X, cfg, [&](int, const DemixingState& s,
                                  const SpectrogramTensor&) {
    b.push_back(s.W);
  });
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    for (size_t f = 0; f < a[i].size(); ++f) {
      worst = std::max(worst, (a[i][f] - b[i][f]).cwiseAbs().maxCoeff());
    }
  }
  Outcome out;
  out.pass = a.size() == 50 && worst <= 1e-10;
  out.detail = "max elementwise gap over 50 sweeps: " + fmt(worst) +
               " (tol 1e-10)";
  return out;
}

Outcome criterion_stft_round_trip() {
  std::mt19937_64 rng(31337);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (const int frame : {512, 4096}) {
    AudioBuffer audio;
    audio.sample_rate = 16000.0;
    audio.samples = RMat::NullaryExpr(2, 8 * frame, [&] { return g(rng); });
    const AudioBuffer back = stft::synthesize(stft::analyze(audio, frame));
    const Eigen::Index keep = back.length() - 2 * frame;
    const RMat x = audio.samples.middleCols(frame, keep);
    const RMat y = back.samples.middleCols(frame, keep);
    worst = std::max(worst, (x - y).norm() / x.norm());
  }
  Outcome out;
  out.pass = worst <= 1e-10;
  out.detail = "worst interior relative error " + fmt(worst) +
               " (tol 1e-10, frames 512 and 4096)";
  return out;
}

// One simulated separation run; returns per-source SI-SDR improvements.
std::vector<double> separation_improvements(int n_mics, int n_targets,
                                            std::uint64_t seed,
                                            double duration_s) {
  MixtureSpec spec;
  spec.n_mics = n_mics;
  spec.n_targets = n_targets;
  spec.n_interferers = 5;
  spec.filter_length = 64;
  spec.target_snr_db = 60.0;
  spec.target_sinr_db = 10.0;
  spec.source_kind = SourceKind::kModulatedNoise;
  spec.duration_s = duration_s;
  spec.sample_rate = 8000.0;
  spec.seed = seed;
  const auto [mix, truth] = generate_mixture(spec);

  const int frame = 512;
  const SpectrogramTensor X = stft::analyze(mix, frame);
  SeparationConfig cfg;
  cfg.n_src = n_targets;
  cfg.max_iters = 100;
  const SeparationResult run = overiva_run(X, cfg);
  const AudioBuffer outs =
      stft::synthesize(projection_back(run.sources, X));

  const Eigen::Index keep = outs.length() - 2 * frame;
  std::vector<RVec> separated, references;
  for (int k = 0; k < n_targets; ++k) {
    separated.push_back(outs.samples.row(k).segment(frame, keep));
    references.push_back(truth.source_images_ref[static_cast<size_t>(k)]
                             .segment(frame, keep));
  }
  const RVec mix_ref = mix.samples.row(0).segment(frame, keep);
  return sdr_improvement(separated, mix_ref, references).per_source_db;
}

Outcome criterion_separation_quality() {
  std::vector<double> two_source, one_source;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (const double imp : separation_improvements(3, 2, seed, 20.0)) {
      two_source.push_back(imp);
    }
    one_source.push_back(
        separation_improvements(4, 1, 100 + seed, 20.0).front());
  }
  const double med2 = median(two_source);
  const double med1 = median(one_source);
  Outcome out;
  out.pass = med2 >= 5.0 && med1 >= 8.0;
  out.detail = "median SI-SDR improvement: K=2,M=3: " + fmt(med2) +
               " dB (>= 5), K=1,M=4: " + fmt(med1) + " dB (>= 8), 10 seeds";
  return out;
}

Outcome criterion_overdetermined_trend() {
  std::vector<double> determined, overdetermined;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (const double imp : separation_improvements(2, 2, 200 + seed, 10.0)) {
      determined.push_back(imp);
    }
    for (const double imp : separation_improvements(3, 2, 200 + seed, 10.0)) {
      overdetermined.push_back(imp);
    }
  }
  const double med_m2 = median(determined);
  const double med_m3 = median(overdetermined);
  Outcome out;
  out.pass = med_m3 >= med_m2 + 1.0;
  out.detail = "median improvement M=2: " + fmt(med_m2) + " dB, M=3: " +
               fmt(med_m3) + " dB, gap " + fmt(med_m3 - med_m2) +
               " dB (>= 1, 20 seeds)";
  return out;
}

Outcome criterion_runtime_ratio() {
  Outcome out;
  out.pass = true;
  for (const int M : {4, 8}) {
    const int K = 2, F = 64, N = 256;  // N >= 4M at both sizes
    std::vector<double> over_s, aux_s;
    for (std::uint64_t run = 0; run < 10; ++run) {
      const auto fx =
          frequency_domain_mixture(M, K, F, N, 0.3, 9000 + run);
      SeparationConfig cfg;
      cfg.n_src = K;
      cfg.max_iters = 20;
      auto t0 = std::chrono::steady_clock::now();
      (void)overiva_run(fx.X, cfg);
      auto t1 = std::chrono::steady_clock::now();
      (void)auxiva_run(fx.X, cfg);
      auto t2 = std::chrono::steady_clock::now();
      over_s.push_back(std::chrono::duration<double>(t1 - t0).count());
      aux_s.push_back(std::chrono::duration<double>(t2 - t1).count());
    }
    const double ratio = median(over_s) / median(aux_s);
    const double predicted = static_cast<double>(K) / M;
    const bool in_band =
        ratio >= 0.7 * predicted && ratio <= 1.3 * predicted;
    out.pass = out.pass && in_band;
    out.detail += (out.detail.empty() ? "" : "; ");
    out.detail += "M=" + std::to_string(M) + ": ratio " + fmt(ratio) +
                  " vs K/M=" + fmt(predicted) +
                  (in_band ? " (in [0.7,1.3]x)" : " (OUT OF BAND)");
  }
  return out;
}

Outcome criterion_normalization() {
  const MonotonicityRuns& r = monotonicity_runs();
  Outcome out;
  out.pass = r.worst_normalization <= 1e-10;
  out.detail =
      "worst |w^H V w - 1| " + fmt(r.worst_normalization) + " (tol 1e-10)";
  return out;
}

Outcome criterion_laplace_surrogate() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto fx = frequency_domain_mixture(4, 2, 33, 128, 0.3, 500 + seed);
    SeparationConfig cfg;
    cfg.n_src = 2;
    cfg.model = SourceModel::kLaplace;
    cfg.max_iters = 100;
    cfg.activation_floor = 1e-3;
    const SeparationResult res = overiva_run(fx.X, cfg);
    for (size_t i = 1; i < res.trace.size(); ++i) {
      const double rel =
          (res.trace[i].objective - res.trace[i - 1].objective) /
          std::abs(res.trace[i - 1].objective);
      worst = std::max(worst, rel);
    }
  }
  Outcome out;
  out.pass = worst <= 1e-6;
  out.detail = "worst per-sweep relative increase " + fmt(worst) +
               " (tol 1e-6, 20 seeds)";
  return out;
}

Outcome criterion_metric_sanity() {
  std::mt19937_64 rng(606);
  std::normal_distribution<double> g(0.0, 1.0);
  const RVec ref = RVec::NullaryExpr(512, [&] { return g(rng); });
  const RVec est = 0.7 * ref + RVec::NullaryExpr(512, [&] { return g(rng); });

  const double base = si_sdr(est, ref);
  const bool scale_ok = si_sdr(8.0 * est, ref) == base &&
                        si_sdr(0.0625 * est, ref) == base &&
                        si_sdr(-4.0 * est, ref) == base &&
                        std::abs(si_sdr(3.7 * est, ref) - base) < 1e-12;
  const double tap_gap = std::abs(filtered_sdr(est, ref, 1) - base);

  // permutation matching vs a test-side exhaustive search
  bool perm_ok = true;
  for (const int K : {3, 4}) {
    std::vector<RVec> seps, refs;
    for (int k = 0; k < K; ++k) {
      refs.push_back(RVec::NullaryExpr(256, [&] { return g(rng); }));
    }
    for (int k = 0; k < K; ++k) {
      seps.push_back(refs[static_cast<size_t>((k + 1) % K)] +
                     0.4 * RVec::NullaryExpr(256, [&] { return g(rng); }));
    }
    RVec mixture = RVec::Zero(256);
    for (const RVec& r2 : refs) mixture += r2;

    const SdrImprovement got = sdr_improvement(seps, mixture, refs);
    std::vector<int> perm(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k) perm[static_cast<size_t>(k)] = k;
    double best = -1e300;
    std::vector<int> best_perm = perm;
    do {
      double total = 0.0;
      for (int j = 0; j < K; ++j) {
        total += si_sdr(seps[static_cast<size_t>(perm[static_cast<size_t>(j)])],
                        refs[static_cast<size_t>(j)]);
      }
      if (total > best) {
        best = total;
        best_perm = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    perm_ok = perm_ok && got.assignment == best_perm;
  }

  Outcome out;
  out.pass = scale_ok && tap_gap < 1e-9 && perm_ok;
  out.detail = std::string("scale invariance ") +
               (scale_ok ? "exact" : "VIOLATED") + ", |filtered_sdr(1) - si_sdr| " +
               fmt(tap_gap) + " dB (tol 1e-9), permutation matching " +
               (perm_ok ? "matches exhaustive search" : "MISMATCH");
  return out;
}

}  // namespace

int main() {
  const struct {
    int number;
    const char* name;
    std::function<Outcome()> run;
  } criteria[] = {
      {1, "Gauss objective non-increasing at every update",
       criterion_monotonicity},
      {2, "orthogonality residual after every background update",
       criterion_orthogonality},
      {3, "background quadratic trace identity", criterion_trace_identity},
      {4, "determined equivalence of OverIVA and AuxIVA",
       criterion_determined_equivalence},
      {5, "STFT interior round trip", criterion_stft_round_trip},
      {6, "separation quality on synthetic mixtures",
       criterion_separation_quality},
      {7, "overdetermined benefit trend", criterion_overdetermined_trend},
      {8, "runtime ratio versus full AuxIVA", criterion_runtime_ratio},
      {9, "row normalization after every update", criterion_normalization},
      {10, "Laplace surrogate non-increasing per sweep",
       criterion_laplace_surrogate},
      {11, "metric sanity", criterion_metric_sanity},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    if (!outcome.pass) ++failures;
    std::printf("[%s] criterion %2d: %s — %s\n",
                outcome.pass ? "PASS" : "FAIL", criterion.number,
                criterion.name, outcome.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
