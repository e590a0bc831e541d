#include "overiva/metrics.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace overiva {

namespace {

double ratio_db(double signal_energy, double residual_energy) {
  if (residual_energy <= 0.0) return kSdrCapDb;
  if (signal_energy <= 0.0) return -kSdrCapDb;
  return std::clamp(10.0 * std::log10(signal_energy / residual_energy),
                    -kSdrCapDb, kSdrCapDb);
}

}  // namespace

double si_sdr(const Eigen::Ref<const RVec>& estimate,
              const Eigen::Ref<const RVec>& reference) {
  if (estimate.size() != reference.size() || estimate.size() < 1) {
    throw InvalidInputError("signals must have equal nonzero length");
  }
  const double ref_energy = reference.squaredNorm();
  if (ref_energy <= 0.0) {
    throw InvalidInputError("reference signal is identically zero");
  }
  const double scale = reference.dot(estimate) / ref_energy;
  const double proj_energy = scale * scale * ref_energy;
  const double residual_energy = (estimate - scale * reference).squaredNorm();
  return ratio_db(proj_energy, residual_energy);
}

double filtered_sdr(const Eigen::Ref<const RVec>& estimate,
                    const Eigen::Ref<const RVec>& reference, int filter_taps,
                    double eps_c) {
  const Eigen::Index T = estimate.size();
  if (filter_taps < 1 || T != reference.size() || T <= filter_taps) {
    throw InvalidInputError("need length > filter_taps >= 1");
  }
  // Normal equations for the causal L-tap fit, reference zero-padded at t<0:
  //   R[i,j] = sum_t ref[t-i] ref[t-j],  p[i] = sum_t est[t] ref[t-i].
  const int L = filter_taps;
  RMat R(L, L);
  RVec p(L);
  for (int i = 0; i < L; ++i) {
    p[i] = estimate.tail(T - i).dot(reference.head(T - i));
    for (int j = i; j < L; ++j) {
      const int lag = j - i;
      R(i, j) = R(j, i) =
          reference.head(T - j).dot(reference.segment(lag, T - j));
    }
  }
  Eigen::LDLT<RMat> ldlt(R);
  RVec h = ldlt.solve(p);
  if (ldlt.info() != Eigen::Success || !h.allFinite()) {
    const double ridge = eps_c * std::max(R.trace() / L, 1.0);
    ldlt.compute(R + ridge * RMat::Identity(L, L));
    h = ldlt.solve(p);
  }
  RVec fitted = RVec::Zero(T);
  for (int i = 0; i < L; ++i) {
    if (h[i] != 0.0) fitted.tail(T - i) += h[i] * reference.head(T - i);
  }
  return ratio_db(fitted.squaredNorm(), (estimate - fitted).squaredNorm());
}

SdrImprovement sdr_improvement(const std::vector<RVec>& separated,
                               const RVec& mixture_ref,
                               const std::vector<RVec>& references) {
  const int K = static_cast<int>(references.size());
  if (static_cast<int>(separated.size()) != K || K < 1) {
    throw InvalidInputError("separated/reference counts do not match");
  }
  if (K > 8) {
    throw InvalidInputError("refusing permutation search over more than 8 "
                            "sources");
  }
  RMat sdr(K, K);  // sdr(i, j) = si_sdr(separated[i], references[j])
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < K; ++j) sdr(i, j) = si_sdr(separated[i], references[j]);
  }
  std::vector<int> perm(static_cast<size_t>(K));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_total = -1e300;
  do {
    double total = 0.0;
    for (int j = 0; j < K; ++j) total += sdr(perm[static_cast<size_t>(j)], j);
    if (total > best_total) {
      best_total = total;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  SdrImprovement out;
  out.assignment = best;
  out.per_source_db.resize(static_cast<size_t>(K));
  for (int j = 0; j < K; ++j) {
    out.per_source_db[static_cast<size_t>(j)] =
        sdr(best[static_cast<size_t>(j)], j) - si_sdr(mixture_ref, references[j]);
  }
  return out;
}

}  // namespace overiva
