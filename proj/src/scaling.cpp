#include "overiva/scaling.hpp"

#include <algorithm>

namespace overiva {

SpectrogramTensor projection_back(const SpectrogramTensor& Y,
                                  const SpectrogramTensor& X, double floor) {
  if (Y.bins() != X.bins() || Y.frames() != X.frames() || X.channels() < 1) {
    throw InvalidInputError("separated/input shapes do not match");
  }
  SpectrogramTensor out = Y;
  for (int f = 0; f < Y.bins(); ++f) {
    const auto reference = X.bin(f).row(0);
    for (int k = 0; k < Y.channels(); ++k) {
      const auto y = Y.bin(f).row(k);
      const Complex num = (reference.cwiseProduct(y.conjugate())).sum();
      const double den = std::max(y.squaredNorm(), floor);
      out.bin(f).row(k) = (num / den) * y;
    }
  }
  return out;
}

}  // namespace overiva
