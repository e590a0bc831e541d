#pragma once

#include <stdexcept>
#include <string>

namespace overiva {

// Violated precondition on user-supplied data: bad shapes, ranges, formats.
class InvalidInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A factorization or linear solve degenerated beyond what regularization can
// absorb. Carries the location in the (sweep, source, frequency) grid when
// known; -1 means "not applicable".
class NumericDegeneracyError : public std::runtime_error {
 public:
  NumericDegeneracyError(const std::string& message, int frequency,
                         int source = -1, int sweep = -1)
      : std::runtime_error(format(message, frequency, source, sweep)),
        message_(message),
        frequency_(frequency),
        source_(source),
        sweep_(sweep) {}

  /// Message without the location suffix, for rethrowing with more context.
  const std::string& message() const noexcept { return message_; }
  int frequency() const noexcept { return frequency_; }
  int source() const noexcept { return source_; }
  int sweep() const noexcept { return sweep_; }

 private:
  static std::string format(const std::string& message, int frequency,
                            int source, int sweep) {
    std::string out = message + " (frequency " + std::to_string(frequency);
    if (source >= 0) out += ", source " + std::to_string(source);
    if (sweep >= 0) out += ", sweep " + std::to_string(sweep);
    return out + ")";
  }

  std::string message_;
  int frequency_;
  int source_;
  int sweep_;
};

}  // namespace overiva
