#pragma once

#include <stdexcept>
#include <string>

#include "overiva/types.hpp"

namespace overiva::wav {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Read a RIFF/WAVE file. Accepts 16-bit PCM and 32-bit IEEE float,
/// including the extensible-format wrappers of either. PCM samples are
/// scaled to [-1, 1) by 1/32768.
AudioBuffer read(const std::string& path);

/// Write a 32-bit IEEE float WAVE file, channels interleaved.
void write(const std::string& path, const AudioBuffer& audio);

}  // namespace overiva::wav
