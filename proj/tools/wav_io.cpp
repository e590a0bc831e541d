#include "wav_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace overiva::wav {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xFF));
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
}

}  // namespace

AudioBuffer read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open WAV file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw IoError("not a RIFF/WAVE file: " + path);
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_size = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t chunk_size = read_u32(&bytes[pos + 4]);
    const size_t body = pos + 8;
    if (body + chunk_size > bytes.size()) break;
    if (std::memcmp(&bytes[pos], "fmt ", 4) == 0 && chunk_size >= 16) {
      format = read_u16(&bytes[body]);
      channels = read_u16(&bytes[body + 2]);
      sample_rate = read_u32(&bytes[body + 4]);
      bits = read_u16(&bytes[body + 14]);
      if (format == kFormatExtensible && chunk_size >= 40) {
        format = read_u16(&bytes[body + 24]);  // first bytes of the sub-GUID
      }
    } else if (std::memcmp(&bytes[pos], "data", 4) == 0) {
      data = &bytes[body];
      data_size = chunk_size;
    }
    pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }

  if (data == nullptr || channels == 0 || sample_rate == 0) {
    throw IoError("missing fmt or data chunk: " + path);
  }
  const int bytes_per_sample = bits / 8;
  if (!((format == kFormatPcm && bits == 16) ||
        (format == kFormatFloat && bits == 32))) {
    throw IoError("unsupported WAV encoding (want 16-bit PCM or 32-bit "
                  "float): " + path);
  }

  const Eigen::Index frames =
      data_size / (static_cast<std::uint32_t>(channels) * bytes_per_sample);
  AudioBuffer audio;
  audio.sample_rate = sample_rate;
  audio.samples = RMat(channels, frames);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int m = 0; m < channels; ++m) {
      const unsigned char* p =
          data + (t * channels + m) * bytes_per_sample;
      if (format == kFormatPcm) {
        const std::int16_t v =
            static_cast<std::int16_t>(p[0] | (p[1] << 8));
        audio.samples(m, t) = v / 32768.0;
      } else {
        float v;
        std::memcpy(&v, p, 4);
        audio.samples(m, t) = v;
      }
    }
  }
  return audio;
}

void write(const std::string& path, const AudioBuffer& audio) {
  const int channels = audio.channels();
  const Eigen::Index frames = audio.length();
  const std::uint32_t data_size =
      static_cast<std::uint32_t>(frames * channels * 4);

  std::vector<unsigned char> out;
  out.reserve(58 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 4 + 26 + 8 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  put_u32(out, 18);
  put_u16(out, kFormatFloat);
  put_u16(out, static_cast<std::uint16_t>(channels));
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate) * channels * 4);
  put_u16(out, static_cast<std::uint16_t>(channels * 4));
  put_u16(out, 32);
  put_u16(out, 0);  // no format extension
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_size);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int m = 0; m < channels; ++m) {
      const float v = static_cast<float>(audio.samples(m, t));
      std::uint32_t bits;
      std::memcpy(&bits, &v, 4);
      put_u32(out, bits);
    }
  }

  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open for writing: " + path);
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("short write: " + path);
}

}  // namespace overiva::wav
