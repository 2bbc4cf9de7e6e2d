#ifndef WAVGUARD_WAV_HPP
#define WAVGUARD_WAV_HPP

// 16-bit PCM mono RIFF/WAVE reader and writer.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavguard/signal.hpp"

namespace wavguard {

class WavError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void put_u32le(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

inline void put_u16le(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

inline void put_tag(std::vector<unsigned char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace detail

inline Waveform wav_decode(const std::vector<unsigned char>& bytes) {
  using detail::read_u16le;
  using detail::read_u32le;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw WavError("not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  int sample_rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32le(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + 16 > bytes.size()) throw WavError("truncated fmt chunk");
      const auto format = read_u16le(bytes.data() + body);
      const auto channels = read_u16le(bytes.data() + body + 2);
      sample_rate = static_cast<int>(read_u32le(bytes.data() + body + 4));
      const auto bits = read_u16le(bytes.data() + body + 14);
      if (format != 1) throw WavError("unsupported WAV format code " + std::to_string(format));
      if (channels != 1) throw WavError("expected mono, got " + std::to_string(channels) + " channels");
      if (bits != 16) throw WavError("expected 16-bit samples, got " + std::to_string(bits));
      if (sample_rate <= 0) throw WavError("invalid sample rate");
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw WavError("data chunk before fmt chunk");
      if (body + size > bytes.size()) throw WavError("truncated data chunk");
      std::vector<double> samples(size / 2);
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto raw = static_cast<std::int16_t>(read_u16le(bytes.data() + body + 2 * i));
        samples[i] = raw / 32768.0;
      }
      return Waveform(std::move(samples), sample_rate);
    }
    pos = body + size + (size & 1U);
  }
  throw WavError("missing data chunk");
}

inline std::vector<unsigned char> wav_encode(const Waveform& w) {
  using namespace detail;
  const auto data_bytes = static_cast<std::uint32_t>(w.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32le(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32le(out, 16);
  put_u16le(out, 1);
  put_u16le(out, 1);
  put_u32le(out, static_cast<std::uint32_t>(w.sample_rate()));
  put_u32le(out, static_cast<std::uint32_t>(w.sample_rate()) * 2);
  put_u16le(out, 2);
  put_u16le(out, 16);
  put_tag(out, "data");
  put_u32le(out, data_bytes);
  for (double s : w.samples()) {
    const long v = std::clamp(std::lround(s * 32768.0), -32768L, 32767L);
    put_u16le(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  return out;
}

inline Waveform wav_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return wav_decode(bytes);
  } catch (const WavError& e) {
    throw WavError(path + ": " + e.what());
  }
}

inline void wav_write(const std::string& path, const Waveform& w) {
  const auto bytes = wav_encode(w);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw WavError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw WavError("write failed: " + path);
}

}  // namespace wavguard

#endif  // WAVGUARD_WAV_HPP
