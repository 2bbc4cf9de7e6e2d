#ifndef WAVGUARD_SIGNAL_HPP
#define WAVGUARD_SIGNAL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wavguard {

/// Number of 8-bit mu-law levels.
inline constexpr int kNumLevels = 256;
inline constexpr double kMu = 255.0;

// Mono signal with amplitudes in [-1, 1].
class Waveform {
public:
  Waveform() = default;

  Waveform(std::vector<double> samples, int sample_rate)
      : samples_(std::move(samples)), sample_rate_(sample_rate) {
    if (sample_rate_ <= 0) {
      throw std::invalid_argument("Waveform: sample_rate must be positive");
    }
    for (double s : samples_) {
      if (!(s >= -1.0 && s <= 1.0)) {
        throw std::domain_error("Waveform: sample outside [-1, 1]");
      }
    }
  }

  const std::vector<double>& samples() const noexcept { return samples_; }
  int sample_rate() const noexcept { return sample_rate_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double operator[](std::size_t i) const { return samples_[i]; }

private:
  std::vector<double> samples_;
  int sample_rate_ = 22050;
};

class LevelIndex {
public:
  constexpr LevelIndex() = default;
  constexpr explicit LevelIndex(int q) : q_(static_cast<std::uint8_t>(q)) {
    if (q < 0 || q >= kNumLevels) {
      throw std::out_of_range("LevelIndex: q outside [0, 255]");
    }
  }
  constexpr int value() const noexcept { return q_; }
  friend constexpr auto operator<=>(LevelIndex, LevelIndex) = default;

private:
  std::uint8_t q_ = 0;
};

inline void check_unit_range(double x, const char* what) {
  if (!(std::abs(x) <= 1.0)) {
    throw std::domain_error(std::string(what) + ": |x| > 1");
  }
}

/// sgn(x) ln(1 + 255|x|) / ln(256).
inline double mu_law_compand(double x) {
  check_unit_range(x, "mu_law_compand");
  const double mag = std::log1p(kMu * std::abs(x)) / std::log1p(kMu);
  return std::signbit(x) ? -mag : mag;
}

/// Analytic inverse of mu_law_compand.
inline double mu_law_expand(double v) {
  check_unit_range(v, "mu_law_expand");
  const double mag = std::expm1(std::abs(v) * std::log1p(kMu)) / kMu;
  return std::signbit(v) ? -mag : mag;
}

// Companded value -> level: round half away from zero on (v + 1) / 2 * 255.
inline LevelIndex quantize(double x) {
  const double pos = (mu_law_compand(x) + 1.0) * 0.5 * kMu;
  const long q = std::lround(pos);
  return LevelIndex(static_cast<int>(std::clamp(q, 0L, 255L)));
}

// Level q sits at companded value v = 2q/255 - 1; there is no exact-zero level.
inline double level_amplitude(LevelIndex q) {
  const double v = 2.0 * q.value() / kMu - 1.0;
  return mu_law_expand(std::clamp(v, -1.0, 1.0));
}

class LevelTable {
public:
  LevelTable() {
    for (int q = 0; q < kNumLevels; ++q) {
      amplitudes_[q] = level_amplitude(LevelIndex(q));
    }
    // Endpoints are exact by construction but pin them against libm drift.
    amplitudes_.front() = -1.0;
    amplitudes_.back() = 1.0;
  }

  double operator[](int q) const { return amplitudes_[static_cast<std::size_t>(q)]; }
  double operator[](LevelIndex q) const { return amplitudes_[q.value()]; }
  const std::array<double, kNumLevels>& amplitudes() const noexcept { return amplitudes_; }

  static const LevelTable& instance() {
    static const LevelTable table;
    return table;
  }

private:
  std::array<double, kNumLevels> amplitudes_{};
};

inline double decode(LevelIndex q) { return LevelTable::instance()[q]; }

inline double codec_roundtrip(double x) { return decode(quantize(x)); }

inline Waveform codec_roundtrip(const Waveform& w) {
  std::vector<double> out;
  out.reserve(w.size());
  for (double s : w.samples()) out.push_back(codec_roundtrip(s));
  return Waveform(std::move(out), w.sample_rate());
}

/// Nearest level to zero amplitude; used as the silent history prefix.
inline constexpr int kSilenceLevel = 128;

}  // namespace wavguard

#endif  // WAVGUARD_SIGNAL_HPP
