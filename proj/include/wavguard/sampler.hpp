#ifndef WAVGUARD_SAMPLER_HPP
#define WAVGUARD_SAMPLER_HPP

// Autoregressive sample-distribution sources and the categorical draw used
// by every generation loop.

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "wavguard/lpcdc.hpp"
#include "wavguard/signal.hpp"

namespace wavguard {

// Per-sample PMF predictor. history holds exactly receptive_field() levels,
// oldest first, the last one being y[t-1]; positions before the utterance
// start are kSilenceLevel. Network predictors ignore t; the simulator uses it
// to locate its scripted events.
class Sampler {
public:
  virtual ~Sampler() = default;
  virtual std::size_t receptive_field() const = 0;
  virtual std::size_t aux_dim() const = 0;
  virtual Pmf256 predict(std::size_t t, std::span<const LevelIndex> history, std::span<const float> aux) const = 0;
};

// Frame-rate conditioning, upsampled to the sample rate by repetition.
struct AuxTrack {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t frame_shift = 1;
  std::vector<float> data;  // row-major

  bool covers(std::size_t n_samples) const { return cols == 0 || rows * frame_shift >= n_samples; }

  std::span<const float> at_sample(std::size_t t) const {
    if (cols == 0) return {};
    const std::size_t row = std::min(t / frame_shift, rows - 1);
    return std::span<const float>(data).subspan(row * cols, cols);
  }

  void validate() const {
    if (frame_shift < 1) throw std::invalid_argument("AuxTrack: frame_shift must be >= 1");
    if (data.size() != rows * cols) throw std::invalid_argument("AuxTrack: data size != rows * cols");
    if (cols > 0 && rows == 0) throw std::invalid_argument("AuxTrack: no rows");
  }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based uniform in [0, 1) for sample t of a stream. Keying draws by
// absolute sample index keeps a stream aligned no matter where a loop
// (re)starts, and the bit pattern is platform independent.
inline double stream_uniform(std::uint64_t seed, std::size_t t) {
  const std::uint64_t bits = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(t) + 0x632BE59BD9B4E019ULL));
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Inverse-CDF draw; never returns a zero-probability level.
inline LevelIndex draw_level(const Pmf256& pmf, double u) {
  double cum = 0.0;
  int last_nonzero = 0;
  for (int q = 0; q < kNumLevels; ++q) {
    if (pmf[q] <= 0.0) continue;
    last_nonzero = q;
    cum += pmf[q];
    if (u < cum) return LevelIndex(q);
  }
  return LevelIndex(last_nonzero);
}

// Fills `out` with the receptive-field window ending at y[t-1].
inline void history_window(std::span<const LevelIndex> levels, std::size_t t, std::size_t r,
                           std::vector<LevelIndex>& out) {
  out.assign(r, LevelIndex(kSilenceLevel));
  const std::size_t avail = std::min(t, r);
  std::copy(levels.begin() + static_cast<std::ptrdiff_t>(t - avail), levels.begin() + static_cast<std::ptrdiff_t>(t),
            out.end() - static_cast<std::ptrdiff_t>(avail));
}

struct Generated {
  Waveform waveform;
  std::vector<LevelIndex> levels;
  std::vector<Pmf256> pmfs;  // filled only when capture was requested
};

// Plain autoregressive generation: draw every sample from the sampler's PMF.
inline Generated generate(const Sampler& sampler, const AuxTrack& aux, std::size_t n_samples, std::uint64_t seed,
                          int sample_rate, bool capture_pmfs = false) {
  if (sampler.aux_dim() != aux.cols) throw std::invalid_argument("generate: aux dimension mismatch");
  if (!aux.covers(n_samples)) throw std::invalid_argument("generate: aux track shorter than requested length");
  Generated out;
  out.levels.reserve(n_samples);
  std::vector<double> amps;
  amps.reserve(n_samples);
  std::vector<LevelIndex> window;
  for (std::size_t t = 0; t < n_samples; ++t) {
    history_window(out.levels, t, sampler.receptive_field(), window);
    const Pmf256 pmf = sampler.predict(t, window, aux.at_sample(t));
    const LevelIndex q = draw_level(pmf, stream_uniform(seed, t));
    out.levels.push_back(q);
    amps.push_back(decode(q));
    if (capture_pmfs) out.pmfs.push_back(pmf);
  }
  out.waveform = Waveform(std::move(amps), sample_rate);
  return out;
}

}  // namespace wavguard

#endif  // WAVGUARD_SAMPLER_HPP
