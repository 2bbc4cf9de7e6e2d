#ifndef WAVGUARD_ENVELOPE_HPP
#define WAVGUARD_ENVELOPE_HPP

// Low-cost waveform envelope: rectify, slot-max peak hold, low-pass.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "wavguard/fft.hpp"
#include "wavguard/signal.hpp"

namespace wavguard {

enum class Rectifier { Abs, Hilbert };

struct EnvelopeConfig {
  Rectifier rectifier = Rectifier::Hilbert;
  std::size_t slot_length = 200;
  double lowpass_cutoff = 300.0;  // Hz
  std::size_t hilbert_context = 400;

  void validate(int sample_rate) const {
    if (slot_length < 1) throw std::invalid_argument("EnvelopeConfig: slot_length must be >= 1");
    if (!(lowpass_cutoff > 0.0 && lowpass_cutoff < sample_rate / 2.0)) {
      throw std::invalid_argument("EnvelopeConfig: cutoff must lie in (0, sample_rate / 2)");
    }
  }
};

struct Envelope {
  std::vector<double> values;
  EnvelopeConfig config;
};

inline std::vector<double> rectify(std::span<const double> x, Rectifier rectifier, std::size_t hilbert_context = 400) {
  if (rectifier == Rectifier::Hilbert) return analytic_magnitude(x, hilbert_context);
  std::vector<double> out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [](double v) { return std::abs(v); });
  return out;
}

// Non-overlapping slots, each replaced by its maximum; the last slot may be short.
inline std::vector<double> peak_detect(std::span<const double> x, std::size_t slot_length) {
  if (slot_length < 1) throw std::invalid_argument("peak_detect: slot_length must be >= 1");
  std::vector<double> out(x.size());
  for (std::size_t start = 0; start < x.size(); start += slot_length) {
    const std::size_t stop = std::min(start + slot_length, x.size());
    const double peak = *std::max_element(x.begin() + static_cast<std::ptrdiff_t>(start),
                                          x.begin() + static_cast<std::ptrdiff_t>(stop));
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(start), out.begin() + static_cast<std::ptrdiff_t>(stop), peak);
  }
  return out;
}

struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
};

// 4th-order Butterworth low-pass as two bilinear-transformed biquads
// (Q = 1 / (2 cos(pi/8)) and 1 / (2 cos(3 pi/8))), prewarped at the cutoff.
class ButterworthLowpass4 {
public:
  ButterworthLowpass4(double cutoff, double sample_rate) {
    if (!(cutoff > 0.0 && cutoff < sample_rate / 2.0)) {
      throw std::invalid_argument("ButterworthLowpass4: cutoff must lie in (0, Nyquist)");
    }
    const double w0 = 2.0 * std::numbers::pi * cutoff / sample_rate;
    const double cw = std::cos(w0);
    const double sw = std::sin(w0);
    const std::array<double, 2> qs{1.0 / (2.0 * std::cos(std::numbers::pi / 8.0)),
                                   1.0 / (2.0 * std::cos(3.0 * std::numbers::pi / 8.0))};
    for (std::size_t i = 0; i < 2; ++i) {
      const double alpha = sw / (2.0 * qs[i]);
      const double a0 = 1.0 + alpha;
      sections_[i].b0 = (1.0 - cw) / 2.0 / a0;
      sections_[i].b1 = (1.0 - cw) / a0;
      sections_[i].b2 = (1.0 - cw) / 2.0 / a0;
      sections_[i].a1 = -2.0 * cw / a0;
      sections_[i].a2 = (1.0 - alpha) / a0;
    }
  }

  // Fresh zero state on every call.
  std::vector<double> filter(std::span<const double> x) const {
    std::vector<double> y(x.begin(), x.end());
    for (const auto& s : sections_) {
      double z1 = 0.0, z2 = 0.0;  // transposed direct form II
      for (double& v : y) {
        const double in = v;
        const double out = s.b0 * in + z1;
        z1 = s.b1 * in - s.a1 * out + z2;
        z2 = s.b2 * in - s.a2 * out;
        v = out;
      }
    }
    return y;
  }

  const std::array<Biquad, 2>& sections() const noexcept { return sections_; }

private:
  std::array<Biquad, 2> sections_{};
};

inline std::vector<double> lowpass(std::span<const double> x, double cutoff, double sample_rate) {
  return ButterworthLowpass4(cutoff, sample_rate).filter(x);
}

// Envelope over an arbitrary sample span; negative filter ringing is clamped to zero.
inline std::vector<double> envelope_values(std::span<const double> x, int sample_rate, const EnvelopeConfig& config) {
  config.validate(sample_rate);
  const auto rect = rectify(x, config.rectifier, config.hilbert_context);
  const auto peaks = peak_detect(rect, config.slot_length);
  auto out = lowpass(peaks, config.lowpass_cutoff, sample_rate);
  for (double& v : out) v = std::max(v, 0.0);
  return out;
}

inline Envelope extract_envelope(const Waveform& w, const EnvelopeConfig& config) {
  return Envelope{envelope_values(w.samples(), w.sample_rate(), config), config};
}

// Envelope of signal[begin, end) computed over the window that also includes
// up to hilbert_context samples of left context, which warms up the slot grid
// and filter. Only past samples are used, so the same value is available
// while a signal is still being generated.
inline std::vector<double> segment_envelope(std::span<const double> signal, std::size_t begin, std::size_t end,
                                            int sample_rate, const EnvelopeConfig& config) {
  if (begin > end || end > signal.size()) throw std::out_of_range("segment_envelope: bad range");
  const std::size_t from = begin >= config.hilbert_context ? begin - config.hilbert_context : 0;
  const auto env = envelope_values(signal.subspan(from, end - from), sample_rate, config);
  return {env.begin() + static_cast<std::ptrdiff_t>(begin - from), env.end()};
}

}  // namespace wavguard

#endif  // WAVGUARD_ENVELOPE_HPP
