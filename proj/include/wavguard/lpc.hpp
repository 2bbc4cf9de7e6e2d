#ifndef WAVGUARD_LPC_HPP
#define WAVGUARD_LPC_HPP

// Autocorrelation-method LPC: Hann window, Levinson-Durbin recursion, and
// per-sample mean prediction from generated-sample history.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "wavguard/signal.hpp"

namespace wavguard {

/// Residual variance floor (amplitude^2) for silent or degenerate frames.
inline constexpr double kResidualVarianceFloor = 1e-6;

struct FrameGrid {
  std::size_t frame_length = 441;
  std::size_t frame_shift = 110;
  std::size_t count = 0;

  // Frames for a signal of n samples; zero when n < frame_length.
  static FrameGrid for_signal(std::size_t n, std::size_t frame_length, std::size_t frame_shift) {
    if (frame_shift < 1 || frame_length < frame_shift) {
      throw std::invalid_argument("FrameGrid: need 1 <= frame_shift <= frame_length");
    }
    FrameGrid g{frame_length, frame_shift, 0};
    if (n >= frame_length) g.count = (n - frame_length) / frame_shift + 1;
    return g;
  }

  static FrameGrid from_ms(std::size_t n, int sample_rate, double length_ms, double shift_ms) {
    const auto len = static_cast<std::size_t>(std::lround(length_ms * sample_rate / 1000.0));
    const auto shift = static_cast<std::size_t>(std::lround(shift_ms * sample_rate / 1000.0));
    return for_signal(n, len, shift);
  }
};

struct LpcFrame {
  std::vector<double> coeffs;  // a_1..a_l with x_hat[t] = sum a_i x[t-i]
  double residual_variance = kResidualVarianceFloor;
  bool degenerate = false;
};

struct LpcTrack {
  std::vector<LpcFrame> frames;
  FrameGrid grid;
  std::size_t order = 0;
};

// Strictly positive Hann taper: w(t) = 0.5 (1 - cos(2 pi (t + 0.5) / n)).
inline std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t t = 0; t < n; ++t) {
    w[t] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * (static_cast<double>(t) + 0.5) / static_cast<double>(n)));
  }
  return w;
}

struct Autocorrelation {
  std::vector<double> r;
  double window_energy = 0.0;  // sum of w(t)^2
  bool all_zero = false;
};

inline Autocorrelation autocorrelate(std::span<const double> frame, std::size_t max_lag) {
  if (frame.empty()) throw std::invalid_argument("autocorrelate: empty frame");
  const auto w = hann_window(frame.size());
  std::vector<double> xw(frame.size());
  Autocorrelation out;
  for (std::size_t t = 0; t < frame.size(); ++t) {
    xw[t] = w[t] * frame[t];
    out.window_energy += w[t] * w[t];
  }
  out.r.assign(max_lag + 1, 0.0);
  for (std::size_t k = 0; k <= max_lag && k < frame.size(); ++k) {
    double acc = 0.0;
    for (std::size_t t = 0; t + k < frame.size(); ++t) acc += xw[t] * xw[t + k];
    out.r[k] = acc;
  }
  out.all_zero = !(out.r[0] > 0.0);
  return out;
}

struct LevinsonResult {
  LpcFrame frame;
  std::vector<double> reflection;
};

// Solves the normal equations for the order-(r.size()-1) predictor.
// window_energy converts the final prediction error to a per-sample variance.
inline LevinsonResult levinson_durbin(std::span<const double> r, double window_energy = 1.0) {
  if (r.empty()) throw std::invalid_argument("levinson_durbin: empty autocorrelation");
  const std::size_t order = r.size() - 1;
  LevinsonResult out;
  out.frame.coeffs.assign(order, 0.0);
  if (!(r[0] > 0.0) || !(window_energy > 0.0)) {
    out.frame.degenerate = true;
    out.frame.residual_variance = kResidualVarianceFloor;
    return out;
  }
  std::vector<double> a(order + 1, 0.0);  // a[0] unused; prediction weights
  std::vector<double> prev(order + 1, 0.0);
  double err = r[0];
  for (std::size_t i = 1; i <= order; ++i) {
    double acc = r[i];
    for (std::size_t j = 1; j < i; ++j) acc -= a[j] * r[i - j];
    const double k = acc / err;
    // An ill-conditioned frame can push |k| to 1 through rounding; stop there.
    if (!(std::abs(k) < 1.0)) break;
    prev = a;
    a[i] = k;
    for (std::size_t j = 1; j < i; ++j) a[j] = prev[j] - k * prev[i - j];
    err *= (1.0 - k * k);
    out.reflection.push_back(k);
  }
  std::copy(a.begin() + 1, a.end(), out.frame.coeffs.begin());
  out.frame.residual_variance = std::max(err / window_energy, kResidualVarianceFloor);
  return out;
}

inline LpcFrame analyze_frame(std::span<const double> frame, std::size_t order) {
  const auto ac = autocorrelate(frame, order);
  return levinson_durbin(ac.r, ac.window_energy).frame;
}

// Codec-roundtrips the reference first so the track sees the same levels as generation.
inline LpcTrack analyze_reference(const Waveform& ref, std::size_t frame_length, std::size_t frame_shift,
                                  std::size_t order) {
  if (ref.size() < frame_length) {
    throw std::invalid_argument("analyze_reference: reference shorter than one frame");
  }
  LpcTrack track;
  track.grid = FrameGrid::for_signal(ref.size(), frame_length, frame_shift);
  track.order = order;
  std::vector<double> coded(ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) coded[i] = codec_roundtrip(ref[i]);
  track.frames.reserve(track.grid.count);
  const std::span<const double> all(coded);
  for (std::size_t k = 0; k < track.grid.count; ++k) {
    track.frames.push_back(analyze_frame(all.subspan(k * frame_shift, frame_length), order));
  }
  return track;
}

inline LpcTrack analyze_reference_ms(const Waveform& ref, double frame_length_ms, double frame_shift_ms,
                                  std::size_t order) {
  const auto g = FrameGrid::from_ms(ref.size(), ref.sample_rate(), frame_length_ms, frame_shift_ms);
  return analyze_reference(ref, g.frame_length, g.frame_shift, order);
}

// Frame k governs samples [k * shift, (k + 1) * shift); the tail clamps to the last frame.
inline std::size_t frame_for_sample(std::size_t t, const FrameGrid& grid) {
  if (grid.count == 0) throw std::invalid_argument("frame_for_sample: empty grid");
  return std::min(t / grid.frame_shift, grid.count - 1);
}

/// history[0] is y[t-1], history[1] is y[t-2], ...; missing entries count as zero.
inline double predict_mean(std::span<const double> history, const LpcFrame& frame) {
  double mu = 0.0;
  const std::size_t n = std::min(history.size(), frame.coeffs.size());
  for (std::size_t i = 0; i < n; ++i) mu += frame.coeffs[i] * history[i];
  return mu;
}

}  // namespace wavguard

#endif  // WAVGUARD_LPC_HPP
