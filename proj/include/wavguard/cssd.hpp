#ifndef WAVGUARD_CSSD_HPP
#define WAVGUARD_CSSD_HPP

// Collapsed-speech segment detection by envelope comparison against a
// collapse-free reference, with a power-difference baseline and DET/EER
// evaluation.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavguard/envelope.hpp"
#include "wavguard/signal.hpp"

namespace wavguard {

enum class ScoreKind { MaxDiff, MeanAbsDiff, PowerDiff };

/// Type I vs clean EER threshold on the bundled synthetic corpus (Hilbert
/// rectifier, max-difference score), rounded from the plateau midpoint 1.11302.
inline constexpr double kDefaultThreshold = 1.113;

struct DetectorConfig {
  std::size_t segment_length = 4000;
  double threshold = kDefaultThreshold;
  EnvelopeConfig envelope;
  ScoreKind score_kind = ScoreKind::MaxDiff;

  void validate(int sample_rate) const {
    if (segment_length < 1) throw std::invalid_argument("DetectorConfig: segment_length must be >= 1");
    if (std::isnan(threshold)) throw std::invalid_argument("DetectorConfig: threshold is NaN");
    envelope.validate(sample_rate);
  }
};

struct SegmentVerdict {
  std::size_t segment_index = 0;
  double score = 0.0;
  bool flagged = false;
};

// MaxDiff is signed (collapse pushes the generated envelope above the
// reference) and therefore asymmetric in its arguments.
inline double segment_score(std::span<const double> gen, std::span<const double> ref, ScoreKind kind) {
  if (gen.size() != ref.size()) throw std::invalid_argument("segment_score: length mismatch");
  if (gen.empty()) throw std::invalid_argument("segment_score: empty segment");
  const double n = static_cast<double>(gen.size());
  switch (kind) {
    case ScoreKind::MaxDiff: {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < gen.size(); ++i) best = std::max(best, gen[i] - ref[i]);
      return best;
    }
    case ScoreKind::MeanAbsDiff: {
      double acc = 0.0;
      for (std::size_t i = 0; i < gen.size(); ++i) acc += std::abs(gen[i] - ref[i]);
      return acc / n;
    }
    case ScoreKind::PowerDiff: {
      double pg = 0.0, pr = 0.0;
      for (std::size_t i = 0; i < gen.size(); ++i) {
        pg += gen[i] * gen[i];
        pr += ref[i] * ref[i];
      }
      return (pg - pr) / n;
    }
  }
  throw std::logic_error("segment_score: unknown kind");
}

inline std::size_t segment_count(std::size_t n, std::size_t segment_length) {
  return (n + segment_length - 1) / segment_length;
}

// Reference side of segment scoring, computed once per utterance. Envelope
// kinds compare windowed envelopes (see segment_envelope); PowerDiff compares
// raw samples.
class SegmentScorer {
public:
  SegmentScorer(const Waveform& ref, std::size_t n_samples, const DetectorConfig& config)
      : ref_(ref), n_(n_samples), config_(config) {
    if (n_samples > ref.size()) throw std::invalid_argument("SegmentScorer: reference shorter than utterance");
    config_.validate(ref.sample_rate());
    if (config_.score_kind == ScoreKind::PowerDiff) return;
    const std::span<const double> r(ref_.samples().data(), n_);
    for (std::size_t k = 0; k < segment_count(n_, config_.segment_length); ++k) {
      ref_env_.push_back(segment_envelope(r, begin(k), end(k), ref_.sample_rate(), config_.envelope));
    }
  }

  std::size_t segments() const { return segment_count(n_, config_.segment_length); }
  std::size_t begin(std::size_t k) const { return k * config_.segment_length; }
  std::size_t end(std::size_t k) const { return std::min(begin(k) + config_.segment_length, n_); }
  const DetectorConfig& config() const noexcept { return config_; }

  // `gen` must hold at least end(k) samples; only [0, end(k)) is read.
  double score(std::span<const double> gen, std::size_t k) const {
    if (gen.size() < end(k)) throw std::invalid_argument("SegmentScorer: generated signal too short");
    if (config_.score_kind == ScoreKind::PowerDiff) {
      const std::span<const double> r(ref_.samples());
      return segment_score(gen.subspan(begin(k), end(k) - begin(k)), r.subspan(begin(k), end(k) - begin(k)),
                           ScoreKind::PowerDiff);
    }
    const auto ge = segment_envelope(gen.first(end(k)), begin(k), end(k), ref_.sample_rate(), config_.envelope);
    return segment_score(ge, ref_env_[k], config_.score_kind);
  }

  SegmentVerdict verdict(std::span<const double> gen, std::size_t k) const {
    const double s = score(gen, k);
    return {k, s, s > config_.threshold};
  }

private:
  Waveform ref_;
  std::size_t n_;
  DetectorConfig config_;
  std::vector<std::vector<double>> ref_env_;
};

inline std::vector<SegmentVerdict> detect_utterance(const Waveform& gen, const Waveform& ref,
                                                    const DetectorConfig& config) {
  if (gen.empty() || ref.empty()) throw std::invalid_argument("detect_utterance: empty input");
  if (gen.size() > ref.size()) throw std::invalid_argument("detect_utterance: reference shorter than generated");
  if (gen.sample_rate() != ref.sample_rate()) throw std::invalid_argument("detect_utterance: sample rate mismatch");
  const SegmentScorer scorer(ref, gen.size(), config);
  std::vector<SegmentVerdict> out;
  for (std::size_t k = 0; k < scorer.segments(); ++k) out.push_back(scorer.verdict(gen.samples(), k));
  return out;
}

inline double utterance_score(const std::vector<SegmentVerdict>& verdicts) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : verdicts) best = std::max(best, v.score);
  return best;
}

// DET naming: `far` is the fraction of collapsed (positive) items that are
// not flagged, i.e. the miss rate; `frr` is the fraction of normal items that
// are flagged, i.e. the false-alarm rate. An item is flagged when score > threshold.
struct DetPoint {
  double threshold = 0.0;
  double far = 0.0;
  double frr = 0.0;
};

struct DetCurve {
  std::vector<DetPoint> points;  // ascending threshold
  double eer = 0.0;
  double eer_threshold = 0.0;
};

inline DetPoint det_point(std::span<const double> scores, const std::vector<bool>& labels, double threshold) {
  std::size_t pos = 0, neg = 0, missed = 0, false_alarms = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool flagged = scores[i] > threshold;
    if (labels[i]) {
      ++pos;
      if (!flagged) ++missed;
    } else {
      ++neg;
      if (flagged) ++false_alarms;
    }
  }
  return {threshold, static_cast<double>(missed) / static_cast<double>(pos),
          static_cast<double>(false_alarms) / static_cast<double>(neg)};
}

inline DetCurve det_curve(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("det_curve: scores/labels length mismatch");
  const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  if (n_pos == 0 || n_pos == labels.size()) throw std::invalid_argument("det_curve: need both classes");
  for (double s : scores) {
    if (!std::isfinite(s)) throw std::invalid_argument("det_curve: non-finite score");
  }

  std::vector<double> distinct(scores.begin(), scores.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> thresholds{-inf};
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i) thresholds.push_back(0.5 * (distinct[i] + distinct[i + 1]));
  thresholds.push_back(inf);

  DetCurve curve;
  for (double t : thresholds) curve.points.push_back(det_point(scores, labels, t));

  // FAR - FRR runs from -1 at -inf to +1 at +inf and is non-decreasing.
  const auto& pts = curve.points;
  auto gap = [&](std::size_t i) { return pts[i].far - pts[i].frr; };
  std::size_t first_zero = pts.size(), last_zero = pts.size();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (gap(i) == 0.0) {
      if (first_zero == pts.size()) first_zero = i;
      last_zero = i;
    }
  }
  if (first_zero != pts.size()) {
    curve.eer = pts[first_zero].far;
    const double lo = pts[first_zero].threshold, hi = pts[last_zero].threshold;
    if (std::isfinite(lo) && std::isfinite(hi)) {
      curve.eer_threshold = 0.5 * (lo + hi);
    } else {
      curve.eer_threshold = std::isfinite(lo) ? lo : hi;
    }
    return curve;
  }
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (gap(i) < 0.0 && gap(i + 1) > 0.0) {
      const double frac = -gap(i) / (gap(i + 1) - gap(i));
      curve.eer = pts[i].far + frac * (pts[i + 1].far - pts[i].far);
      const double lo = pts[i].threshold, hi = pts[i + 1].threshold;
      if (std::isfinite(lo) && std::isfinite(hi)) {
        curve.eer_threshold = lo + frac * (hi - lo);
      } else if (std::isfinite(lo)) {
        curve.eer_threshold = lo;
      } else if (std::isfinite(hi)) {
        curve.eer_threshold = hi;
      } else {
        curve.eer_threshold = distinct.front();
      }
      return curve;
    }
  }
  throw std::logic_error("det_curve: no FAR/FRR crossing");
}

}  // namespace wavguard

#endif  // WAVGUARD_CSSD_HPP
