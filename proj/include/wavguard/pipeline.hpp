#ifndef WAVGUARD_PIPELINE_HPP
#define WAVGUARD_PIPELINE_HPP

// Segmental generation with detection and escalating-constraint regeneration.
//
// Each segment is first generated without constraint. While the detector
// flags it and regenerations remain, it is generated again from its own start
// (history = previously accepted samples only) with the next rho of the
// schedule applied to every sample. The last attempt is kept regardless.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavguard/cssd.hpp"
#include "wavguard/envelope.hpp"
#include "wavguard/lpc.hpp"
#include "wavguard/lpcdc.hpp"
#include "wavguard/sampler.hpp"
#include "wavguard/signal.hpp"

namespace wavguard {

struct GenerationPolicy {
  std::vector<double> rho_schedule{0.01, 0.1, 1.0};
  std::size_t max_regenerations = 3;

  void validate() const {
    if (rho_schedule.size() != max_regenerations) {
      throw std::invalid_argument("GenerationPolicy: rho_schedule length must equal max_regenerations");
    }
    for (std::size_t i = 0; i < rho_schedule.size(); ++i) {
      if (!(rho_schedule[i] >= 0.0) || !std::isfinite(rho_schedule[i])) {
        throw std::invalid_argument("GenerationPolicy: rho must be finite and >= 0");
      }
      if (i > 0 && !(rho_schedule[i] > rho_schedule[i - 1])) {
        throw std::invalid_argument("GenerationPolicy: rho_schedule must be strictly increasing");
      }
    }
  }
};

struct LpcConfig {
  std::size_t order = 30;
  double frame_length_ms = 20.0;
  double frame_shift_ms = 5.0;
};

// Full set of tunables; segment length lives in the detector config.
struct PipelineConfig {
  GenerationPolicy policy;
  DetectorConfig detector;
  LpcConfig lpc;
};

struct PreparedReference {
  Waveform coded;  // reference after the mu-law round trip
  LpcTrack lpc;
  Envelope envelope;
};

inline PreparedReference prepare(const Waveform& ref, const LpcConfig& lpc, const EnvelopeConfig& env) {
  PreparedReference out;
  out.coded = codec_roundtrip(ref);
  out.lpc = analyze_reference_ms(ref, lpc.frame_length_ms, lpc.frame_shift_ms, lpc.order);
  out.envelope = extract_envelope(out.coded, env);
  return out;
}

struct GenerationState {
  std::vector<LevelIndex> levels;
  std::vector<double> amplitudes;

  std::size_t size() const { return levels.size(); }
};

struct SegmentDraw {
  std::vector<LevelIndex> levels;
  std::vector<double> amplitudes;
  std::size_t sampler_calls = 0;
  std::size_t fallback_events = 0;
};

// Seed of regeneration `attempt` of segment k. Attempt 0 keeps the base stream
// so unconstrained output matches plain generation with the same seed.
inline std::uint64_t attempt_seed(std::uint64_t base_seed, std::size_t segment, std::size_t attempt) {
  if (attempt == 0) return base_seed;
  return base_seed ^ splitmix64((static_cast<std::uint64_t>(segment) << 8) ^ static_cast<std::uint64_t>(attempt));
}

// Generates samples [state.size(), end). With rho set, every PMF is
// constrained by the LPC mask built from the track frame covering t and the
// decoded history (accepted samples followed by this segment's own draws).
inline SegmentDraw generate_segment(const Sampler& sampler, const GenerationState& state, std::size_t end,
                                    const AuxTrack& aux, const LpcTrack* lpc, std::optional<double> rho,
                                    std::uint64_t seed) {
  const std::size_t begin = state.size();
  if (end < begin) throw std::invalid_argument("generate_segment: end before current position");
  if (rho && lpc == nullptr) throw std::invalid_argument("generate_segment: constraint requested without LPC track");
  SegmentDraw out;
  std::vector<LevelIndex> levels = state.levels;
  std::vector<double> amps = state.amplitudes;
  levels.reserve(end);
  amps.reserve(end);
  std::vector<LevelIndex> window;
  std::vector<double> lpc_history;
  const std::size_t r = sampler.receptive_field();
  for (std::size_t t = begin; t < end; ++t) {
    history_window(levels, t, r, window);
    Pmf256 pmf = sampler.predict(t, window, aux.at_sample(t));
    ++out.sampler_calls;
    if (rho) {
      const LpcFrame& frame = lpc->frames[frame_for_sample(t, lpc->grid)];
      lpc_history.assign(frame.coeffs.size(), 0.0);
      for (std::size_t i = 0; i < lpc_history.size() && i < t; ++i) lpc_history[i] = amps[t - 1 - i];
      const double mu = predict_mean(lpc_history, frame);
      const auto mask = lpc_log_mask(mu, std::sqrt(frame.residual_variance));
      auto res = apply_constraint(pmf, mask, *rho);
      if (res.fallback) ++out.fallback_events;
      pmf = res.pmf;
    }
    const LevelIndex q = draw_level(pmf, stream_uniform(seed, t));
    levels.push_back(q);
    amps.push_back(decode(q));
  }
  out.levels.assign(levels.begin() + static_cast<std::ptrdiff_t>(begin), levels.end());
  out.amplitudes.assign(amps.begin() + static_cast<std::ptrdiff_t>(begin), amps.end());
  return out;
}

struct SegmentReport {
  std::size_t index = 0;
  std::size_t begin = 0;
  std::size_t length = 0;
  std::size_t attempts = 0;
  std::vector<double> scores;  // one per attempt
  std::optional<double> rho_used;
  bool initially_flagged = false;
  bool final_flagged = false;
  std::size_t fallback_events = 0;
};

struct UtteranceReport {
  std::string utterance_id;
  std::size_t n_samples = 0;
  double threshold = 0.0;
  std::vector<SegmentReport> segments;
  std::size_t sampler_calls = 0;

  std::size_t n_initially_flagged() const {
    std::size_t n = 0;
    for (const auto& s : segments) n += s.initially_flagged;
    return n;
  }
  std::size_t n_final_flagged() const {
    std::size_t n = 0;
    for (const auto& s : segments) n += s.final_flagged;
    return n;
  }
  std::size_t n_regenerations() const {
    std::size_t n = 0;
    for (const auto& s : segments) n += s.attempts - 1;
    return n;
  }
  std::size_t n_fallback_events() const {
    std::size_t n = 0;
    for (const auto& s : segments) n += s.fallback_events;
    return n;
  }
};

struct GenerationResult {
  Waveform waveform;
  std::vector<LevelIndex> levels;
  UtteranceReport report;
};

inline GenerationResult generate_utterance(const Sampler& sampler, const PreparedReference& prep, const AuxTrack& aux,
                                           const PipelineConfig& config, std::uint64_t base_seed, std::size_t n,
                                           const std::string& utterance_id) {
  config.policy.validate();
  if (n > prep.coded.size()) throw std::invalid_argument("generate_utterance: reference shorter than requested length");
  if (prep.lpc.frames.empty()) throw std::invalid_argument("generate_utterance: empty LPC track");
  if (sampler.aux_dim() != aux.cols) throw std::invalid_argument("generate_utterance: aux dimension mismatch");
  if (!aux.covers(n)) throw std::invalid_argument("generate_utterance: aux track shorter than requested length");
  const SegmentScorer scorer(prep.coded, n, config.detector);

  GenerationState state;
  state.levels.reserve(n);
  state.amplitudes.reserve(n);
  UtteranceReport report;
  report.utterance_id = utterance_id;
  report.n_samples = n;
  report.threshold = config.detector.threshold;

  std::vector<double> scratch;
  for (std::size_t k = 0; k < scorer.segments(); ++k) {
    SegmentReport seg;
    seg.index = k;
    seg.begin = scorer.begin(k);
    seg.length = scorer.end(k) - scorer.begin(k);
    SegmentDraw draw;
    bool flagged = false;
    for (std::size_t attempt = 0; attempt <= config.policy.max_regenerations; ++attempt) {
      std::optional<double> rho;
      if (attempt > 0) rho = config.policy.rho_schedule[attempt - 1];
      draw = generate_segment(sampler, state, scorer.end(k), aux, &prep.lpc, rho, attempt_seed(base_seed, k, attempt));
      report.sampler_calls += draw.sampler_calls;
      seg.fallback_events += draw.fallback_events;
      seg.attempts = attempt + 1;
      seg.rho_used = rho;

      scratch = state.amplitudes;
      scratch.insert(scratch.end(), draw.amplitudes.begin(), draw.amplitudes.end());
      const auto verdict = scorer.verdict(scratch, k);
      seg.scores.push_back(verdict.score);
      flagged = verdict.flagged;
      if (attempt == 0) seg.initially_flagged = flagged;
      if (!flagged) break;
    }
    seg.final_flagged = flagged;
    state.levels.insert(state.levels.end(), draw.levels.begin(), draw.levels.end());
    state.amplitudes.insert(state.amplitudes.end(), draw.amplitudes.begin(), draw.amplitudes.end());
    report.segments.push_back(std::move(seg));
  }

  GenerationResult out;
  out.waveform = Waveform(state.amplitudes, prep.coded.sample_rate());
  out.levels = std::move(state.levels);
  out.report = std::move(report);
  return out;
}

// Generates n_samples (defaults to the reference length).
inline GenerationResult generate_utterance(const Sampler& sampler, const Waveform& ref, const AuxTrack& aux,
                                           const PipelineConfig& config, std::uint64_t base_seed,
                                           std::optional<std::size_t> n_samples = std::nullopt,
                                           const std::string& utterance_id = "utt") {
  config.policy.validate();
  const std::size_t n = n_samples.value_or(ref.size());
  if (n > ref.size()) throw std::invalid_argument("generate_utterance: reference shorter than requested length");
  const PreparedReference prep = prepare(ref, config.lpc, config.detector.envelope);
  return generate_utterance(sampler, prep, aux, config, base_seed, n, utterance_id);
}

}  // namespace wavguard

#endif  // WAVGUARD_PIPELINE_HPP
