#ifndef WAVGUARD_SIMULATOR_HPP
#define WAVGUARD_SIMULATOR_HPP

// Scripted collapse simulator. Outside injections it behaves like a small
// autoregressive model that tracks a sinusoid from its own fed-back history;
// inside injections it emits collapsed PMFs:
//   Type I  - sustained mass near the extreme levels (white-noise-like, full scale)
//   Type II - a short run of single extreme-level spikes
// The clean component always depends on the generated history, so a
// constrained draw changes every later prediction as in a real AR model.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavguard/lpcdc.hpp"
#include "wavguard/sampler.hpp"
#include "wavguard/signal.hpp"

namespace wavguard {

enum class CollapseKind { TypeI, TypeII };

struct Injection {
  std::size_t start = 0;
  std::size_t length = 0;
  CollapseKind kind = CollapseKind::TypeI;
};

struct CollapseScenario {
  int sample_rate = 22050;
  std::size_t n_samples = 22050;
  double frequency = 220.0;  // Hz
  double amplitude = 0.3;
  double phase = 0.0;
  double generator_noise = 0.01;  // std of the clean predictive Gaussian
  double reference_noise = 0.005;  // additive noise std in the reference rendition
  std::vector<Injection> injections;

  void validate() const {
    if (sample_rate <= 0) throw std::invalid_argument("CollapseScenario: sample_rate must be positive");
    if (!(amplitude >= 0.0 && amplitude <= 1.0)) throw std::invalid_argument("CollapseScenario: amplitude outside [0, 1]");
    if (!(frequency > 0.0 && frequency < sample_rate / 2.0)) throw std::invalid_argument("CollapseScenario: bad frequency");
    if (!(generator_noise > 0.0) || !(reference_noise >= 0.0)) throw std::invalid_argument("CollapseScenario: bad noise");
    auto sorted = injections;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i].length == 0) throw std::invalid_argument("CollapseScenario: empty injection");
      if (sorted[i].start + sorted[i].length > n_samples) throw std::invalid_argument("CollapseScenario: injection outside utterance");
      if (i > 0 && sorted[i - 1].start + sorted[i - 1].length > sorted[i].start) {
        throw std::invalid_argument("CollapseScenario: overlapping injections");
      }
    }
  }

  double base(std::size_t t) const {
    return amplitude * std::sin(2.0 * std::numbers::pi * frequency * static_cast<double>(t) / sample_rate + phase);
  }

  bool collapsed() const { return !injections.empty(); }
};

// Collapse-free rendition of the scenario, the stand-in for a conventional-vocoder reference.
inline Waveform reference_waveform(const CollapseScenario& s, std::uint64_t seed) {
  s.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> x(s.n_samples);
  for (std::size_t t = 0; t < s.n_samples; ++t) {
    x[t] = std::clamp(s.base(t) + s.reference_noise * noise(rng), -1.0, 1.0);
  }
  return Waveform(std::move(x), s.sample_rate);
}

class SimulatedSampler : public Sampler {
public:
  static constexpr double kTracking = 0.2;  // pull of the clean mean toward the base sinusoid
  static constexpr double kFloor = 1e-8;  // uniform mass mixed into every PMF
  static constexpr double kTypeIMass = 0.9;
  static constexpr double kTypeIIMass = 0.98;
  static constexpr int kExtremeWidth = 4;  // levels per side carrying Type I mass

  explicit SimulatedSampler(CollapseScenario scenario) : s_(std::move(scenario)) {
    s_.validate();
    two_cos_ = 2.0 * std::cos(2.0 * std::numbers::pi * s_.frequency / s_.sample_rate);
  }

  std::size_t receptive_field() const override { return 2; }
  std::size_t aux_dim() const override { return 0; }
  const CollapseScenario& scenario() const noexcept { return s_; }

  const Injection* injection_at(std::size_t t) const {
    for (const auto& inj : s_.injections)
      if (t >= inj.start && t < inj.start + inj.length) return &inj;
    return nullptr;
  }

  Pmf256 predict(std::size_t t, std::span<const LevelIndex> history, std::span<const float>) const override {
    if (history.size() != 2) throw std::invalid_argument("SimulatedSampler: history length must be 2");
    const double y1 = decode(history[1]);
    const double y2 = decode(history[0]);
    double mean = (1.0 - kTracking) * (two_cos_ * y1 - y2) + kTracking * s_.base(t);
    mean = std::clamp(mean, -1.0, 1.0);
    // Gaussian over level amplitudes; far tails may underflow, the floor keeps every level reachable.
    const auto& table = LevelTable::instance();
    Pmf256::Array clean{};
    double clean_total = 0.0;
    for (int q = 0; q < kNumLevels; ++q) {
      const double z = (table[q] - mean) / s_.generator_noise;
      clean[q] = std::exp(-0.5 * z * z);
      clean_total += clean[q];
    }

    Pmf256::Array w{};
    const Injection* inj = injection_at(t);
    const double clean_mass = inj == nullptr ? 1.0 : inj->kind == CollapseKind::TypeI ? 1.0 - kTypeIMass : 1.0 - kTypeIIMass;
    for (int q = 0; q < kNumLevels; ++q) {
      w[q] = (1.0 - kFloor) * clean_mass * clean[q] / clean_total + kFloor / kNumLevels;
    }
    if (inj != nullptr && inj->kind == CollapseKind::TypeI) {
      const double per_level = (1.0 - kFloor) * kTypeIMass / (2 * kExtremeWidth);
      for (int i = 0; i < kExtremeWidth; ++i) {
        w[i] += per_level;
        w[kNumLevels - 1 - i] += per_level;
      }
    } else if (inj != nullptr) {
      w[s_.base(t) >= 0.0 ? kNumLevels - 1 : 0] += (1.0 - kFloor) * kTypeIIMass;
    }
    return Pmf256::from_weights(w);
  }

private:
  CollapseScenario s_;
  double two_cos_ = 2.0;
};

inline SimulatedSampler simulate_sampler(const CollapseScenario& scenario) { return SimulatedSampler(scenario); }

enum class UtteranceKind { Clean, TypeI, TypeII };

inline const char* to_string(UtteranceKind k) {
  switch (k) {
    case UtteranceKind::Clean: return "clean";
    case UtteranceKind::TypeI: return "type1";
    case UtteranceKind::TypeII: return "type2";
  }
  return "?";
}

struct CorpusSpec {
  std::size_t n_clean = 100;
  std::size_t n_type1 = 60;
  std::size_t n_type2 = 40;
  std::size_t n_samples = 22050;
  int sample_rate = 22050;
  std::uint64_t seed = 2024;
};

struct CorpusItem {
  std::string id;
  UtteranceKind kind = UtteranceKind::Clean;
  CollapseScenario scenario;
  std::uint64_t seed = 0;  // reference noise and generation seed
};

// Labeled synthetic corpus: random base tone per utterance, then
// Type I windows of 2000-6000 samples or one to three Type II bursts of
// 5-15 samples.
inline std::vector<CorpusItem> make_corpus(const CorpusSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53); };
  auto uniform_int = [&](std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  std::vector<CorpusItem> out;
  auto add = [&](UtteranceKind kind, std::size_t index) {
    CorpusItem item;
    item.kind = kind;
    item.id = std::string(to_string(kind)) + "_" + std::to_string(index);
    item.seed = rng();
    auto& s = item.scenario;
    s.sample_rate = spec.sample_rate;
    s.n_samples = spec.n_samples;
    s.frequency = uniform(100.0, 400.0);
    s.amplitude = uniform(0.1, 0.5);
    s.phase = uniform(0.0, 2.0 * std::numbers::pi);
    if (kind == UtteranceKind::TypeI) {
      const std::size_t len = std::min(uniform_int(2000, 6000), spec.n_samples);
      s.injections.push_back({uniform_int(0, spec.n_samples - len), len, CollapseKind::TypeI});
    } else if (kind == UtteranceKind::TypeII) {
      const std::size_t bursts = uniform_int(1, 3);
      const std::size_t span = spec.n_samples / bursts;
      for (std::size_t b = 0; b < bursts; ++b) {
        const std::size_t len = std::min(uniform_int(5, 15), span);
        s.injections.push_back({b * span + uniform_int(0, span - len), len, CollapseKind::TypeII});
      }
    }
    s.validate();
    out.push_back(std::move(item));
  };
  for (std::size_t i = 0; i < spec.n_clean; ++i) add(UtteranceKind::Clean, i);
  for (std::size_t i = 0; i < spec.n_type1; ++i) add(UtteranceKind::TypeI, i);
  for (std::size_t i = 0; i < spec.n_type2; ++i) add(UtteranceKind::TypeII, i);
  return out;
}

}  // namespace wavguard

#endif  // WAVGUARD_SIMULATOR_HPP
