// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wavguard/wavguard.hpp"
#include "wn_oracle.hpp"

using namespace wavguard;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " | FAILED: " << what;
    }
  }
};

// Shared between criteria 5 and 6.
struct CorpusRun {
  std::vector<CorpusItem> items;
  std::vector<double> scores;
  double type1_threshold = 0.0;
};
CorpusRun g_corpus;

// ---- 1. codec ----
void codec(Outcome& o) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng);
    worst = std::max(worst, std::abs(mu_law_compand(codec_roundtrip(x)) - mu_law_compand(x)));
  }
  o.detail << "max companded error " << worst << " (bound " << 1.0 / 255.0 << ")";
  o.check(worst <= 1.0 / 255.0, "round-trip error above 1/255");
  const auto& t = LevelTable::instance();
  o.check(t[0] == -1.0 && t[255] == 1.0, "level table endpoints not exactly +-1");
  for (int q = 1; q < kNumLevels; ++q) o.check(t[q] > t[q - 1], "level table not strictly increasing");
}

// ---- 2. LPC oracle ----
void lpc_oracle(Outcome& o) {
  double worst_coef = 0.0, worst_ratio = 1.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> e(0.0, 0.1);  // variance 0.01
    std::vector<double> x(4410 + 1000, 0.0);
    for (std::size_t t = 0; t < x.size(); ++t) {
      x[t] = e(rng) + (t >= 1 ? 0.75 * x[t - 1] : 0.0) - (t >= 2 ? 0.5 * x[t - 2] : 0.0);
    }
    const std::vector<double> frame(x.end() - 4410, x.end());
    const auto f = analyze_frame(frame, 2);
    worst_coef = std::max({worst_coef, std::abs(f.coeffs[0] - 0.75), std::abs(f.coeffs[1] + 0.5)});
    const double ratio = f.residual_variance / 0.01;
    worst_ratio = std::max({worst_ratio, ratio, 1.0 / ratio});
  }
  o.detail << "20 realizations: max coef error " << worst_coef << ", worst variance ratio " << worst_ratio;
  o.check(worst_coef <= 0.05, "coefficient error above 0.05");
  o.check(worst_ratio <= 2.0, "residual variance off by more than x2");
}

// ---- 3. constraint identities ----

// Log-probability gap between the mask's two most likely levels.
double top_two_margin(const LogPmf256& m) {
  auto v = m.log_p;
  std::partial_sort(v.begin(), v.begin() + 2, v.end(), std::greater<>());
  return v[0] - v[1];
}

void constraint_identities(Outcome& o) {
  std::mt19937_64 rng(3);
  constexpr double kMinWeight = 1e-6;  // weights in [1e-6, 1): max/min ratio below 1e6
  constexpr double kRho = 100.0;
  std::uniform_real_distribution<double> w(kMinWeight, 1.0), mu(-0.95, 0.95), ls(-3.0, std::log10(3e-2));
  // At finite rho the mask argmax wins for every PMF of this class only when
  // rho * margin > log(1e6). Masks closer to a tie are redrawn and counted.
  const double needed_margin = std::log(1.0 / kMinWeight) / kRho;
  std::size_t identity_fail = 0, mask_fail = 0, argmax_fail = 0, norm_fail = 0, redrawn = 0, tie_fail = 0;
  double worst_norm = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Pmf256::Array a{};
    for (auto& v : a) v = w(rng);
    const auto p = Pmf256::from_weights(a);
    LogPmf256 mask = lpc_log_mask(mu(rng), std::pow(10.0, ls(rng)));
    while (top_two_margin(mask) <= needed_margin) {
      // Near-tie mask: the result must still be the exact maximizer of log p + rho log m.
      const auto tied = apply_constraint(p, mask, kRho).pmf;
      int best = 0;
      for (int q = 1; q < kNumLevels; ++q)
        if (std::log(p[q]) + kRho * mask.log_p[q] > std::log(p[best]) + kRho * mask.log_p[best]) best = q;
      tie_fail += tied.argmax() != best;
      ++redrawn;
      mask = lpc_log_mask(mu(rng), std::pow(10.0, ls(rng)));
    }
    const auto mask_p = mask.to_pmf();
    if (apply_constraint(p, mask, 0.0).pmf.values() != p.values()) ++identity_fail;
    const auto u = apply_constraint(Pmf256::uniform(), mask, 1.0).pmf;
    for (int q = 0; q < kNumLevels; ++q)
      if (std::abs(u[q] - mask_p[q]) > 1e-9) {
        ++mask_fail;
        break;
      }
    const auto hard = apply_constraint(p, mask, kRho).pmf;
    if (hard.argmax() != mask_p.argmax()) ++argmax_fail;
    for (double rho : {0.0, 0.01, 0.1, 1.0, kRho}) {
      const double err = std::abs(apply_constraint(p, mask, rho).pmf.total() - 1.0);
      worst_norm = std::max(worst_norm, err);
      if (err > 1e-9) ++norm_fail;
    }
    worst_norm = std::max({worst_norm, std::abs(u.total() - 1.0), std::abs(hard.total() - 1.0)});
  }
  o.detail << "1000 PMFs: identity/mask/argmax/normalization failures " << identity_fail << "/" << mask_fail << "/"
           << argmax_fail << "/" << norm_fail << ", worst |sum-1| " << worst_norm << "; " << redrawn
           << " near-tie masks redrawn (margin <= " << needed_margin << "), exact-maximizer failures " << tie_fail;
  o.check(identity_fail == 0, "rho=0 not exact identity");
  o.check(mask_fail == 0, "uniform prior did not return the mask");
  o.check(argmax_fail == 0, "rho=100 argmax differs from mask argmax");
  o.check(tie_fail == 0, "rho=100 result is not the maximizer on near-tie masks");
  o.check(norm_fail == 0 && worst_norm <= 1e-9, "output not normalized within 1e-9");
}

// ---- 4. envelope ----
void envelope(Outcome& o) {
  const int sr = 22050;
  std::vector<double> x(8000);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] = 0.7 * std::sin(2 * std::numbers::pi * 440.0 * t / sr);
  const auto env = envelope_values(x, sr, EnvelopeConfig{});
  double worst_rel = 0.0;
  for (std::size_t t = 1000; t < env.size(); ++t) worst_rel = std::max(worst_rel, std::abs(env[t] - 0.7) / 0.7);

  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 0.15);
  std::vector<double> y(8000), y2(8000);
  for (std::size_t t = 0; t < y.size(); ++t) {
    y[t] = std::clamp(n(rng), -0.3, 0.3);
    y2[t] = 3.0 * y[t];
  }
  double worst_scale = 0.0;
  for (auto rect : {Rectifier::Hilbert, Rectifier::Abs}) {
    EnvelopeConfig c;
    c.rectifier = rect;
    const auto e1 = envelope_values(y, sr, c), e3 = envelope_values(y2, sr, c);
    for (std::size_t t = 0; t < y.size(); ++t) worst_scale = std::max(worst_scale, std::abs(e3[t] - 3.0 * e1[t]));
  }

  std::vector<double> hf(30000);
  for (std::size_t t = 0; t < hf.size(); ++t) hf[t] = std::sin(2 * std::numbers::pi * 5000.0 * t / sr);
  const auto filtered = lowpass(hf, 300.0, sr);
  double peak = 0.0;
  for (std::size_t t = 20000; t < filtered.size(); ++t) peak = std::max(peak, std::abs(filtered[t]));
  const double measured_db = 20.0 * std::log10(peak);
  const double ratio = std::tan(std::numbers::pi * 5000.0 / sr) / std::tan(std::numbers::pi * 300.0 / sr);
  const double analytic_db = -10.0 * std::log10(1.0 + std::pow(ratio, 8));

  o.detail << "440 Hz worst relative deviation " << worst_rel << ", scale error " << worst_scale << ", 5 kHz gain "
           << measured_db << " dB (analytic " << analytic_db << " dB)";
  o.check(worst_rel <= 0.10, "envelope outside +-10% of A");
  o.check(worst_scale <= 1e-9, "scale equivariance above 1e-9");
  o.check(measured_db < -40.0 && analytic_db < -40.0, "5 kHz attenuation below 40 dB");
  o.check(std::abs(measured_db - analytic_db) < 1.0, "measured 5 kHz gain disagrees with analytic response");
}

// ---- 5. synthetic detection ----
void detection(Outcome& o) {
  g_corpus.items = make_corpus(CorpusSpec{});
  DetectorConfig det;  // Hilbert rectifier by default
  det.envelope.rectifier = Rectifier::Hilbert;
  for (const auto& it : g_corpus.items) {
    const SimulatedSampler sim(it.scenario);
    const auto gen = generate(sim, AuxTrack{}, it.scenario.n_samples, it.seed, it.scenario.sample_rate);
    const auto ref = codec_roundtrip(reference_waveform(it.scenario, it.seed));
    g_corpus.scores.push_back(utterance_score(detect_utterance(gen.waveform, ref, det)));
  }
  std::vector<double> s1, sall;
  std::vector<bool> l1, lall;
  for (std::size_t i = 0; i < g_corpus.items.size(); ++i) {
    const auto kind = g_corpus.items[i].kind;
    sall.push_back(g_corpus.scores[i]);
    lall.push_back(kind != UtteranceKind::Clean);
    if (kind != UtteranceKind::TypeII) {
      s1.push_back(g_corpus.scores[i]);
      l1.push_back(kind == UtteranceKind::TypeI);
    }
  }
  const auto c1 = det_curve(s1, l1);
  const auto call = det_curve(sall, lall);
  g_corpus.type1_threshold = c1.eer_threshold;
  o.detail << "Type I vs clean EER " << 100.0 * c1.eer << "% (threshold " << c1.eer_threshold << "), overall EER "
           << 100.0 * call.eer << "% (threshold " << call.eer_threshold << ")";
  o.check(c1.eer <= 0.05, "Type I vs clean EER above 5%");
  o.check(call.eer <= 0.20, "overall EER above 20%");
}

// ---- 6. suppression ----
void suppression(Outcome& o) {
  if (g_corpus.items.empty()) {
    o.check(false, "detection corpus unavailable");
    return;
  }
  PipelineConfig config;
  config.detector.threshold = g_corpus.type1_threshold;
  std::size_t initially = 0, unflagged = 0, max_attempts = 0, length_errors = 0, utterances = 0;
  double final_rho = 0.0;
  for (const auto& it : g_corpus.items) {
    if (it.kind != UtteranceKind::TypeI) continue;
    ++utterances;
    const SimulatedSampler sim(it.scenario);
    const auto ref = reference_waveform(it.scenario, it.seed);
    const auto res = generate_utterance(sim, ref, AuxTrack{}, config, it.seed, std::nullopt, it.id);
    if (res.waveform.size() != ref.size() || res.levels.size() != ref.size()) ++length_errors;
    for (const auto& seg : res.report.segments) {
      max_attempts = std::max(max_attempts, seg.attempts);
      if (!seg.initially_flagged) continue;
      ++initially;
      if (!seg.final_flagged) ++unflagged;
      if (seg.rho_used) final_rho = std::max(final_rho, *seg.rho_used);
    }
  }
  const double frac = initially ? static_cast<double>(unflagged) / initially : 0.0;
  o.detail << utterances << " Type I utterances at threshold " << g_corpus.type1_threshold << ": " << unflagged << "/"
           << initially << " flagged segments unflagged (" << 100.0 * frac << "%), max attempts " << max_attempts
           << ", largest rho used " << final_rho;
  o.check(initially > 0, "no segment was flagged initially");
  o.check(frac >= 0.90, "fewer than 90% of flagged segments unflagged");
  o.check(max_attempts <= 4, "more than 4 attempts on a segment");
  o.check(length_errors == 0, "output length not preserved");
}

// ---- 7. WN inference ----
void wavenet(Outcome& o) {
  WnConfig c;  // full-size dilation schedule, narrow channels
  c.residual_channels = 2;
  c.skip_channels = 2;
  c.aux_dim = 2;
  auto m = WnModel::random(c, 7);
  const std::size_t r = m.receptive_field();
  o.detail << "r=" << r;
  o.check(r == 3070, "receptive field is not 3070");

  std::mt19937_64 rng(8);
  auto levels = [&](std::size_t n) {
    std::vector<LevelIndex> h;
    for (std::size_t i = 0; i < n; ++i) h.emplace_back(static_cast<int>(rng() % 256));
    return h;
  };
  const std::vector<float> aux{0.3f, -0.7f};
  bool valid = true;
  for (int i = 0; i < 10; ++i) {
    const auto p = m.forward(levels(r), aux);
    for (int q = 0; q < kNumLevels; ++q) valid &= p[q] >= 0.0 && std::isfinite(p[q]);
    valid &= std::abs(p.total() - 1.0) < 1e-9;
  }
  o.check(valid, "invalid PMF on random inputs");

  auto flip = [](LevelIndex q) { return LevelIndex(q.value() < 128 ? 255 : 0); };
  auto max_gap = [](const std::vector<double>& x, const std::vector<double>& y) {
    double d = 0.0;
    for (std::size_t q = 0; q < x.size(); ++q) d = std::max(d, std::abs(x[q] - y[q]));
    return d;
  };
  auto as_vector = [](const Pmf256& p) { return std::vector<double>(p.values().begin(), p.values().end()); };

  // Random weights: windowed model vs full-sequence oracle over r + 1 inputs.
  auto wide = levels(r + 1);
  const std::span<const LevelIndex> win(wide);
  const double oracle_gap = max_gap(as_vector(m.forward(win.subspan(1), aux)), oracle::naive_wn_pmf(m, wide, aux));

  // Relay weights keep the oldest sample's influence resolvable in float.
  WnConfig rc;
  rc.skip_channels = 2;
  auto relay = oracle::relay_model(rc);
  const auto o_base = oracle::naive_wn_pmf(relay, wide, {});
  auto at_r1 = wide;
  at_r1[0] = flip(wide[0]);  // distance r + 1 from the predicted sample
  auto at_r = wide;
  at_r[1] = flip(wide[1]);  // distance r
  const bool ignores_r1 = oracle::naive_wn_pmf(relay, at_r1, {}) == o_base;
  const double d_r = max_gap(oracle::naive_wn_pmf(relay, at_r, {}), o_base);
  const auto p_win = as_vector(relay.forward(win.subspan(1), {}));
  const double d_win = max_gap(as_vector(relay.forward(std::span<const LevelIndex>(at_r).subspan(1), {})), p_win);
  const double relay_gap = max_gap(p_win, o_base);
  o.detail << ", oracle gap " << oracle_gap << " (random) / " << relay_gap << " (relay), effect at distance r "
           << d_win << " (oracle " << d_r << ")";
  o.check(ignores_r1, "sample at distance r+1 influences the output");
  o.check(d_r > 1e-4 && d_win > 1e-4, "sample at distance r has no influence");
  o.check(oracle_gap < 1e-5 && relay_gap < 1e-5, "windowed model disagrees with full-sequence oracle");

  // Hand-weight 1-block, 1-channel model.
  WnConfig hc;
  hc.n_blocks = 1;
  hc.dilations = {1};
  hc.residual_channels = 1;
  hc.skip_channels = 1;
  hc.aux_dim = 0;
  WnModel hm(hc);
  for (int q = 0; q < kNumLevels; ++q) {
    hm.embed().data[q] = static_cast<float>(q / 255.0 - 0.5);
    hm.post2_w().data[q] = static_cast<float>(0.02 * (q - 100));
    hm.post2_b().data[q] = static_cast<float>(0.001 * q);
  }
  auto& b = hm.blocks()[0];
  b.filter_w.data = {0.9f, 1.1f};
  b.filter_b.data = {-0.2f};
  b.gate_w.data = {0.4f, -0.8f};
  b.gate_b.data = {0.3f};
  b.res_w.data = {0.5f};
  b.skip_w.data = {2.0f};
  b.skip_b.data = {0.25f};
  hm.post1_w().data = {1.5f};
  hm.post1_b().data = {-0.1f};
  const std::vector<LevelIndex> hh{LevelIndex(30), LevelIndex(220)};
  const double e0 = static_cast<float>(30 / 255.0 - 0.5), e1 = static_cast<float>(220 / 255.0 - 0.5);
  const double z = std::tanh(-0.2 + 0.9 * e0 + 1.1 * e1) / (1.0 + std::exp(-(0.3 + 0.4 * e0 - 0.8 * e1)));
  const double h1 = std::max(-0.1 + 1.5 * std::max(0.25 + 2.0 * z, 0.0), 0.0);
  std::vector<double> ex(kNumLevels);
  double tot = 0.0;
  for (int q = 0; q < kNumLevels; ++q) tot += ex[q] = std::exp(0.001 * q + 0.02 * (q - 100) * h1);
  const auto hp = hm.forward(hh, {});
  double hand_err = 0.0;
  for (int q = 0; q < kNumLevels; ++q) hand_err = std::max(hand_err, std::abs(hp[q] - ex[q] / tot));
  o.detail << ", hand-weight error " << hand_err;
  o.check(hand_err <= 1e-6, "hand-weight model differs from closed form");

  // Seeded generation with the reduced model.
  WnConfig gc;
  gc.n_blocks = 4;
  gc.dilations = {1, 2, 4, 8};
  gc.residual_channels = 16;
  gc.skip_channels = 16;
  gc.aux_dim = 0;
  const auto gm = WnModel::random(gc, 9);
  const auto a1 = wn_generate(gm, AuxTrack{}, 8000, 123);
  const auto a2 = wn_generate(gm, AuxTrack{}, 8000, 123);
  o.check(a1.levels == a2.levels && a1.waveform.samples() == a2.waveform.samples(),
          "seeded generation not bit-reproducible");
}

// ---- 8. DET ----

// EER recomputed from brute-force-enumerated operating points.
double brute_force_eer(const std::vector<double>& s, const std::vector<bool>& l) {
  std::vector<double> cands{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  for (double v : s) {
    cands.push_back(v);
    cands.push_back(std::nextafter(v, -std::numeric_limits<double>::infinity()));
  }
  std::vector<std::pair<double, double>> pts;  // (far, frr)
  for (double t : cands) {
    double pos = 0, neg = 0, miss = 0, fa = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const bool flagged = s[i] > t;
      if (l[i]) ++pos, miss += !flagged;
      else ++neg, fa += flagged;
    }
    pts.emplace_back(miss / pos, fa / neg);
  }
  std::sort(pts.begin(), pts.end(), [](auto a, auto b) { return a.first != b.first ? a.first < b.first : a.second > b.second; });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  for (auto [far, frr] : pts)
    if (far == frr) return far;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double g0 = pts[i].first - pts[i].second, g1 = pts[i + 1].first - pts[i + 1].second;
    if (g0 < 0 && g1 > 0) return pts[i].first + (-g0 / (g1 - g0)) * (pts[i + 1].first - pts[i].first);
  }
  return std::nan("");
}

void det(Outcome& o) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> n(0.0, 1.0);
  std::size_t mono_fail = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t size = 2 + rng() % 100;
    std::vector<double> s(size);
    std::vector<bool> l(size);
    for (std::size_t i = 0; i < size; ++i) {
      l[i] = rng() % 2;
      s[i] = (trial % 2 ? std::round(n(rng) * 3.0) : n(rng)) + (l[i] ? 0.5 : 0.0);
    }
    l[0] = true;
    l[1] = false;
    const auto c = det_curve(s, l);
    bool ok = c.points.front().far == 0.0 && c.points.front().frr == 1.0 && c.points.back().far == 1.0 &&
              c.points.back().frr == 0.0;
    for (std::size_t i = 1; i < c.points.size(); ++i) {
      ok &= c.points[i].far >= c.points[i - 1].far && c.points[i].frr <= c.points[i - 1].frr;
    }
    mono_fail += !ok;
  }

  std::size_t sep_fail = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s;
    std::vector<bool> l;
    const std::size_t np = 1 + rng() % 20, nn = 1 + rng() % 20;
    for (std::size_t i = 0; i < np; ++i) s.push_back(2.0 + std::abs(n(rng))), l.push_back(true);
    for (std::size_t i = 0; i < nn; ++i) s.push_back(1.0 - std::abs(n(rng))), l.push_back(false);
    sep_fail += det_curve(s, l).eer != 0.0;
  }

  // Every arrangement of up to 8 items: labels x tie structure over the sorted order.
  std::size_t sets = 0, bf_fail = 0;
  for (std::size_t size = 2; size <= 8; ++size) {
    for (std::uint32_t lab = 1; lab + 1 < (1u << size); ++lab) {
      for (std::uint32_t ties = 0; ties < (1u << (size - 1)); ++ties) {
        std::vector<double> s(size);
        std::vector<bool> l(size);
        double v = 0.0;
        for (std::size_t i = 0; i < size; ++i) {
          if (i > 0 && !((ties >> (i - 1)) & 1u)) v += 1.0;
          s[i] = v;
          l[i] = (lab >> i) & 1u;
        }
        ++sets;
        const double swept = det_curve(s, l).eer, brute = brute_force_eer(s, l);
        if (!(std::abs(swept - brute) <= 1e-12)) ++bf_fail;
      }
    }
  }
  o.detail << "1000 random sets: " << mono_fail << " monotonicity failures; separable EER failures " << sep_fail
           << "/100; brute force disagreements " << bf_fail << "/" << sets;
  o.check(mono_fail == 0, "FAR/FRR not monotone");
  o.check(sep_fail == 0, "nonzero EER on separable data");
  o.check(bf_fail == 0, "sweep EER disagrees with brute-force enumeration");
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "mu-law codec", 1.0, codec},
      {2, "LPC AR(2) oracle", 5.0, lpc_oracle},
      {3, "distribution-constraint identities", 5.0, constraint_identities},
      {4, "envelope accuracy and low-pass attenuation", 5.0, envelope},
      {5, "synthetic collapse detection EER", 120.0, detection},
      {6, "suppression by constrained regeneration", 120.0, suppression},
      {7, "WaveNet inference", 30.0, wavenet},
      {8, "DET curve properties", 10.0, det},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= c.budget_s) {
      std::ostringstream msg;
      msg << "runtime " << secs << " s exceeds " << c.budget_s << " s";
      o.check(false, msg.str());
    }
    failures += !o.pass;
    std::printf("[%s] criterion %d: %s (%.2f s / %.0f s) -- %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                c.budget_s, o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
