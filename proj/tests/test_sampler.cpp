#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "wavguard/sampler.hpp"
#include "wavguard/simulator.hpp"

using namespace wavguard;

TEST(StreamUniform, RangeAndDeterminism) {
  std::set<double> seen;
  for (std::size_t t = 0; t < 1000; ++t) {
    const double u = stream_uniform(42, t);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_EQ(u, stream_uniform(42, t));
    seen.insert(u);
  }
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(stream_uniform(1, 5), stream_uniform(2, 5));
}

TEST(DrawLevel, InverseCdf) {
  Pmf256::Array w{};
  w[10] = 0.25;
  w[20] = 0.75;
  const auto p = Pmf256::from_weights(w);
  EXPECT_EQ(draw_level(p, 0.0).value(), 10);
  EXPECT_EQ(draw_level(p, 0.2499).value(), 10);
  EXPECT_EQ(draw_level(p, 0.25).value(), 20);
  EXPECT_EQ(draw_level(p, 0.9999999).value(), 20);
}

TEST(HistoryWindow, PadsWithSilence) {
  const std::vector<LevelIndex> lv{LevelIndex(1), LevelIndex(2), LevelIndex(3)};
  std::vector<LevelIndex> out;
  history_window(lv, 2, 4, out);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(out[0].value(), kSilenceLevel);
  EXPECT_EQ(out[1].value(), kSilenceLevel);
  EXPECT_EQ(out[2].value(), 1);
  EXPECT_EQ(out[3].value(), 2);
  history_window(lv, 3, 2, out);
  EXPECT_EQ(out[0].value(), 2);
  EXPECT_EQ(out[1].value(), 3);
}

TEST(AuxTrackType, UpsamplesByRepetition) {
  AuxTrack a{3, 2, 10, {1, 2, 3, 4, 5, 6}};
  a.validate();
  EXPECT_EQ(a.at_sample(0)[0], 1.0f);
  EXPECT_EQ(a.at_sample(9)[1], 2.0f);
  EXPECT_EQ(a.at_sample(10)[0], 3.0f);
  EXPECT_EQ(a.at_sample(29)[1], 6.0f);
  EXPECT_TRUE(a.covers(30));
  EXPECT_FALSE(a.covers(31));
  AuxTrack bad{2, 2, 1, {1, 2, 3}};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Simulator, CleanPmfPeaksNearTrackedMean) {
  CollapseScenario s;
  const SimulatedSampler sim(s);
  const std::vector<LevelIndex> h{quantize(0.1), quantize(0.2)};
  const auto p = sim.predict(50, h, {});
  EXPECT_NEAR(p.total(), 1.0, 1e-12);
  const double two_cos = 2.0 * std::cos(2.0 * std::numbers::pi * s.frequency / s.sample_rate);
  const double mean = 0.8 * (two_cos * decode(h[1]) - decode(h[0])) + 0.2 * s.base(50);
  EXPECT_LE(std::abs(decode(LevelIndex(p.argmax())) - mean), 0.01);
}

TEST(Simulator, TypeIMassAtExtremes) {
  CollapseScenario s;
  s.injections = {{100, 50, CollapseKind::TypeI}};
  const SimulatedSampler sim(s);
  const std::vector<LevelIndex> h{LevelIndex(128), LevelIndex(128)};
  const auto p = sim.predict(120, h, {});
  double extreme = 0.0;
  for (int i = 0; i < 4; ++i) extreme += p[i] + p[255 - i];
  EXPECT_NEAR(extreme, 0.9, 1e-6);
  EXPECT_LT(sim.predict(99, h, {})[255], 1e-6);
}

TEST(Simulator, TypeIISpikeFollowsBaseSign) {
  CollapseScenario s;
  s.phase = 0.0;
  s.injections = {{10, 5, CollapseKind::TypeII}};
  const SimulatedSampler sim(s);
  const std::vector<LevelIndex> h{LevelIndex(128), LevelIndex(128)};
  const auto p = sim.predict(12, h, {});
  EXPECT_GT(p[255], 0.98 - 1e-6);  // base sinusoid is positive early on
}

TEST(Simulator, RejectsBadScenarios) {
  CollapseScenario s;
  s.injections = {{22000, 100, CollapseKind::TypeI}};
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.injections = {{100, 100, CollapseKind::TypeI}, {150, 10, CollapseKind::TypeII}};
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Simulator, CorpusComposition) {
  const auto corpus = make_corpus(CorpusSpec{});
  ASSERT_EQ(corpus.size(), 200u);
  std::size_t clean = 0, t1 = 0, t2 = 0;
  for (const auto& it : corpus) {
    EXPECT_EQ(it.scenario.n_samples, 22050u);
    EXPECT_GE(it.scenario.frequency, 100.0);
    EXPECT_LE(it.scenario.frequency, 400.0);
    switch (it.kind) {
      case UtteranceKind::Clean:
        ++clean;
        EXPECT_TRUE(it.scenario.injections.empty());
        break;
      case UtteranceKind::TypeI:
        ++t1;
        ASSERT_EQ(it.scenario.injections.size(), 1u);
        EXPECT_GE(it.scenario.injections[0].length, 2000u);
        EXPECT_LE(it.scenario.injections[0].length, 6000u);
        break;
      case UtteranceKind::TypeII:
        ++t2;
        EXPECT_GE(it.scenario.injections.size(), 1u);
        EXPECT_LE(it.scenario.injections.size(), 3u);
        for (const auto& inj : it.scenario.injections) {
          EXPECT_GE(inj.length, 5u);
          EXPECT_LE(inj.length, 15u);
        }
        break;
    }
  }
  EXPECT_EQ(clean, 100u);
  EXPECT_EQ(t1, 60u);
  EXPECT_EQ(t2, 40u);
}

TEST(Generate, SeededReproducibleAndZeroLength) {
  CollapseScenario s;
  const SimulatedSampler sim(s);
  const auto a = generate(sim, AuxTrack{}, 3000, 5, 22050);
  const auto b = generate(sim, AuxTrack{}, 3000, 5, 22050);
  EXPECT_EQ(a.levels, b.levels);
  const auto c = generate(sim, AuxTrack{}, 3000, 6, 22050);
  EXPECT_NE(a.levels, c.levels);
  EXPECT_EQ(generate(sim, AuxTrack{}, 0, 5, 22050).waveform.size(), 0u);
}

TEST(Generate, CleanSimulatorFollowsSinusoid) {
  CollapseScenario s;
  const SimulatedSampler sim(s);
  const auto g = generate(sim, AuxTrack{}, 4000, 1, 22050);
  double sq = 0.0, peak = 0.0;
  for (std::size_t t = 200; t < 4000; ++t) {
    sq += std::pow(g.waveform[t] - s.base(t), 2);
    peak = std::max(peak, std::abs(g.waveform[t]));
  }
  EXPECT_LT(std::sqrt(sq / 3800.0), 0.2 * s.amplitude);  // scale 0.01 noise plus tracking lag
  EXPECT_LT(peak, 2.0 * s.amplitude);
}
