#ifndef WAVGUARD_IO_HPP
#define WAVGUARD_IO_HPP

// File formats shared by the CLI stages: JSON config, scenario, LPC sidecar and
// reports; binary aux tracks; CSV score and DET tables.

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "wavguard/cssd.hpp"
#include "wavguard/envelope.hpp"
#include "wavguard/lpc.hpp"
#include "wavguard/pipeline.hpp"
#include "wavguard/sampler.hpp"
#include "wavguard/simulator.hpp"

namespace wavguard {

using nlohmann::json;

class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw FormatError("write failed: " + path);
}

// ---- enums ----

inline std::string to_string(Rectifier r) { return r == Rectifier::Hilbert ? "hilbert" : "abs"; }

inline Rectifier parse_rectifier(const std::string& s) {
  if (s == "hilbert") return Rectifier::Hilbert;
  if (s == "abs") return Rectifier::Abs;
  throw FormatError("unknown rectifier '" + s + "' (expected abs or hilbert)");
}

inline std::string to_string(ScoreKind k) {
  switch (k) {
    case ScoreKind::MaxDiff: return "max_diff";
    case ScoreKind::MeanAbsDiff: return "mean_abs_diff";
    case ScoreKind::PowerDiff: return "power_diff";
  }
  return "?";
}

inline ScoreKind parse_score_kind(const std::string& s) {
  if (s == "max_diff") return ScoreKind::MaxDiff;
  if (s == "mean_abs_diff") return ScoreKind::MeanAbsDiff;
  if (s == "power_diff") return ScoreKind::PowerDiff;
  throw FormatError("unknown score kind '" + s + "'");
}

// ---- config ----
//
// Every key is optional; missing keys keep their defaults.
// {
//   "segment_length": 4000, "threshold": <calibrated>, "score_kind": "max_diff",
//   "rectifier": "hilbert", "slot_length": 200, "lowpass_cutoff_hz": 300,
//   "hilbert_context": 400, "lpc_order": 30, "frame_length_ms": 20,
//   "frame_shift_ms": 5, "rho_schedule": [0.01, 0.1, 1.0]
// }

inline json config_to_json(const PipelineConfig& c) {
  return json{{"segment_length", c.detector.segment_length},
              {"threshold", c.detector.threshold},
              {"score_kind", to_string(c.detector.score_kind)},
              {"rectifier", to_string(c.detector.envelope.rectifier)},
              {"slot_length", c.detector.envelope.slot_length},
              {"lowpass_cutoff_hz", c.detector.envelope.lowpass_cutoff},
              {"hilbert_context", c.detector.envelope.hilbert_context},
              {"lpc_order", c.lpc.order},
              {"frame_length_ms", c.lpc.frame_length_ms},
              {"frame_shift_ms", c.lpc.frame_shift_ms},
              {"rho_schedule", c.policy.rho_schedule}};
}

inline PipelineConfig config_from_json(const json& j) {
  static const char* known[] = {"segment_length", "threshold",      "score_kind",      "rectifier",
                                "slot_length",    "lowpass_cutoff_hz", "hilbert_context", "lpc_order",
                                "frame_length_ms", "frame_shift_ms", "rho_schedule"};
  if (!j.is_object()) throw FormatError("config: expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) == std::end(known)) {
      throw FormatError("config: unknown key '" + key + "'");
    }
  }
  PipelineConfig c;
  try {
    c.detector.segment_length = j.value("segment_length", c.detector.segment_length);
    c.detector.threshold = j.value("threshold", c.detector.threshold);
    c.detector.score_kind = parse_score_kind(j.value("score_kind", to_string(c.detector.score_kind)));
    c.detector.envelope.rectifier = parse_rectifier(j.value("rectifier", to_string(c.detector.envelope.rectifier)));
    c.detector.envelope.slot_length = j.value("slot_length", c.detector.envelope.slot_length);
    c.detector.envelope.lowpass_cutoff = j.value("lowpass_cutoff_hz", c.detector.envelope.lowpass_cutoff);
    c.detector.envelope.hilbert_context = j.value("hilbert_context", c.detector.envelope.hilbert_context);
    c.lpc.order = j.value("lpc_order", c.lpc.order);
    c.lpc.frame_length_ms = j.value("frame_length_ms", c.lpc.frame_length_ms);
    c.lpc.frame_shift_ms = j.value("frame_shift_ms", c.lpc.frame_shift_ms);
    if (j.contains("rho_schedule")) {
      c.policy.rho_schedule = j.at("rho_schedule").get<std::vector<double>>();
      c.policy.max_regenerations = c.policy.rho_schedule.size();
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  c.policy.validate();
  return c;
}

inline PipelineConfig load_config(const std::string& path) { return config_from_json(read_json_file(path)); }

// ---- scenario ----
//
// Single utterance:
//   {"sample_rate": 22050, "n_samples": 22050, "frequency": 220, "amplitude": 0.3,
//    "phase": 0, "generator_noise": 0.01, "reference_noise": 0.005, "seed": 1,
//    "injections": [{"start": 8000, "length": 4000, "kind": "type1"}]}
// Corpus:
//   {"corpus": {"clean": 100, "type1": 60, "type2": 40, "n_samples": 22050,
//               "sample_rate": 22050, "seed": 2024}}

inline std::string to_string(CollapseKind k) { return k == CollapseKind::TypeI ? "type1" : "type2"; }

inline CollapseKind parse_collapse_kind(const std::string& s) {
  if (s == "type1") return CollapseKind::TypeI;
  if (s == "type2") return CollapseKind::TypeII;
  throw FormatError("unknown injection kind '" + s + "' (expected type1 or type2)");
}

inline json scenario_to_json(const CollapseScenario& s, std::uint64_t seed) {
  json inj = json::array();
  for (const auto& i : s.injections) inj.push_back({{"start", i.start}, {"length", i.length}, {"kind", to_string(i.kind)}});
  return json{{"sample_rate", s.sample_rate},         {"n_samples", s.n_samples},
              {"frequency", s.frequency},             {"amplitude", s.amplitude},
              {"phase", s.phase},                     {"generator_noise", s.generator_noise},
              {"reference_noise", s.reference_noise}, {"seed", seed},
              {"injections", inj}};
}

struct ScenarioFile {
  CollapseScenario scenario;
  std::uint64_t seed = 1;
};

inline ScenarioFile scenario_from_json(const json& j) {
  ScenarioFile f;
  auto& s = f.scenario;
  try {
    s.sample_rate = j.value("sample_rate", s.sample_rate);
    s.n_samples = j.value("n_samples", s.n_samples);
    s.frequency = j.value("frequency", s.frequency);
    s.amplitude = j.value("amplitude", s.amplitude);
    s.phase = j.value("phase", s.phase);
    s.generator_noise = j.value("generator_noise", s.generator_noise);
    s.reference_noise = j.value("reference_noise", s.reference_noise);
    f.seed = j.value("seed", f.seed);
    if (j.contains("injections")) {
      for (const auto& i : j.at("injections")) {
        s.injections.push_back({i.at("start").get<std::size_t>(), i.at("length").get<std::size_t>(),
                                parse_collapse_kind(i.at("kind").get<std::string>())});
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("scenario: ") + e.what());
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  return f;
}

inline CorpusSpec corpus_from_json(const json& j) {
  CorpusSpec c;
  try {
    c.n_clean = j.value("clean", c.n_clean);
    c.n_type1 = j.value("type1", c.n_type1);
    c.n_type2 = j.value("type2", c.n_type2);
    c.n_samples = j.value("n_samples", c.n_samples);
    c.sample_rate = j.value("sample_rate", c.sample_rate);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw FormatError(std::string("corpus: ") + e.what());
  }
  return c;
}

// ---- LPC sidecar ----
//
// {"sample_rate": sr, "order": l,
//  "grid": {"frame_length": n, "frame_shift": n, "count": n},
//  "frames": [{"coeffs": [...], "residual_variance": v, "degenerate": b}, ...],
//  "envelope": {"rectifier": ..., "slot_length": ..., "lowpass_cutoff_hz": ...,
//               "hilbert_context": ..., "values": [...]}}   (envelope optional)

inline json track_to_json(const LpcTrack& t, int sample_rate, const Envelope* env = nullptr) {
  json frames = json::array();
  for (const auto& f : t.frames) {
    frames.push_back({{"coeffs", f.coeffs}, {"residual_variance", f.residual_variance}, {"degenerate", f.degenerate}});
  }
  json j{{"sample_rate", sample_rate},
         {"order", t.order},
         {"grid", {{"frame_length", t.grid.frame_length}, {"frame_shift", t.grid.frame_shift}, {"count", t.grid.count}}},
         {"frames", frames}};
  if (env != nullptr) {
    j["envelope"] = {{"rectifier", to_string(env->config.rectifier)},
                     {"slot_length", env->config.slot_length},
                     {"lowpass_cutoff_hz", env->config.lowpass_cutoff},
                     {"hilbert_context", env->config.hilbert_context},
                     {"values", env->values}};
  }
  return j;
}

inline LpcTrack track_from_json(const json& j) {
  LpcTrack t;
  try {
    t.order = j.at("order").get<std::size_t>();
    const auto& g = j.at("grid");
    t.grid.frame_length = g.at("frame_length").get<std::size_t>();
    t.grid.frame_shift = g.at("frame_shift").get<std::size_t>();
    t.grid.count = g.at("count").get<std::size_t>();
    for (const auto& f : j.at("frames")) {
      LpcFrame fr;
      fr.coeffs = f.at("coeffs").get<std::vector<double>>();
      fr.residual_variance = f.at("residual_variance").get<double>();
      fr.degenerate = f.value("degenerate", false);
      if (fr.coeffs.size() != t.order) throw FormatError("sidecar: frame coefficient count != order");
      if (!(fr.residual_variance >= 0.0)) throw FormatError("sidecar: negative residual variance");
      t.frames.push_back(std::move(fr));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("sidecar: ") + e.what());
  }
  if (t.frames.size() != t.grid.count) throw FormatError("sidecar: frame count != grid count");
  if (t.grid.frame_shift < 1 || t.grid.frame_length < t.grid.frame_shift) throw FormatError("sidecar: invalid grid");
  return t;
}

// ---- aux track: "WGAX" u32 version u32 rows u32 cols u32 frame_shift, f32[rows*cols] (LE) ----

inline std::vector<unsigned char> encode_aux(const AuxTrack& a) {
  a.validate();
  std::vector<unsigned char> out{'W', 'G', 'A', 'X'};
  auto put = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
  };
  put(1);
  put(static_cast<std::uint32_t>(a.rows));
  put(static_cast<std::uint32_t>(a.cols));
  put(static_cast<std::uint32_t>(a.frame_shift));
  for (float f : a.data) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put(bits);
  }
  return out;
}

inline AuxTrack decode_aux(const std::vector<unsigned char>& b) {
  if (b.size() < 20 || std::memcmp(b.data(), "WGAX", 4) != 0) throw FormatError("aux: bad magic or header");
  auto u32 = [&](std::size_t pos) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[pos + i]) << (8 * i);
    return v;
  };
  if (u32(4) != 1) throw FormatError("aux: unsupported version");
  AuxTrack a;
  a.rows = u32(8);
  a.cols = u32(12);
  a.frame_shift = u32(16);
  if (b.size() != 20 + 4 * a.rows * a.cols) throw FormatError("aux: size does not match header");
  a.data.resize(a.rows * a.cols);
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const std::uint32_t bits = u32(20 + 4 * i);
    std::memcpy(&a.data[i], &bits, 4);
  }
  try {
    a.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  return a;
}

inline std::vector<unsigned char> read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_binary_file(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed: " + path);
}

// ---- reports ----

inline json detection_to_json(const std::string& utterance_id, const std::vector<SegmentVerdict>& verdicts) {
  json segs = json::array();
  std::size_t flagged = 0;
  for (const auto& v : verdicts) {
    segs.push_back({{"index", v.segment_index}, {"score", v.score}, {"flagged", v.flagged}});
    flagged += v.flagged;
  }
  return json{{"utterance_id", utterance_id}, {"segments", segs}, {"n_flagged", flagged}};
}

inline json report_to_json(const UtteranceReport& r) {
  json segs = json::array();
  for (const auto& s : r.segments) {
    segs.push_back({{"index", s.index},
                    {"begin", s.begin},
                    {"length", s.length},
                    {"attempts", s.attempts},
                    {"scores", s.scores},
                    {"rho_used", s.rho_used ? json(*s.rho_used) : json(nullptr)},
                    {"initially_flagged", s.initially_flagged},
                    {"final_flagged", s.final_flagged},
                    {"fallback_events", s.fallback_events}});
  }
  return json{{"utterance_id", r.utterance_id},
              {"n_samples", r.n_samples},
              {"threshold", r.threshold},
              {"segments", segs},
              {"n_flagged", r.n_initially_flagged()},
              {"n_final_flagged", r.n_final_flagged()},
              {"n_regenerations", r.n_regenerations()},
              {"n_fallback_events", r.n_fallback_events()},
              {"sampler_calls", r.sampler_calls}};
}

// ---- CSV ----

struct ScoreRow {
  std::string utterance_id;
  double score = 0.0;
  bool label = false;  // true = collapsed
};

inline bool parse_label(const std::string& s) {
  if (s == "1" || s == "true" || s == "collapsed") return true;
  if (s == "0" || s == "false" || s == "clean" || s == "normal") return false;
  throw FormatError("scores: bad label '" + s + "'");
}

// Columns utterance_id,score,label; a leading header row is skipped.
inline std::vector<ScoreRow> parse_scores_csv(std::istream& in) {
  std::vector<ScoreRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string id, score, label;
    if (!std::getline(ss, id, ',') || !std::getline(ss, score, ',') || !std::getline(ss, label, ',')) {
      throw FormatError("scores: line " + std::to_string(line_no) + ": expected 3 columns");
    }
    if (line_no == 1 && score == "score") continue;
    ScoreRow row;
    row.utterance_id = id;
    try {
      std::size_t used = 0;
      row.score = std::stod(score, &used);
      if (used != score.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw FormatError("scores: line " + std::to_string(line_no) + ": bad score '" + score + "'");
    }
    row.label = parse_label(label);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string format_scores_csv(const std::vector<ScoreRow>& rows) {
  std::ostringstream out;
  out << std::setprecision(17) << "utterance_id,score,label\n";
  for (const auto& r : rows) out << r.utterance_id << ',' << r.score << ',' << (r.label ? 1 : 0) << '\n';
  return out.str();
}

inline std::string format_det_csv(const DetCurve& c) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "# far = miss rate on collapsed items; frr = false-alarm rate on normal items; flagged when score > threshold\n";
  out << "threshold,far,frr\n";
  for (const auto& p : c.points) out << p.threshold << ',' << p.far << ',' << p.frr << '\n';
  out << "eer," << c.eer << '\n';
  out << "eer_threshold," << c.eer_threshold << '\n';
  return out.str();
}

}  // namespace wavguard

#endif  // WAVGUARD_IO_HPP
