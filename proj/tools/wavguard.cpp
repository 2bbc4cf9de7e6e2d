// wavguard command-line front end.
//
//   analyze   reference wav -> LPC track + envelope sidecar (JSON)
//   detect    generated vs reference wav -> per-segment report (JSON line),
//             or a whole simulated corpus -> scores CSV
//   generate  model or simulator + reference -> wav + generation report
//   simulate  scenario or corpus spec -> labeled wav pairs
//   det       scores CSV -> DET curve CSV + EER
//   model-init  random-weight model file

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "wavguard/wavguard.hpp"

namespace fs = std::filesystem;
using namespace wavguard;

namespace {

struct DetectorFlags {
  std::string config_path;
  std::optional<double> threshold;
  bool hilbert = false;
  bool abs = false;
  std::string score_kind;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file (defaults are documented in README)");
    app->add_option("--threshold", threshold, "Detection threshold override");
    auto* h = app->add_flag("--hilbert", hilbert, "Hilbert-magnitude rectifier (default)");
    app->add_flag("--abs", abs, "Absolute-value rectifier")->excludes(h);
    app->add_option("--score", score_kind, "Score kind: max_diff, mean_abs_diff, power_diff");
  }

  PipelineConfig resolve() const {
    PipelineConfig c = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    if (threshold) c.detector.threshold = *threshold;
    if (hilbert) c.detector.envelope.rectifier = Rectifier::Hilbert;
    if (abs) c.detector.envelope.rectifier = Rectifier::Abs;
    if (!score_kind.empty()) c.detector.score_kind = parse_score_kind(score_kind);
    return c;
  }
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

int run_analyze(const std::string& ref_path, const std::string& out, const DetectorFlags& flags) {
  const auto config = flags.resolve();
  const Waveform ref = wav_read(ref_path);
  const auto prep = prepare(ref, config.lpc, config.detector.envelope);
  emit(out, track_to_json(prep.lpc, ref.sample_rate(), &prep.envelope).dump() + "\n");
  return 0;
}

int run_detect(const std::string& gen_path, const std::string& ref_path, const std::string& id,
               const std::string& out, bool raw_ref, const DetectorFlags& flags) {
  const auto config = flags.resolve();
  const Waveform gen = wav_read(gen_path);
  Waveform ref = wav_read(ref_path);
  if (!raw_ref) ref = codec_roundtrip(ref);
  const auto verdicts = detect_utterance(gen, ref, config.detector);
  const std::string uid = id.empty() ? fs::path(gen_path).stem().string() : id;
  emit(out, detection_to_json(uid, verdicts).dump() + "\n");
  return 0;
}

// Scores every pair listed in <dir>/labels.csv written by `simulate`.
int run_detect_corpus(const std::string& dir, const std::string& out, bool raw_ref, const DetectorFlags& flags) {
  const auto config = flags.resolve();
  std::ifstream labels(fs::path(dir) / "labels.csv");
  if (!labels) throw FormatError("cannot open " + (fs::path(dir) / "labels.csv").string());
  std::vector<ScoreRow> rows;
  std::string line;
  std::getline(labels, line);  // header
  while (std::getline(labels, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id, kind, label;
    std::getline(ss, id, ',');
    std::getline(ss, kind, ',');
    std::getline(ss, label, ',');
    const Waveform gen = wav_read((fs::path(dir) / (id + "_gen.wav")).string());
    Waveform ref = wav_read((fs::path(dir) / (id + "_ref.wav")).string());
    if (!raw_ref) ref = codec_roundtrip(ref);
    rows.push_back({id, utterance_score(detect_utterance(gen, ref, config.detector)), parse_label(label)});
  }
  emit(out, format_scores_csv(rows));
  return 0;
}

struct GenerateArgs {
  std::string model, scenario, ref, aux, track, out, report;
  std::uint64_t seed = 1;
  std::optional<std::size_t> n_samples;
  bool no_detect = false;
};

int run_generate(const GenerateArgs& a, const DetectorFlags& flags) {
  auto config = flags.resolve();
  if (a.no_detect) config.detector.threshold = std::numeric_limits<double>::infinity();
  std::unique_ptr<Sampler> sampler;
  std::optional<Waveform> ref;
  std::string uid = fs::path(a.out).stem().string();
  if (!a.model.empty()) {
    sampler = std::make_unique<WnModel>(load_weights(a.model));
  } else {
    const auto sf = scenario_from_json(read_json_file(a.scenario));
    sampler = std::make_unique<SimulatedSampler>(sf.scenario);
    if (a.ref.empty()) ref = reference_waveform(sf.scenario, sf.seed);
  }
  if (!a.ref.empty()) ref = wav_read(a.ref);
  if (!ref) throw std::invalid_argument("generate: --ref is required with --model");

  AuxTrack aux;
  if (!a.aux.empty()) aux = decode_aux(read_binary_file(a.aux));
  if (sampler->aux_dim() > 0 && a.aux.empty()) throw std::invalid_argument("generate: model needs --aux conditioning");

  PreparedReference prep = prepare(*ref, config.lpc, config.detector.envelope);
  if (!a.track.empty()) prep.lpc = track_from_json(read_json_file(a.track));
  const std::size_t n = a.n_samples.value_or(ref->size());
  const auto result = generate_utterance(*sampler, prep, aux, config, a.seed, n, uid);
  wav_write(a.out, result.waveform);
  if (!a.report.empty()) write_text_file(a.report, report_to_json(result.report).dump(2) + "\n");
  const auto& r = result.report;
  std::cerr << "generated " << n << " samples; " << r.n_initially_flagged() << " segment(s) flagged, "
            << r.n_final_flagged() << " still flagged after " << r.n_regenerations() << " regeneration(s)\n";
  return 0;
}

int run_simulate(const std::string& scenario_path, const std::string& out_dir) {
  const json j = read_json_file(scenario_path);
  std::vector<CorpusItem> items;
  if (j.contains("corpus")) {
    items = make_corpus(corpus_from_json(j.at("corpus")));
  } else {
    const auto sf = scenario_from_json(j);
    CorpusItem item;
    item.id = fs::path(scenario_path).stem().string();
    item.scenario = sf.scenario;
    item.seed = sf.seed;
    bool has_type1 = false;
    for (const auto& inj : sf.scenario.injections) has_type1 |= inj.kind == CollapseKind::TypeI;
    item.kind = sf.scenario.injections.empty() ? UtteranceKind::Clean : has_type1 ? UtteranceKind::TypeI : UtteranceKind::TypeII;
    items.push_back(std::move(item));
  }
  fs::create_directories(out_dir);
  std::ostringstream labels;
  labels << "utterance_id,kind,label\n";
  for (const auto& it : items) {
    const SimulatedSampler sim(it.scenario);
    const auto gen = generate(sim, AuxTrack{}, it.scenario.n_samples, it.seed, it.scenario.sample_rate);
    wav_write((fs::path(out_dir) / (it.id + "_gen.wav")).string(), gen.waveform);
    wav_write((fs::path(out_dir) / (it.id + "_ref.wav")).string(), reference_waveform(it.scenario, it.seed));
    write_text_file((fs::path(out_dir) / (it.id + ".json")).string(), scenario_to_json(it.scenario, it.seed).dump(2) + "\n");
    labels << it.id << ',' << to_string(it.kind) << ',' << (it.kind == UtteranceKind::Clean ? 0 : 1) << '\n';
  }
  write_text_file((fs::path(out_dir) / "labels.csv").string(), labels.str());
  std::cerr << "wrote " << items.size() << " utterance(s) to " << out_dir << "\n";
  return 0;
}

int run_det(const std::string& scores_path, const std::string& out) {
  std::ifstream in(scores_path);
  if (!in) throw FormatError("cannot open " + scores_path);
  const auto rows = parse_scores_csv(in);
  std::vector<double> scores;
  std::vector<bool> labels;
  for (const auto& r : rows) {
    scores.push_back(r.score);
    labels.push_back(r.label);
  }
  const auto curve = det_curve(scores, labels);
  emit(out, format_det_csv(curve));
  std::cerr << "EER " << curve.eer << " at threshold " << curve.eer_threshold
            << " (far = miss rate on collapsed, frr = false-alarm rate on normal)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collapsed-speech detection and suppression for autoregressive waveform generation"};
  app.require_subcommand(1);

  DetectorFlags flags;

  std::string ref_path, out_path;
  auto* analyze = app.add_subcommand("analyze", "Precompute LPC track and envelope of a reference wav");
  analyze->add_option("--ref", ref_path, "Reference wav")->required();
  analyze->add_option("--out", out_path, "Sidecar JSON output (default stdout)");
  flags.add_to(analyze);

  std::string gen_path, id, corpus_dir;
  bool raw_ref = false;
  auto* detect = app.add_subcommand("detect", "Score generated segments against a reference");
  auto* gen_opt = detect->add_option("--gen", gen_path, "Generated wav");
  auto* ref_opt = detect->add_option("--ref", ref_path, "Reference wav");
  auto* corpus_opt = detect->add_option("--corpus", corpus_dir, "Directory written by `simulate`; emits scores CSV");
  corpus_opt->excludes(gen_opt)->excludes(ref_opt);
  detect->add_option("--id", id, "Utterance id in the report (default: generated file stem)");
  detect->add_option("--out", out_path, "Output file (default stdout)");
  detect->add_flag("--raw-ref", raw_ref, "Skip the mu-law round trip of the reference");
  flags.add_to(detect);

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "Generate with detection and constrained regeneration");
  auto* model_opt = gen->add_option("--model", ga.model, "Model weight file");
  auto* sim_opt = gen->add_option("--simulate", ga.scenario, "Scenario JSON for the collapse simulator");
  model_opt->excludes(sim_opt);
  gen->add_option("--ref", ga.ref, "Collapse-free reference wav (optional with --simulate)");
  gen->add_option("--aux", ga.aux, "Binary aux conditioning track");
  gen->add_option("--track", ga.track, "LPC sidecar from `analyze` (replaces on-the-fly analysis)");
  gen->add_option("--out", ga.out, "Output wav")->required();
  gen->add_option("--report", ga.report, "Generation report JSON");
  gen->add_option("--seed", ga.seed, "Base seed");
  gen->add_option("--n-samples", ga.n_samples, "Samples to generate (default: reference length)");
  gen->add_flag("--no-detect", ga.no_detect, "Disable detection (plain generation)");
  flags.add_to(gen);

  std::string scenario_path;
  auto* sim = app.add_subcommand("simulate", "Write a labeled synthetic corpus");
  sim->add_option("--scenario", scenario_path, "Scenario or corpus JSON")->required();
  sim->add_option("--out", out_path, "Output directory")->required();

  std::string scores_path;
  auto* det = app.add_subcommand("det", "DET curve and EER from a scores CSV");
  det->add_option("--scores", scores_path, "CSV with utterance_id,score,label")->required();
  det->add_option("--out", out_path, "DET CSV output (default stdout)");

  WnConfig wc;
  wc.n_blocks = 4;
  wc.residual_channels = 16;
  wc.skip_channels = 16;
  wc.aux_dim = 0;
  std::size_t cycle = 4;
  std::uint64_t model_seed = 1;
  auto* init = app.add_subcommand("model-init", "Write a random-weight model file");
  init->add_option("--blocks", wc.n_blocks, "Residual blocks");
  init->add_option("--cycle", cycle, "Blocks per dilation cycle (dilations 1..2^(cycle-1))");
  init->add_option("--channels", wc.residual_channels, "Residual channels");
  init->add_option("--skip", wc.skip_channels, "Skip/post channels");
  init->add_option("--aux-dim", wc.aux_dim, "Aux conditioning dimension");
  init->add_option("--seed", model_seed, "Weight seed");
  init->add_option("--out", out_path, "Output weight file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) return run_analyze(ref_path, out_path, flags);
    if (*detect) {
      if (!corpus_dir.empty()) return run_detect_corpus(corpus_dir, out_path, raw_ref, flags);
      if (gen_path.empty() || ref_path.empty()) throw std::invalid_argument("detect: need --gen and --ref, or --corpus");
      return run_detect(gen_path, ref_path, id, out_path, raw_ref, flags);
    }
    if (*gen) {
      if (ga.model.empty() && ga.scenario.empty()) throw std::invalid_argument("generate: need --model or --simulate");
      return run_generate(ga, flags);
    }
    if (*sim) return run_simulate(scenario_path, out_path);
    if (*det) return run_det(scores_path, out_path);
    if (*init) {
      if (cycle == 0) throw std::invalid_argument("model-init: --cycle must be >= 1");
      wc.dilations.clear();
      for (std::size_t i = 0; i < wc.n_blocks; ++i) wc.dilations.push_back(std::size_t{1} << (i % cycle));
      save_weights(WnModel::random(wc, model_seed), out_path);
      std::cerr << "receptive field " << wc.receptive_field() << ", " << parameter_count(wc) << " parameters\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
