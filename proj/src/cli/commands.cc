// src/cli/commands.cc

// Copyright 2026 The mnmfbf Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mnmfbf/cli.h"
#include "mnmfbf/harness.h"
#include "mnmfbf/parallel.h"
#include "mnmfbf/pipeline.h"
#include "mnmfbf/report.h"
#include "mnmfbf/wav.h"

namespace mnmfbf {

namespace fs = std::filesystem;

ExitCode ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput:
    case ErrorKind::kConfiguration:
      return kExitUsage;
    case ErrorKind::kIo:
      return kExitIo;
    default:
      return kExitNumerical;
  }
}

namespace {

struct EnhanceOptions {
  std::string input, output, report, truth;
  std::string beamformer = "wf";
  std::string reference = "auto";
  std::string format = "float32";
  std::string epsilon_mode = "relative";
  bool time_variant = false;
  bool time_invariant = false;
  double block_seconds = 0.0;
  EnhanceConfig config;
};

double ParseReal(const std::string &name, const std::string &text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception &) {
  }
  throw Error(ErrorKind::kConfiguration, "--" + name + ": '" + text + "' is not a number");
}

void AddConfigOption(CLI::App *sub) {
  sub->add_option("--config", "Flat key=value file mirroring the long flags; command-line "
                              "values take precedence");
}

// Fills options of `sub` that were not given on the command line from the
// file named by its --config option.
void ApplyConfigFile(CLI::App *sub) {
  const CLI::Option *opt = sub->get_option("--config");
  if (opt->count() == 0) return;
  const std::string path = opt->as<std::string>();
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open config file '" + path + "'");
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(in);
  } catch (const CLI::ParseError &e) {
    throw Error(ErrorKind::kConfiguration, "'" + path + "': " + e.what());
  }
  for (const CLI::ConfigItem &item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    std::string key = item.name;
    std::replace(key.begin(), key.end(), '_', '-');
    CLI::Option *target = sub->get_option_no_throw("--" + key);
    if (!target || key == "config")
      throw Error(ErrorKind::kConfiguration,
                  "'" + path + "': unknown key '" + item.name + "' for " + sub->get_name());
    if (target->count() > 0) continue;
    try {
      target->add_result(item.inputs);
      target->run_callback();
    } catch (const CLI::ParseError &e) {
      throw Error(ErrorKind::kConfiguration, "'" + path + "': " + item.name + ": " + e.what());
    }
  }
}

void AddModelOptions(CLI::App *sub, EnhanceOptions *o, bool online) {
  AddConfigOption(sub);
  sub->add_option("--input,-i", o->input, "Multichannel 16 kHz WAV")->required();
  sub->add_option("--output,-o", o->output, "Enhanced single-channel WAV")->required();
  sub->add_option("--report", o->report, "Report path (default: <output>.report.jsonl)");
  sub->add_option("--truth", o->truth, "Scene truth sidecar; adds SI-SDR to the report");
  sub->add_option("--beamformer", o->beamformer, "wf | wf1 | mv")->capture_default_str();
  auto *tv = sub->add_flag("--time-variant", o->time_variant, "Time-variant filters");
  auto *ti = sub->add_flag("--time-invariant", o->time_invariant, "Time-invariant filters (default)");
  tv->excludes(ti);
  sub->add_option("--reference", o->reference, "Reference channel index or 'auto'")
      ->capture_default_str();
  sub->add_option("--format", o->format, "Output encoding: float32 | pcm16")->capture_default_str();
  EnhanceConfig &c = o->config;
  sub->add_option("--bases", c.bases, "NMF bases K")->capture_default_str();
  sub->add_option("--sources", c.sources, "MNMF sources N (0: one per channel)")
      ->capture_default_str();
  sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  sub->add_option("--ilrma-bases", c.ilrma_bases, "ILRMA bases per source")->capture_default_str();
  sub->add_option("--ilrma-iterations", c.ilrma_iterations, "ILRMA iterations")
      ->capture_default_str();
  sub->add_option("--epsilon", c.epsilon.value, "Identity loading of the initial G")
      ->capture_default_str();
  sub->add_option("--epsilon-mode", o->epsilon_mode, "relative | absolute")->capture_default_str();
  sub->add_option("--window", c.window_len, "STFT window length")->capture_default_str();
  sub->add_option("--hop", c.hop, "STFT hop")->capture_default_str();
  if (!online) {
    sub->add_option("--iterations", c.offline_iterations, "MNMF iterations")->capture_default_str();
    return;
  }
  sub->add_option("--first-batch-sec", c.first_batch_seconds, "First mini-batch length")
      ->capture_default_str();
  sub->add_option("--batch-sec", c.batch_seconds, "Later mini-batch length")->capture_default_str();
  sub->add_option("--rho", c.rho, "Forgetting weight")->capture_default_str();
  sub->add_option("--first-inner", c.first_inner_iterations, "Inner iterations, first batch")
      ->capture_default_str();
  sub->add_option("--next-inner", c.next_inner_iterations, "Inner iterations, later batches")
      ->capture_default_str();
  sub->add_option("--block-sec", o->block_seconds,
                  "Input block length fed to the enhancer (default: batch length)");
}

void Finalize(EnhanceOptions *o) {
  EnhanceConfig &c = o->config;
  c.beamformer.family = ParseFamily(o->beamformer);
  if (o->time_variant && o->time_invariant)
    throw Error(ErrorKind::kConfiguration, "--time-variant and --time-invariant exclude each other");
  c.beamformer.time_mode = o->time_variant ? TimeMode::kTimeVariant : TimeMode::kTimeInvariant;
  if (o->reference == "auto") {
    c.beamformer.reference.reset();
  } else {
    const double r = ParseReal("reference", o->reference);
    if (r != std::floor(r) || r < 0)
      throw Error(ErrorKind::kConfiguration, "--reference must be 'auto' or a channel index");
    c.beamformer.reference = static_cast<int>(r);
  }
  if (o->epsilon_mode == "relative")
    c.epsilon.mode = EpsilonPolicy::Mode::kRelative;
  else if (o->epsilon_mode == "absolute")
    c.epsilon.mode = EpsilonPolicy::Mode::kAbsolute;
  else
    throw Error(ErrorKind::kConfiguration, "--epsilon-mode must be relative or absolute");
  if (o->report.empty()) o->report = o->output + ".report.jsonl";
  c.Validate();
}

// Shortest text that reads back to the same double.
std::string Str(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::map<std::string, std::string> ConfigEcho(const EnhanceOptions &o, bool online) {
  const EnhanceConfig &c = o.config;
  std::map<std::string, std::string> m{
      {"input", o.input},
      {"output", o.output},
      {"beamformer", o.beamformer},
      {"time_mode", TimeModeName(c.beamformer.time_mode)},
      {"reference", o.reference},
      {"bases", std::to_string(c.bases)},
      {"sources", std::to_string(c.sources)},
      {"seed", std::to_string(c.seed)},
      {"ilrma_bases", std::to_string(c.ilrma_bases)},
      {"ilrma_iterations", std::to_string(c.ilrma_iterations)},
      {"epsilon", Str(c.epsilon.value)},
      {"epsilon_mode", o.epsilon_mode},
      {"window", std::to_string(c.window_len)},
      {"hop", std::to_string(c.hop)},
      {"threads", std::to_string(NumThreads())},
  };
  if (online) {
    m["first_batch_sec"] = Str(c.first_batch_seconds);
    m["batch_sec"] = Str(c.batch_seconds);
    m["rho"] = Str(c.rho);
    m["first_inner"] = std::to_string(c.first_inner_iterations);
    m["next_inner"] = std::to_string(c.next_inner_iterations);
  } else {
    m["iterations"] = std::to_string(c.offline_iterations);
  }
  return m;
}

WaveformBlock ReadInput(const std::string &path) {
  WaveformBlock w = ReadWav(path);
  if (w.num_channels() < 2)
    throw Error(ErrorKind::kInvalidInput,
                "'" + path + "' has " + std::to_string(w.num_channels()) +
                    " channel; at least 2 are required");
  return w;
}

std::vector<double> Prefix(const std::vector<double> &v, std::size_t n) {
  return std::vector<double>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n));
}

// SI-SDR of the output (and of the unprocessed mixture) against the target
// image at the selected reference channel, over the common length.
void AddTruthScores(const std::string &truth_path, const WaveformBlock &mixture,
                    const WaveformBlock &output, int reference, RunReport *report) {
  const TruthSidecar truth = ParseTruth(ReadTextFile(truth_path));
  const fs::path dir = fs::path(truth_path).parent_path();
  const WaveformBlock image = ReadWav((dir / truth.image_files.at(0)).string());
  const int ref = std::max(reference, 0);
  if (ref >= static_cast<int>(image.num_channels()))
    throw Error(ErrorKind::kInvalidInput, "truth image has too few channels");
  const std::size_t n = std::min({image.num_samples(), output.num_samples(), mixture.num_samples()});
  const std::vector<double> target = Prefix(image.channels[ref], n);
  report->si_sdr_db = SiSdr(target, Prefix(output.channels[0], n));
  report->input_si_sdr_db = SiSdr(target, Prefix(mixture.channels[ref], n));
}

void CmdEnhance(EnhanceOptions *o) {
  Finalize(o);
  const WaveformBlock input = ReadInput(o->input);
  const WavFormat format = ParseWavFormat(o->format);
  EnhanceResult r = EnhanceOffline(input, o->config);
  WriteWav(o->output, r.output, format);
  RunReport report;
  report.command = "enhance";
  report.config = ConfigEcho(*o, false);
  report.cost_trace = r.report.cost_trace;
  report.reference = r.report.reference;
  report.timings = r.report.timings;
  if (!o->truth.empty()) AddTruthScores(o->truth, input, r.output, report.reference, &report);
  WriteTextFile(o->report, SerializeReport(report));
}

void CmdStream(EnhanceOptions *o) {
  Finalize(o);
  const WaveformBlock input = ReadInput(o->input);
  WavStreamWriter writer(o->output, 1, input.sample_rate, ParseWavFormat(o->format));
  OnlineEnhancer enhancer(input.num_channels(), o->config, input.sample_rate, input.num_samples());
  const double block_sec = o->block_seconds > 0.0 ? o->block_seconds : o->config.batch_seconds;
  const std::size_t block = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(block_sec * input.sample_rate)));
  WaveformBlock all;
  all.sample_rate = input.sample_rate;
  all.channels.resize(1);
  WaveformBlock segment;
  auto drain = [&] {
    while (enhancer.ProcessNext(&segment)) {
      writer.Append(segment);
      all.channels[0].insert(all.channels[0].end(), segment.channels[0].begin(),
                             segment.channels[0].end());
    }
  };
  for (std::size_t pos = 0; pos < input.num_samples(); pos += block) {
    const std::size_t n = std::min(block, input.num_samples() - pos);
    WaveformBlock piece;
    piece.sample_rate = input.sample_rate;
    for (const auto &ch : input.channels)
      piece.channels.emplace_back(ch.begin() + static_cast<std::ptrdiff_t>(pos),
                                  ch.begin() + static_cast<std::ptrdiff_t>(pos + n));
    enhancer.Append(piece);
    drain();
  }
  enhancer.Finish();
  drain();
  RunReport report;
  report.command = "stream";
  report.config = ConfigEcho(*o, true);
  report.reference = enhancer.report().reference;
  report.timings = enhancer.report().timings;
  report.batches = enhancer.report().batches;
  if (!o->truth.empty()) AddTruthScores(o->truth, input, all, report.reference, &report);
  WriteTextFile(o->report, SerializeReport(report));
}

struct SimulateOptions {
  int mics = 4;
  int sources = 2;
  std::string snr = "0";
  double duration = 8.0;
  std::uint64_t seed = 0;
  std::string steering = "smooth";
  std::string sensor_noise = "-30";
  std::string kinds;
  std::string out_dir = ".";
  std::string prefix = "scene";
  std::string format = "float32";
};

void CmdSimulate(const SimulateOptions &o, std::ostream &out) {
  SceneSpec spec;
  spec.mics = o.mics;
  spec.seed = o.seed;
  spec.duration_seconds = o.duration;
  spec.snr_db = ParseReal("snr", o.snr);
  spec.sensor_noise_db = o.sensor_noise == "off" ? -kNoNoise : ParseReal("sensor-noise", o.sensor_noise);
  if (o.steering == "smooth")
    spec.steering = SteeringModel::kSmoothDelays;
  else if (o.steering == "random")
    spec.steering = SteeringModel::kRandomPerBin;
  else
    throw Error(ErrorKind::kConfiguration, "--steering must be smooth or random");
  if (o.sources < 1) throw Error(ErrorKind::kConfiguration, "--sources must be >= 1");
  spec.kinds.clear();
  if (o.kinds.empty()) {
    spec.kinds.push_back(SourceKind::kHarmonic);
    for (int n = 1; n < o.sources; ++n) spec.kinds.push_back(SourceKind::kFilteredNoise);
  } else {
    std::stringstream ss(o.kinds);
    std::string k;
    while (std::getline(ss, k, ',')) spec.kinds.push_back(ParseSourceKind(k));
    if (static_cast<int>(spec.kinds.size()) != o.sources)
      throw Error(ErrorKind::kConfiguration, "--kinds must list one kind per source");
  }
  const WavFormat format = ParseWavFormat(o.format);
  const SceneTruth truth = SynthScene(spec);

  const fs::path dir(o.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  TruthSidecar sidecar;
  sidecar.spec = spec;
  sidecar.mixture_file = o.prefix + "_mix.wav";
  WriteWav((dir / sidecar.mixture_file).string(), truth.mixture, format);
  out << (dir / sidecar.mixture_file).string() << "\n";
  for (int n = 0; n < spec.sources(); ++n) {
    const std::string name = o.prefix + "_src" + std::to_string(n) + ".wav";
    WriteWav((dir / name).string(), truth.images[n], format);
    sidecar.image_files.push_back(name);
    out << (dir / name).string() << "\n";
  }
  const std::string truth_name = o.prefix + "_truth.jsonl";
  WriteTextFile((dir / truth_name).string(), SerializeTruth(sidecar));
  out << (dir / truth_name).string() << "\n";
}

struct EvaluateOptions {
  std::string reference, estimate;
  int reference_channel = 0;
  int estimate_channel = 0;
  bool trim = false;
};

void CmdEvaluate(const EvaluateOptions &o, std::ostream &out) {
  const WaveformBlock ref = ReadWav(o.reference);
  const WaveformBlock est = ReadWav(o.estimate);
  if (o.reference_channel < 0 || o.reference_channel >= static_cast<int>(ref.num_channels()) ||
      o.estimate_channel < 0 || o.estimate_channel >= static_cast<int>(est.num_channels()))
    throw Error(ErrorKind::kInvalidInput, "channel index out of range");
  std::vector<double> r = ref.channels[o.reference_channel];
  std::vector<double> e = est.channels[o.estimate_channel];
  if (o.trim) {
    const std::size_t n = std::min(r.size(), e.size());
    r.resize(n);
    e.resize(n);
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", SiSdr(r, e));
  out << buf << "\n";
}

}  // namespace

int RunCli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"MNMF-informed beamforming for multichannel speech enhancement", "mnmfbf"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 1;
  app.add_option("--threads", threads, "Worker threads; 1 is the reproducible reference")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  EnhanceOptions enhance, stream;
  auto *enhance_cmd = app.add_subcommand("enhance", "Offline enhancement");
  AddModelOptions(enhance_cmd, &enhance, false);
  auto *stream_cmd = app.add_subcommand("stream", "Online mini-batch enhancement");
  AddModelOptions(stream_cmd, &stream, true);

  SimulateOptions sim;
  auto *sim_cmd = app.add_subcommand("simulate", "Write a synthetic scene with ground truth");
  AddConfigOption(sim_cmd);
  sim_cmd->add_option("--mics", sim.mics, "Microphones")->capture_default_str();
  sim_cmd->add_option("--sources", sim.sources, "Sources; source 0 is the target")
      ->capture_default_str();
  sim_cmd->add_option("--snr", sim.snr, "Target-to-interferer ratio in dB, or inf")
      ->capture_default_str();
  sim_cmd->add_option("--duration", sim.duration, "Seconds")->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  sim_cmd->add_option("--steering", sim.steering, "smooth | random")->capture_default_str();
  sim_cmd->add_option("--sensor-noise", sim.sensor_noise, "Sensor noise in dB re target, or off")
      ->capture_default_str();
  sim_cmd->add_option("--kinds", sim.kinds, "Comma-separated harmonic|noise per source");
  sim_cmd->add_option("--out-dir", sim.out_dir, "Output directory")->capture_default_str();
  sim_cmd->add_option("--prefix", sim.prefix, "File name prefix")->capture_default_str();
  sim_cmd->add_option("--format", sim.format, "float32 | pcm16")->capture_default_str();

  EvaluateOptions ev;
  auto *ev_cmd = app.add_subcommand("evaluate", "Print SI-SDR in dB");
  ev_cmd->add_option("--reference", ev.reference, "Reference WAV")->required();
  ev_cmd->add_option("--estimate", ev.estimate, "Estimate WAV")->required();
  ev_cmd->add_option("--reference-channel", ev.reference_channel, "Channel of the reference")
      ->capture_default_str();
  ev_cmd->add_option("--estimate-channel", ev.estimate_channel, "Channel of the estimate")
      ->capture_default_str();
  ev_cmd->add_flag("--trim", ev.trim, "Truncate both signals to the shorter length");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    SetNumThreads(threads);
    for (CLI::App *sub : {enhance_cmd, stream_cmd, sim_cmd})
      if (*sub) ApplyConfigFile(sub);
    if (*enhance_cmd) CmdEnhance(&enhance);
    if (*stream_cmd) CmdStream(&stream);
    if (*sim_cmd) CmdSimulate(sim, out);
    if (*ev_cmd) CmdEvaluate(ev, out);
  } catch (const Error &e) {
    err << "mnmfbf: " << ErrorKindName(e.kind()) << ": " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const std::exception &e) {
    err << "mnmfbf: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace mnmfbf
