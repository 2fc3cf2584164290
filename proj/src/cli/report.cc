// src/cli/report.cc

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

#include "mnmfbf/report.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mnmfbf/error.h"

namespace mnmfbf {

using nlohmann::json;

namespace {

// JSON has no infinities; they are written as strings.
json Number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double ToDouble(const json &j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw Error(ErrorKind::kInvalidInput, "bad number '" + s + "'");
  }
  return j.get<double>();
}

template <typename Fn>
void ForEachRecord(const std::string &text, Fn &&fn) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception &e) {
      throw Error(ErrorKind::kInvalidInput,
                  "malformed record on line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace

std::string SerializeReport(const RunReport &r) {
  std::string out;
  auto line = [&](const json &j) { out += j.dump() + "\n"; };
  line({{"type", "run"}, {"command", r.command}});
  line({{"type", "config"}, {"values", r.config}});
  for (std::size_t i = 0; i < r.cost_trace.size(); ++i)
    line({{"type", "cost"}, {"iteration", i}, {"value", Number(r.cost_trace[i])}});
  line({{"type", "reference"}, {"channel", r.reference}});
  for (const auto &t : r.timings)
    line({{"type", "stage"}, {"name", t.stage}, {"seconds", t.seconds}});
  for (const auto &b : r.batches)
    line({{"type", "batch"},
          {"index", b.index},
          {"first_frame", b.first_frame},
          {"frames", b.frames},
          {"inner_iterations", b.inner_iterations},
          {"output_samples", b.output_samples},
          {"seconds", b.seconds}});
  if (r.input_si_sdr_db) line({{"type", "input_si_sdr"}, {"db", Number(*r.input_si_sdr_db)}});
  if (r.si_sdr_db) line({{"type", "si_sdr"}, {"db", Number(*r.si_sdr_db)}});
  return out;
}

RunReport ParseReport(const std::string &text) {
  RunReport r;
  ForEachRecord(text, [&](const json &j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "run") {
      r.command = j.at("command").get<std::string>();
    } else if (type == "config") {
      r.config = j.at("values").get<std::map<std::string, std::string>>();
    } else if (type == "cost") {
      r.cost_trace.push_back(ToDouble(j.at("value")));
    } else if (type == "reference") {
      r.reference = j.at("channel").get<int>();
    } else if (type == "stage") {
      r.timings.push_back({j.at("name").get<std::string>(), j.at("seconds").get<double>()});
    } else if (type == "batch") {
      BatchReport b;
      b.index = j.at("index").get<int>();
      b.first_frame = j.at("first_frame").get<std::size_t>();
      b.frames = j.at("frames").get<std::size_t>();
      b.inner_iterations = j.at("inner_iterations").get<int>();
      b.output_samples = j.at("output_samples").get<std::size_t>();
      b.seconds = j.at("seconds").get<double>();
      r.batches.push_back(b);
    } else if (type == "si_sdr") {
      r.si_sdr_db = ToDouble(j.at("db"));
    } else if (type == "input_si_sdr") {
      r.input_si_sdr_db = ToDouble(j.at("db"));
    } else {
      throw Error(ErrorKind::kInvalidInput, "unknown report record '" + type + "'");
    }
  });
  return r;
}

std::string SerializeTruth(const TruthSidecar &t) {
  const SceneSpec &s = t.spec;
  std::string steering = s.steering == SteeringModel::kSmoothDelays ? "smooth"
                         : s.steering == SteeringModel::kRandomPerBin ? "random"
                                                                      : "fixed";
  std::string out;
  out += json({{"type", "scene"},
               {"seed", s.seed},
               {"mics", s.mics},
               {"sources", s.sources()},
               {"snr_db", Number(s.snr_db)},
               {"sensor_noise_db", Number(s.sensor_noise_db)},
               {"duration_seconds", s.duration_seconds},
               {"sample_rate", s.sample_rate},
               {"steering", steering}})
             .dump() +
         "\n";
  out += json({{"type", "mixture"}, {"file", t.mixture_file}}).dump() + "\n";
  for (std::size_t n = 0; n < t.image_files.size(); ++n)
    out += json({{"type", "image"},
                 {"source", n},
                 {"kind", SourceKindName(s.kinds.at(n))},
                 {"file", t.image_files[n]}})
               .dump() +
           "\n";
  return out;
}

TruthSidecar ParseTruth(const std::string &text) {
  TruthSidecar t;
  t.spec.kinds.clear();
  ForEachRecord(text, [&](const json &j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "scene") {
      t.spec.seed = j.at("seed").get<std::uint64_t>();
      t.spec.mics = j.at("mics").get<int>();
      t.spec.snr_db = ToDouble(j.at("snr_db"));
      t.spec.sensor_noise_db = ToDouble(j.at("sensor_noise_db"));
      t.spec.duration_seconds = j.at("duration_seconds").get<double>();
      t.spec.sample_rate = j.at("sample_rate").get<int>();
      const std::string st = j.at("steering").get<std::string>();
      t.spec.steering = st == "random" ? SteeringModel::kRandomPerBin
                        : st == "fixed" ? SteeringModel::kFixed
                                        : SteeringModel::kSmoothDelays;
    } else if (type == "mixture") {
      t.mixture_file = j.at("file").get<std::string>();
    } else if (type == "image") {
      const std::size_t n = j.at("source").get<std::size_t>();
      if (n != t.image_files.size())
        throw Error(ErrorKind::kInvalidInput, "image records out of order");
      t.image_files.push_back(j.at("file").get<std::string>());
      t.spec.kinds.push_back(ParseSourceKind(j.at("kind").get<std::string>()));
    } else {
      throw Error(ErrorKind::kInvalidInput, "unknown truth record '" + type + "'");
    }
  });
  if (t.image_files.empty()) throw Error(ErrorKind::kInvalidInput, "truth file lists no images");
  return t;
}

std::string ReadTextFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void WriteTextFile(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "write to '" + path + "' failed");
}

}  // namespace mnmfbf
