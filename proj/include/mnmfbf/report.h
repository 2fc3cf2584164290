// include/mnmfbf/report.h

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

// Run reports and scene truth sidecars as JSON lines, one record per line.

#ifndef MNMFBF_REPORT_H_
#define MNMFBF_REPORT_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mnmfbf/harness.h"
#include "mnmfbf/pipeline.h"

namespace mnmfbf {

struct RunReport {
  std::string command;
  std::map<std::string, std::string> config;
  std::vector<double> cost_trace;
  int reference = -1;
  std::vector<StageTiming> timings;
  std::vector<BatchReport> batches;
  std::optional<double> si_sdr_db;
  std::optional<double> input_si_sdr_db;

  bool operator==(const RunReport &) const = default;
};

std::string SerializeReport(const RunReport &r);
// Throws kInvalidInput on malformed lines or unknown record types.
RunReport ParseReport(const std::string &text);

struct TruthSidecar {
  SceneSpec spec;
  std::string mixture_file;
  std::vector<std::string> image_files;
};

std::string SerializeTruth(const TruthSidecar &t);
TruthSidecar ParseTruth(const std::string &text);

// Whole-file helpers; throw kIo.
std::string ReadTextFile(const std::string &path);
void WriteTextFile(const std::string &path, const std::string &text);

}  // namespace mnmfbf

#endif  // MNMFBF_REPORT_H_
