// include/mnmfbf/pipeline.h

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

// Offline and online MNMF-informed beamforming.

#ifndef MNMFBF_PIPELINE_H_
#define MNMFBF_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "mnmfbf/beamform.h"
#include "mnmfbf/mnmf.h"
#include "mnmfbf/spatial.h"
#include "mnmfbf/stft.h"

namespace mnmfbf {

struct EnhanceConfig {
  int bases = 25;
  int sources = 0;  // 0 selects N = M
  int offline_iterations = 100;
  int first_inner_iterations = 30;
  int next_inner_iterations = 5;
  double rho = 0.9;
  int window_len = kDefaultWindowLength;
  int hop = kDefaultHop;
  double first_batch_seconds = 10.0;
  double batch_seconds = 0.5;
  BeamformerSpec beamformer;
  std::uint64_t seed = 0;
  int ilrma_bases = 2;
  int ilrma_iterations = 50;
  EpsilonPolicy epsilon;
  bool track_cost = true;

  // Throws kConfiguration describing the first violated constraint.
  void Validate() const;
  MnmfConfig Mnmf(int iterations) const;
};

struct FrameRange {
  std::size_t first = 0;
  std::size_t count = 0;
};

struct MiniBatchPlan {
  std::size_t first_batch_frames = 0;
  std::size_t batch_frames = 0;
  std::vector<FrameRange> batches;
};

// Seconds to frames at the given hop, rounded to the nearest frame.
std::size_t SecondsToFrames(double seconds, int sample_rate, int hop);

// Batch 1 takes first_batch_frames, later batches batch_frames each. A
// remainder shorter than half a batch is merged into the last batch; a
// longer one forms its own batch.
MiniBatchPlan PlanMiniBatches(std::size_t frames, std::size_t first_batch_frames,
                              std::size_t batch_frames);
MiniBatchPlan PlanMiniBatches(std::size_t frames, const EnhanceConfig &config,
                              int sample_rate);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;

  bool operator==(const StageTiming &) const = default;
};

struct BatchReport {
  int index = 0;
  std::size_t first_frame = 0;
  std::size_t frames = 0;
  int inner_iterations = 0;
  std::size_t output_samples = 0;
  double seconds = 0.0;

  bool operator==(const BatchReport &) const = default;
};

struct EnhanceReport {
  std::vector<double> cost_trace;
  int reference = -1;
  std::vector<StageTiming> timings;
  std::vector<BatchReport> batches;
};

struct EnhanceResult {
  WaveformBlock output;  // one channel
  EnhanceReport report;
};

// Filters `x` with the beamformer of `spec` built from the fitted `params`
// for activation columns [h_offset, h_offset + x.frames()). `steering_scms`
// supplies the per-f speech SCMs for steering vectors and time-invariant
// filters; when null they are taken from `params` over the same columns.
// *reference receives the channel used; when it holds a value >= 0 on entry
// that channel is used instead of automatic selection.
Spectrogram BeamformFromParams(const MnmfParams &params, const Spectrogram &x,
                               std::size_t h_offset, const BeamformerSpec &spec,
                               const SpatialEstimates *steering_scms, int *reference);

EnhanceResult EnhanceOffline(const WaveformBlock &input, const EnhanceConfig &config);

// Mini-batch enhancer. Audio is appended in any block sizes; ProcessNext
// runs the next mini-batch once its frames are available and returns its
// output segment. When the total length is given up front the batches follow
// PlanMiniBatches; otherwise a remainder at Finish forms its own batch.
class OnlineEnhancer {
 public:
  OnlineEnhancer(std::size_t channels, const EnhanceConfig &config, int sample_rate,
                 std::optional<std::size_t> total_samples = std::nullopt);

  void Append(const WaveformBlock &block);
  // Marks the end of the stream.
  void Finish();
  // Returns false, leaving *segment untouched, when the next batch is not
  // yet available (or the stream is done).
  bool ProcessNext(WaveformBlock *segment);
  bool Done() const;

  const EnhanceReport &report() const { return report_; }
  const MnmfParams &params() const { return params_; }
  const OnlineStats &stats() const { return stats_; }

 private:
  std::size_t AvailableFrames() const;
  std::optional<FrameRange> NextBatch() const;
  Spectrogram BatchSpectrogram(const FrameRange &r) const;

  std::size_t channels_;
  EnhanceConfig config_;
  int sample_rate_;
  std::optional<MiniBatchPlan> plan_;
  std::size_t first_frames_, batch_frames_;

  std::vector<std::vector<double>> buffer_;  // samples from buffer_origin_
  std::size_t buffer_origin_ = 0;
  std::size_t samples_seen_ = 0;
  bool finished_ = false;
  std::size_t next_frame_ = 0;
  int batch_index_ = 0;
  bool flushed_ = false;

  MnmfParams params_;
  OnlineStats stats_;
  ScmField p_sum_, q_sum_;
  double frame_weight_ = 0.0;
  int reference_ = -1;
  OverlapAdd ola_;
  EnhanceReport report_;
};

// Runs OnlineEnhancer over a complete signal and concatenates the segments.
EnhanceResult EnhanceOnline(const WaveformBlock &input, const EnhanceConfig &config);

}  // namespace mnmfbf

#endif  // MNMFBF_PIPELINE_H_
