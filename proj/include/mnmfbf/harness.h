// include/mnmfbf/harness.h

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

// Synthetic anechoic scenes with known ground truth, SI-SDR scoring and an
// oracle-mask MVDR baseline.

#ifndef MNMFBF_HARNESS_H_
#define MNMFBF_HARNESS_H_

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mnmfbf/hermitian.h"
#include "mnmfbf/stft.h"

namespace mnmfbf {

enum class SourceKind {
  kHarmonic,       // voiced tone complex with syllable-like gating
  kFilteredNoise,  // lowpass-filtered Gaussian noise
};

enum class SteeringModel {
  kSmoothDelays,  // random delays and gains plus a small smooth perturbation
  kRandomPerBin,  // independent random unit vector at every STFT bin
  kFixed,         // SceneSpec::fixed_steering, the same at every frequency
};

const char *SourceKindName(SourceKind kind);
SourceKind ParseSourceKind(const std::string &name);

struct SceneSpec {
  int mics = 4;
  // Source 0 is the target; the others are interferers.
  std::vector<SourceKind> kinds = {SourceKind::kHarmonic, SourceKind::kFilteredNoise};
  SteeringModel steering = SteeringModel::kSmoothDelays;
  std::vector<CVector> fixed_steering;  // per source, for kFixed
  // Target-to-interferer ratio over all channels; +inf disables interferers.
  double snr_db = 0.0;
  // Uncorrelated sensor noise, relative to the mean per-channel target image
  // power. Added to the last interferer's image; absent when there is none.
  double sensor_noise_db = -30.0;
  double duration_seconds = 8.0;
  std::uint64_t seed = 0;
  int sample_rate = kDefaultSampleRate;
  // STFT grid on which steering vectors are reported.
  int window_len = kDefaultWindowLength;

  int sources() const { return static_cast<int>(kinds.size()); }
  // Throws kInvalidInput.
  void Validate() const;
};

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

struct SceneTruth {
  WaveformBlock mixture;
  std::vector<WaveformBlock> images;          // per source, all mics
  std::vector<std::vector<CVector>> steering; // [source][bin], unit norm
};

// Mixture samples equal the sum of the images in source order.
SceneTruth SynthScene(const SceneSpec &spec);

// SI-SDR caps.
inline constexpr double kSiSdrCap = 80.0;

// 10 log10(|a s|^2 / |e - a s|^2) with a = <e, s> / <s, s>, clamped to
// [-80, 80] dB. Throws kInvalidInput on length mismatch or zero reference.
double SiSdr(const std::vector<double> &reference, const std::vector<double> &estimate);

// Per-source ideal binary masks at `channel`: a_nft = 1 where source n has the
// largest image magnitude (strictly). F x T each.
std::vector<Eigen::MatrixXd> IdealBinaryMasks(const SceneTruth &truth, int channel,
                                              int window_len = kDefaultWindowLength,
                                              int hop = kDefaultHop);

// MVDR-TI with p_f the principal eigenvector of sum_t a X / sum_t a and
// Q_f = sum_t (1 - a) X / sum_t (1 - a). Bins where either weight sums to
// zero pass the reference channel through. Throws kInvalidInput for masks
// outside [0, 1] or masks that are all zero or all one.
Spectrogram OracleMaskMvdr(const Spectrogram &x, const Eigen::MatrixXd &mask, int reference);

}  // namespace mnmfbf

#endif  // MNMFBF_HARNESS_H_
