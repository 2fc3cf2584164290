// include/mnmfbf/stft.h

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

#ifndef MNMFBF_STFT_H_
#define MNMFBF_STFT_H_

#include <cstddef>
#include <vector>

#include "mnmfbf/hermitian.h"

namespace mnmfbf {

constexpr int kDefaultSampleRate = 16000;
constexpr int kDefaultWindowLength = 1024;
constexpr int kDefaultHop = 160;

// Multichannel time-domain signal; channels[m][n].
struct WaveformBlock {
  int sample_rate = kDefaultSampleRate;
  std::vector<std::vector<double>> channels;

  std::size_t num_channels() const { return channels.size(); }
  std::size_t num_samples() const {
    return channels.empty() ? 0 : channels[0].size();
  }
  // Throws kInvalidInput on ragged channels or non-finite samples.
  void Validate() const;
};

// Complex tensor with bins x frames x channels, stored so that the M-vector
// x_ft of one TF bin is contiguous.
class Spectrogram {
 public:
  Spectrogram() = default;
  Spectrogram(std::size_t bins, std::size_t frames, std::size_t channels,
              int window_len, int hop, int sample_rate);

  std::size_t bins() const { return bins_; }
  std::size_t frames() const { return frames_; }
  std::size_t channels() const { return channels_; }
  int window_len() const { return window_len_; }
  int hop() const { return hop_; }
  int sample_rate() const { return sample_rate_; }

  cdouble &at(std::size_t f, std::size_t t, std::size_t m) {
    return data_[(f * frames_ + t) * channels_ + m];
  }
  cdouble at(std::size_t f, std::size_t t, std::size_t m) const {
    return data_[(f * frames_ + t) * channels_ + m];
  }
  Eigen::Map<const CVector> bin(std::size_t f, std::size_t t) const {
    return Eigen::Map<const CVector>(data_.data() + (f * frames_ + t) * channels_,
                                     static_cast<Eigen::Index>(channels_));
  }
  Eigen::Map<CVector> bin(std::size_t f, std::size_t t) {
    return Eigen::Map<CVector>(data_.data() + (f * frames_ + t) * channels_,
                               static_cast<Eigen::Index>(channels_));
  }
  const std::vector<cdouble> &data() const { return data_; }

  // Frames [first, first + count) with the same metadata.
  Spectrogram Frames(std::size_t first, std::size_t count) const;

 private:
  std::size_t bins_ = 0, frames_ = 0, channels_ = 0;
  int window_len_ = kDefaultWindowLength;
  int hop_ = kDefaultHop;
  int sample_rate_ = kDefaultSampleRate;
  std::vector<cdouble> data_;
};

// Periodic Hamming window 0.54 - 0.46 cos(2 pi n / N).
std::vector<double> HammingWindow(int length);

// Number of whole frames in `num_samples`; the trailing partial frame is
// dropped.
std::size_t NumFrames(std::size_t num_samples, int window_len, int hop);

// Samples covered by `frames` frames: (frames - 1) * hop + window_len.
std::size_t CoveredSamples(std::size_t frames, int window_len, int hop);

// Frame t covers samples [t * hop, t * hop + window_len); no center padding.
Spectrogram StftForward(const WaveformBlock &w,
                        int window_len = kDefaultWindowLength,
                        int hop = kDefaultHop);

// Weighted overlap-add with squared-window normalization over the covered
// samples.
WaveformBlock StftInverse(const Spectrogram &s);

// Incremental weighted overlap-add. Frames are pushed in order; samples are
// released once no later frame can overlap them.
class OverlapAdd {
 public:
  OverlapAdd(std::size_t channels, int window_len, int hop, int sample_rate);

  // frames: bins x count x channels, the spectra of the next `count` frames.
  // Returns the samples that became final.
  WaveformBlock Push(const Spectrogram &frames);
  // Releases every remaining covered sample.
  WaveformBlock Flush();

  std::size_t frames_pushed() const { return frames_pushed_; }

 private:
  WaveformBlock Release(std::size_t upto);

  std::size_t channels_;
  int window_len_, hop_, sample_rate_;
  std::vector<double> window_;
  std::size_t frames_pushed_ = 0;
  std::size_t released_ = 0;
  std::size_t origin_ = 0;  // absolute index of acc_[m][0]
  std::vector<std::vector<double>> acc_;
  std::vector<double> norm_;
};

}  // namespace mnmfbf

#endif  // MNMFBF_STFT_H_
