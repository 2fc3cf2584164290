// src/stft.cc

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

#include "mnmfbf/stft.h"

#include <cmath>
#include <numbers>
#include <string>

#include "mnmfbf/error.h"
#include "mnmfbf/fft.h"

namespace mnmfbf {

void WaveformBlock::Validate() const {
  if (channels.empty())
    throw Error(ErrorKind::kInvalidInput, "waveform has no channels");
  const std::size_t n = channels[0].size();
  for (const auto &ch : channels) {
    if (ch.size() != n)
      throw Error(ErrorKind::kInvalidInput, "waveform channels differ in length");
    for (double v : ch)
      if (!std::isfinite(v))
        throw Error(ErrorKind::kInvalidInput, "waveform contains non-finite samples");
  }
}

Spectrogram::Spectrogram(std::size_t bins, std::size_t frames,
                         std::size_t channels, int window_len, int hop,
                         int sample_rate)
    : bins_(bins), frames_(frames), channels_(channels),
      window_len_(window_len), hop_(hop), sample_rate_(sample_rate),
      data_(bins * frames * channels, cdouble(0.0)) {}

Spectrogram Spectrogram::Frames(std::size_t first, std::size_t count) const {
  if (first + count > frames_)
    throw Error(ErrorKind::kInvalidInput, "frame range exceeds spectrogram");
  Spectrogram out(bins_, count, channels_, window_len_, hop_, sample_rate_);
  for (std::size_t f = 0; f < bins_; ++f)
    for (std::size_t t = 0; t < count; ++t)
      for (std::size_t m = 0; m < channels_; ++m)
        out.at(f, t, m) = at(f, first + t, m);
  return out;
}

std::vector<double> HammingWindow(int length) {
  std::vector<double> w(length);
  for (int n = 0; n < length; ++n)
    w[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / length);
  return w;
}

std::size_t NumFrames(std::size_t num_samples, int window_len, int hop) {
  if (num_samples < static_cast<std::size_t>(window_len)) return 0;
  return (num_samples - window_len) / hop + 1;
}

std::size_t CoveredSamples(std::size_t frames, int window_len, int hop) {
  if (frames == 0) return 0;
  return (frames - 1) * hop + window_len;
}

namespace {

void CheckConfig(int window_len, int hop) {
  if (window_len <= 0 || window_len % 2 != 0)
    throw Error(ErrorKind::kInvalidInput,
                "window length must be positive and even, got " + std::to_string(window_len));
  if (hop <= 0 || hop > window_len)
    throw Error(ErrorKind::kInvalidInput,
                "hop must be in [1, window_len], got " + std::to_string(hop));
}

}  // namespace

Spectrogram StftForward(const WaveformBlock &w, int window_len, int hop) {
  CheckConfig(window_len, hop);
  w.Validate();
  const std::size_t len = w.num_samples();
  if (len < static_cast<std::size_t>(window_len))
    throw Error(ErrorKind::kInvalidInput,
                "signal of " + std::to_string(len) + " samples is shorter than one window");
  const std::size_t frames = NumFrames(len, window_len, hop);
  const std::size_t bins = window_len / 2 + 1;
  const std::size_t channels = w.num_channels();
  Spectrogram s(bins, frames, channels, window_len, hop, w.sample_rate);
  const std::vector<double> win = HammingWindow(window_len);

  RealFft fft(window_len);
  std::vector<double> frame(window_len);
  std::vector<cdouble> spec(bins);
  for (std::size_t m = 0; m < channels; ++m) {
    const auto &x = w.channels[m];
    for (std::size_t t = 0; t < frames; ++t) {
      const std::size_t start = t * hop;
      for (int n = 0; n < window_len; ++n) frame[n] = x[start + n] * win[n];
      fft.Forward(frame.data(), spec.data());
      for (std::size_t f = 0; f < bins; ++f) s.at(f, t, m) = spec[f];
    }
  }
  return s;
}

OverlapAdd::OverlapAdd(std::size_t channels, int window_len, int hop,
                       int sample_rate)
    : channels_(channels), window_len_(window_len), hop_(hop),
      sample_rate_(sample_rate), window_(HammingWindow(window_len)),
      acc_(channels) {
  CheckConfig(window_len, hop);
}

WaveformBlock OverlapAdd::Push(const Spectrogram &frames) {
  if (frames.channels() != channels_ ||
      frames.bins() != static_cast<std::size_t>(window_len_ / 2 + 1) ||
      frames.window_len() != window_len_ || frames.hop() != hop_)
    throw Error(ErrorKind::kInvalidInput, "spectrogram metadata does not match synthesis setup");
  const std::size_t bins = frames.bins();
  RealFft fft(window_len_);
  std::vector<cdouble> spec(bins);
  std::vector<double> frame(window_len_);
  const double scale = 1.0 / window_len_;

  for (std::size_t t = 0; t < frames.frames(); ++t) {
    const std::size_t abs_t = frames_pushed_ + t;
    const std::size_t offset = abs_t * hop_ - origin_;
    const std::size_t need = offset + window_len_;
    if (norm_.size() < need) {
      norm_.resize(need, 0.0);
      for (auto &a : acc_) a.resize(need, 0.0);
    }
    for (int n = 0; n < window_len_; ++n)
      norm_[offset + n] += window_[n] * window_[n];
    for (std::size_t m = 0; m < channels_; ++m) {
      for (std::size_t f = 0; f < bins; ++f) spec[f] = frames.at(f, t, m);
      fft.Inverse(spec.data(), frame.data());
      auto &a = acc_[m];
      for (int n = 0; n < window_len_; ++n)
        a[offset + n] += frame[n] * scale * window_[n];
    }
  }
  frames_pushed_ += frames.frames();
  return Release(frames_pushed_ * hop_);
}

WaveformBlock OverlapAdd::Flush() {
  return Release(CoveredSamples(frames_pushed_, window_len_, hop_));
}

WaveformBlock OverlapAdd::Release(std::size_t upto) {
  WaveformBlock out;
  out.sample_rate = sample_rate_;
  out.channels.assign(channels_, {});
  upto = std::min(upto, CoveredSamples(frames_pushed_, window_len_, hop_));
  if (upto <= released_) return out;
  const std::size_t count = upto - released_;
  const std::size_t begin = released_ - origin_;
  for (std::size_t i = 0; i < count; ++i)
    if (!(norm_[begin + i] > 0.0))
      throw Error(ErrorKind::kConfiguration,
                  "zero overlap-add normalization at sample " + std::to_string(released_ + i));
  for (std::size_t m = 0; m < channels_; ++m) {
    auto &ch = out.channels[m];
    ch.resize(count);
    for (std::size_t i = 0; i < count; ++i)
      ch[i] = acc_[m][begin + i] / norm_[begin + i];
    acc_[m].erase(acc_[m].begin(), acc_[m].begin() + begin + count);
  }
  norm_.erase(norm_.begin(), norm_.begin() + begin + count);
  released_ = upto;
  origin_ = upto;
  return out;
}

WaveformBlock StftInverse(const Spectrogram &s) {
  if (s.frames() == 0 || s.channels() == 0)
    throw Error(ErrorKind::kInvalidInput, "empty spectrogram");
  OverlapAdd ola(s.channels(), s.window_len(), s.hop(), s.sample_rate());
  WaveformBlock out = ola.Push(s);
  WaveformBlock tail = ola.Flush();
  for (std::size_t m = 0; m < out.channels.size(); ++m)
    out.channels[m].insert(out.channels[m].end(), tail.channels[m].begin(),
                           tail.channels[m].end());
  return out;
}

}  // namespace mnmfbf
