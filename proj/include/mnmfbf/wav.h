// include/mnmfbf/wav.h

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

// RIFF/WAVE reading and writing: 16-bit PCM and 32-bit float, interleaved
// channels, 16 kHz only.

#ifndef MNMFBF_WAV_H_
#define MNMFBF_WAV_H_

#include <cstdint>
#include <fstream>
#include <string>

#include "mnmfbf/stft.h"

namespace mnmfbf {

enum class WavFormat { kPcm16, kFloat32 };

WavFormat ParseWavFormat(const std::string &name);  // "pcm16" | "float32"

// Throws kIo when the file cannot be opened or is truncated, kInvalidInput
// for unsupported encodings or sample rates other than 16 kHz.
WaveformBlock ReadWav(const std::string &path);

void WriteWav(const std::string &path, const WaveformBlock &w, WavFormat format);

// Appends samples to a WAV file and rewrites the header sizes after every
// append, so the file is valid between appends.
class WavStreamWriter {
 public:
  WavStreamWriter(const std::string &path, std::size_t channels, int sample_rate,
                  WavFormat format);
  void Append(const WaveformBlock &block);
  std::size_t frames_written() const { return frames_; }

 private:
  void PatchHeader();

  std::string path_;
  std::ofstream out_;
  std::size_t channels_;
  int sample_rate_;
  WavFormat format_;
  std::size_t frames_ = 0;
};

}  // namespace mnmfbf

#endif  // MNMFBF_WAV_H_
