// src/cli/wav.cc

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

#include "mnmfbf/wav.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "mnmfbf/error.h"

namespace mnmfbf {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

std::uint32_t Le32(const unsigned char *p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t Le16(const unsigned char *p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

void Put32(std::string *s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void Put16(std::string *s, std::uint16_t v) {
  s->push_back(static_cast<char>(v & 0xff));
  s->push_back(static_cast<char>(v >> 8));
}

std::string Header(std::size_t channels, int sample_rate, WavFormat format,
                   std::size_t frames) {
  const std::uint16_t bits = format == WavFormat::kPcm16 ? 16 : 32;
  const std::uint32_t block = static_cast<std::uint32_t>(channels * bits / 8);
  const std::uint32_t data = static_cast<std::uint32_t>(frames * block);
  std::string h = "RIFF";
  Put32(&h, 36 + data);
  h += "WAVEfmt ";
  Put32(&h, 16);
  Put16(&h, format == WavFormat::kPcm16 ? kFormatPcm : kFormatFloat);
  Put16(&h, static_cast<std::uint16_t>(channels));
  Put32(&h, static_cast<std::uint32_t>(sample_rate));
  Put32(&h, static_cast<std::uint32_t>(sample_rate) * block);
  Put16(&h, static_cast<std::uint16_t>(block));
  Put16(&h, bits);
  h += "data";
  Put32(&h, data);
  return h;
}

std::string Encode(const WaveformBlock &w, WavFormat format) {
  const std::size_t n = w.num_samples();
  std::string out;
  out.reserve(n * w.num_channels() * (format == WavFormat::kPcm16 ? 2 : 4));
  for (std::size_t i = 0; i < n; ++i)
    for (const auto &ch : w.channels) {
      if (format == WavFormat::kPcm16) {
        const double v = std::clamp(ch[i], -1.0, 1.0);
        Put16(&out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(v * 32767.0))));
      } else {
        const float f = static_cast<float>(ch[i]);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        Put32(&out, bits);
      }
    }
  return out;
}

}  // namespace

WavFormat ParseWavFormat(const std::string &name) {
  if (name == "pcm16") return WavFormat::kPcm16;
  if (name == "float32") return WavFormat::kFloat32;
  throw Error(ErrorKind::kConfiguration, "unknown WAV format '" + name + "' (pcm16, float32)");
}

WaveformBlock ReadWav(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw Error(ErrorKind::kInvalidInput, "'" + path + "' is not a RIFF/WAVE file");
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char *data = nullptr;
  std::size_t data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char *chunk = bytes.data() + pos;
    const std::size_t len = Le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16 || body + len > bytes.size())
        throw Error(ErrorKind::kIo, "'" + path + "' has a truncated format chunk");
      format = Le16(bytes.data() + body);
      channels = Le16(bytes.data() + body + 2);
      rate = Le32(bytes.data() + body + 4);
      bits = Le16(bytes.data() + body + 14);
      if (format == kFormatExtensible && len >= 26) format = Le16(bytes.data() + body + 24);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = std::min(len, bytes.size() - body);
    }
    pos = body + len + (len & 1);
  }
  if (channels == 0 || !data)
    throw Error(ErrorKind::kIo, "'" + path + "' lacks a format or data chunk");
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32)
    throw Error(ErrorKind::kInvalidInput,
                "'" + path + "': only 16-bit PCM and 32-bit float WAV are supported");
  if (rate != static_cast<std::uint32_t>(kDefaultSampleRate))
    throw Error(ErrorKind::kInvalidInput, "'" + path + "' has sample rate " +
                                              std::to_string(rate) + " Hz; only 16000 Hz is supported");
  const std::size_t width = bits / 8;
  const std::size_t frames = data_len / (width * channels);
  WaveformBlock w;
  w.sample_rate = static_cast<int>(rate);
  w.channels.assign(channels, std::vector<double>(frames));
  const unsigned char *p = data;
  for (std::size_t i = 0; i < frames; ++i)
    for (std::size_t m = 0; m < channels; ++m, p += width) {
      if (pcm16) {
        w.channels[m][i] = static_cast<std::int16_t>(Le16(p)) / 32768.0;
      } else {
        const std::uint32_t u = Le32(p);
        float f;
        std::memcpy(&f, &u, 4);
        w.channels[m][i] = f;
      }
    }
  w.Validate();
  return w;
}

void WriteWav(const std::string &path, const WaveformBlock &w, WavFormat format) {
  w.Validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path + "'");
  out << Header(w.num_channels(), w.sample_rate, format, w.num_samples()) << Encode(w, format);
  if (!out) throw Error(ErrorKind::kIo, "write to '" + path + "' failed");
}

WavStreamWriter::WavStreamWriter(const std::string &path, std::size_t channels,
                                 int sample_rate, WavFormat format)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), channels_(channels),
      sample_rate_(sample_rate), format_(format) {
  if (!out_) throw Error(ErrorKind::kIo, "cannot write '" + path + "'");
  out_ << Header(channels_, sample_rate_, format_, 0);
  out_.flush();
}

void WavStreamWriter::Append(const WaveformBlock &block) {
  if (block.num_channels() != channels_)
    throw Error(ErrorKind::kInvalidInput, "channel count changed while streaming");
  out_.seekp(0, std::ios::end);
  out_ << Encode(block, format_);
  frames_ += block.num_samples();
  PatchHeader();
}

void WavStreamWriter::PatchHeader() {
  out_.seekp(0);
  out_ << Header(channels_, sample_rate_, format_, frames_);
  out_.seekp(0, std::ios::end);
  out_.flush();
  if (!out_) throw Error(ErrorKind::kIo, "write to '" + path_ + "' failed");
}

}  // namespace mnmfbf
