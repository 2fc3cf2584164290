// src/harness.cc

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

#include "mnmfbf/harness.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "mnmfbf/beamform.h"
#include "mnmfbf/error.h"
#include "mnmfbf/fft.h"

namespace mnmfbf {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Voiced tone complex: syllables of 150-400 ms separated by 40-200 ms gaps,
// each with its own f0 contour (glide plus 5 Hz vibrato) and raised-cosine
// ramps.
std::vector<double> Harmonic(std::size_t n, int sr, std::mt19937_64 *rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out(n, 0.0);
  const double base_f0 = 100.0 + 120.0 * u(*rng);
  std::vector<double> amp(1, 0.0);
  for (int h = 1; h < 80; ++h) amp.push_back((0.5 + 0.5 * u(*rng)) / h);
  std::size_t pos = static_cast<std::size_t>(0.05 * sr * u(*rng));
  while (pos < n) {
    const std::size_t len = static_cast<std::size_t>(sr * (0.15 + 0.25 * u(*rng)));
    const double f_start = base_f0 * (0.85 + 0.3 * u(*rng));
    const double f_end = base_f0 * (0.85 + 0.3 * u(*rng));
    const double level = 0.5 + 0.5 * u(*rng);
    const double vib_phase = kTwoPi * u(*rng);
    const std::size_t ramp = static_cast<std::size_t>(0.02 * sr);
    double phase = 0.0;
    for (std::size_t i = 0; i < len && pos + i < n; ++i) {
      const double r = static_cast<double>(i) / len;
      const double f0 = (f_start + (f_end - f_start) * r) *
                        (1.0 + 0.01 * std::sin(kTwoPi * 5.0 * i / sr + vib_phase));
      phase += kTwoPi * f0 / sr;
      double env = level;
      if (i < ramp) env *= 0.5 - 0.5 * std::cos(std::numbers::pi * i / ramp);
      if (len - i < ramp) env *= 0.5 - 0.5 * std::cos(std::numbers::pi * (len - i) / ramp);
      double s = 0.0;
      for (std::size_t h = 1; h < amp.size(); ++h) {
        if (h * f0 > 0.45 * sr) break;
        s += amp[h] * std::sin(h * phase);
      }
      out[pos + i] = env * s;
    }
    pos += len + static_cast<std::size_t>(sr * (0.04 + 0.16 * u(*rng)));
  }
  return out;
}

// Gaussian noise through a second-order Butterworth lowpass with a random
// cutoff in [300, 600] Hz, so that the target dominates most bins.
std::vector<double> FilteredNoise(std::size_t n, int sr, std::mt19937_64 *rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  const double fc = 300.0 + 300.0 * u(*rng);
  const double k = std::tan(std::numbers::pi * fc / sr);
  const double q = std::numbers::sqrt2 / 2.0;
  const double norm = 1.0 / (1.0 + k / q + k * k);
  const double b0 = k * k * norm, b1 = 2.0 * b0, b2 = b0;
  const double a1 = 2.0 * (k * k - 1.0) * norm, a2 = (1.0 - k / q + k * k) * norm;
  std::vector<double> out(n);
  double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x0 = g(*rng);
    const double y0 = b0 * x0 + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x0;
    y2 = y1;
    y1 = y0;
    out[i] = y0;
  }
  return out;
}

// Steering of one source as a function of frequency in Hz.
struct SmoothSteering {
  std::vector<double> delay, gain;  // per mic; mic 0 has zero delay
  // Perturbation: sum_j c_mj cos(2 pi f j / sr + phi_mj), complex c.
  std::vector<std::vector<cdouble>> coef;
  std::vector<std::vector<double>> phase;
  int sr;

  CVector At(double freq) const {
    const int m = static_cast<int>(delay.size());
    CVector a(m);
    for (int i = 0; i < m; ++i) {
      cdouble pert = 1.0;
      for (std::size_t j = 0; j < coef[i].size(); ++j)
        pert += coef[i][j] * std::cos(kTwoPi * freq * (j + 1) / sr + phase[i][j]);
      a(i) = gain[i] * std::polar(1.0, -kTwoPi * freq * delay[i]) * pert;
    }
    return a / a.norm();
  }
};

SmoothSteering DrawSmooth(int mics, int sr, std::mt19937_64 *rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SmoothSteering s;
  s.sr = sr;
  for (int i = 0; i < mics; ++i) {
    s.delay.push_back(i == 0 ? 0.0 : (2.0 * u(*rng) - 1.0) * 1e-3);
    s.gain.push_back(0.7 + 0.3 * u(*rng));
    s.coef.emplace_back();
    s.phase.emplace_back();
    for (int j = 0; j < 3; ++j) {
      s.coef.back().push_back(0.05 * cdouble(2.0 * u(*rng) - 1.0, 2.0 * u(*rng) - 1.0));
      s.phase.back().push_back(kTwoPi * u(*rng));
    }
  }
  return s;
}

CVector RandomUnit(int mics, std::mt19937_64 *rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVector a(mics);
  for (int i = 0; i < mics; ++i) a(i) = cdouble(g(*rng), g(*rng));
  return a / a.norm();
}

double Energy(const WaveformBlock &w) {
  double e = 0.0;
  for (const auto &ch : w.channels)
    for (double v : ch) e += v * v;
  return e;
}

}  // namespace

const char *SourceKindName(SourceKind kind) {
  return kind == SourceKind::kHarmonic ? "harmonic" : "noise";
}

SourceKind ParseSourceKind(const std::string &name) {
  if (name == "harmonic") return SourceKind::kHarmonic;
  if (name == "noise") return SourceKind::kFilteredNoise;
  throw Error(ErrorKind::kInvalidInput, "unknown source kind '" + name + "'");
}

void SceneSpec::Validate() const {
  if (mics < 2) throw Error(ErrorKind::kInvalidInput, "a scene needs at least 2 microphones");
  if (kinds.empty()) throw Error(ErrorKind::kInvalidInput, "a scene needs at least one source");
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
    throw Error(ErrorKind::kInvalidInput, "SNR must be finite or +inf");
  if (std::isnan(sensor_noise_db))
    throw Error(ErrorKind::kInvalidInput, "sensor noise level must not be NaN");
  if (!(duration_seconds >= 1.0) || !std::isfinite(duration_seconds))
    throw Error(ErrorKind::kInvalidInput, "scene duration must be at least 1 s");
  if (steering == SteeringModel::kFixed) {
    if (fixed_steering.size() != kinds.size())
      throw Error(ErrorKind::kInvalidInput, "one fixed steering vector per source is required");
    for (const auto &a : fixed_steering)
      if (a.size() != mics || !(a.norm() > 0.0))
        throw Error(ErrorKind::kInvalidInput, "fixed steering vectors must be nonzero M-vectors");
  }
  if (sample_rate <= 0 || window_len < 2 || window_len % 2 != 0)
    throw Error(ErrorKind::kInvalidInput, "invalid sample rate or window length");
}

SceneTruth SynthScene(const SceneSpec &spec) {
  spec.Validate();
  const std::size_t n = static_cast<std::size_t>(std::llround(spec.duration_seconds * spec.sample_rate));
  const int m = spec.mics;
  const int sr = spec.sample_rate;
  std::mt19937_64 rng(spec.seed);
  const bool interferers = spec.snr_db != kNoNoise && spec.sources() > 1;

  SceneTruth truth;
  const std::size_t fft_bins = n / 2 + 1;
  RealFft fft(static_cast<int>(n));
  std::vector<std::complex<double>> spec_buf(fft_bins), img_buf(fft_bins);
  const std::size_t stft_bins = static_cast<std::size_t>(spec.window_len / 2 + 1);

  for (int src = 0; src < spec.sources(); ++src) {
    std::vector<double> s = spec.kinds[src] == SourceKind::kHarmonic
                                ? Harmonic(n, sr, &rng)
                                : FilteredNoise(n, sr, &rng);
    fft.Forward(s.data(), spec_buf.data());
    const SmoothSteering smooth = DrawSmooth(m, sr, &rng);
    std::vector<CVector> per_bin;
    CVector fixed;
    if (spec.steering == SteeringModel::kFixed) fixed = spec.fixed_steering[src].normalized();
    if (spec.steering == SteeringModel::kRandomPerBin)
      for (std::size_t f = 0; f < stft_bins; ++f) per_bin.push_back(RandomUnit(m, &rng));

    // Steering on the full-length grid; per-bin steering holds each STFT
    // bin's vector over the nearest full-length frequencies.
    auto steer_at = [&](std::size_t k) -> CVector {
      const double freq = static_cast<double>(k) * sr / n;
      if (spec.steering == SteeringModel::kSmoothDelays) return smooth.At(freq);
      if (spec.steering == SteeringModel::kFixed) return fixed;
      const std::size_t b = std::min<std::size_t>(
          stft_bins - 1, static_cast<std::size_t>(std::llround(freq * spec.window_len / sr)));
      return per_bin[b];
    };

    WaveformBlock image;
    image.sample_rate = sr;
    image.channels.assign(m, std::vector<double>(n));
    std::vector<CVector> grid(fft_bins);
    for (std::size_t k = 0; k < fft_bins; ++k) grid[k] = steer_at(k);
    for (int mic = 0; mic < m; ++mic) {
      for (std::size_t k = 0; k < fft_bins; ++k) img_buf[k] = spec_buf[k] * grid[k](mic);
      img_buf[0] = img_buf[0].real();
      if (n % 2 == 0) img_buf[fft_bins - 1] = img_buf[fft_bins - 1].real();
      fft.Inverse(img_buf.data(), image.channels[mic].data());
      for (double &v : image.channels[mic]) v /= static_cast<double>(n);
    }
    std::vector<CVector> steering(stft_bins);
    for (std::size_t f = 0; f < stft_bins; ++f) {
      if (spec.steering == SteeringModel::kSmoothDelays)
        steering[f] = smooth.At(static_cast<double>(f) * sr / spec.window_len);
      else if (spec.steering == SteeringModel::kFixed)
        steering[f] = fixed;
      else
        steering[f] = per_bin[f];
    }
    truth.steering.push_back(std::move(steering));
    truth.images.push_back(std::move(image));
  }

  // Level the target to unit mean power per channel, then the interferers to
  // the requested SNR.
  const double target_energy = Energy(truth.images[0]);
  if (!(target_energy > 0.0))
    throw Error(ErrorKind::kInvalidInput, "target source is silent");
  const double unit = std::sqrt(static_cast<double>(n) * m / target_energy);
  for (auto &ch : truth.images[0].channels)
    for (double &v : ch) v *= unit;
  double noise_energy = 0.0;
  for (int src = 1; src < spec.sources(); ++src) noise_energy += Energy(truth.images[src]);
  const double noise_gain =
      interferers && noise_energy > 0.0
          ? std::sqrt(static_cast<double>(n) * m * std::pow(10.0, -spec.snr_db / 10.0) / noise_energy)
          : 0.0;
  for (int src = 1; src < spec.sources(); ++src)
    for (auto &ch : truth.images[src].channels)
      for (double &v : ch) v *= noise_gain;
  if (interferers && std::isfinite(spec.sensor_noise_db)) {
    std::normal_distribution<double> g(0.0, std::sqrt(std::pow(10.0, spec.sensor_noise_db / 10.0)));
    for (auto &ch : truth.images.back().channels)
      for (double &v : ch) v += g(rng);
  }

  truth.mixture.sample_rate = sr;
  truth.mixture.channels.assign(m, std::vector<double>(n, 0.0));
  for (int mic = 0; mic < m; ++mic)
    for (std::size_t i = 0; i < n; ++i) {
      double v = 0.0;
      for (const auto &img : truth.images) v += img.channels[mic][i];
      truth.mixture.channels[mic][i] = v;
    }
  return truth;
}

double SiSdr(const std::vector<double> &reference, const std::vector<double> &estimate) {
  if (reference.size() != estimate.size())
    throw Error(ErrorKind::kInvalidInput,
                "reference and estimate lengths differ (" + std::to_string(reference.size()) +
                    " vs " + std::to_string(estimate.size()) + ")");
  double rr = 0.0, re = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    rr += reference[i] * reference[i];
    re += reference[i] * estimate[i];
  }
  if (!(rr > 0.0)) throw Error(ErrorKind::kInvalidInput, "reference signal is zero");
  const double a = re / rr;
  double target = 0.0, residual = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double t = a * reference[i];
    const double e = estimate[i] - t;
    target += t * t;
    residual += e * e;
  }
  if (!(residual > 0.0)) return target > 0.0 ? kSiSdrCap : -kSiSdrCap;
  if (!(target > 0.0)) return -kSiSdrCap;
  return std::clamp(10.0 * std::log10(target / residual), -kSiSdrCap, kSiSdrCap);
}

std::vector<Eigen::MatrixXd> IdealBinaryMasks(const SceneTruth &truth, int channel,
                                              int window_len, int hop) {
  if (truth.images.empty()) throw Error(ErrorKind::kInvalidInput, "scene has no sources");
  if (channel < 0 || channel >= static_cast<int>(truth.mixture.num_channels()))
    throw Error(ErrorKind::kInvalidInput, "mask channel out of range");
  std::vector<Spectrogram> s;
  for (const auto &img : truth.images) {
    WaveformBlock one;
    one.sample_rate = img.sample_rate;
    one.channels = {img.channels[channel]};
    s.push_back(StftForward(one, window_len, hop));
  }
  const std::size_t bins = s[0].bins(), frames = s[0].frames();
  std::vector<Eigen::MatrixXd> masks(s.size(), Eigen::MatrixXd::Zero(bins, frames));
  for (std::size_t f = 0; f < bins; ++f)
    for (std::size_t t = 0; t < frames; ++t) {
      std::size_t best = 0;
      double best_mag = std::abs(s[0].at(f, t, 0));
      bool unique = true;
      for (std::size_t n = 1; n < s.size(); ++n) {
        const double mag = std::abs(s[n].at(f, t, 0));
        if (mag > best_mag) {
          best = n;
          best_mag = mag;
          unique = true;
        } else if (mag == best_mag) {
          unique = false;
        }
      }
      if (unique) masks[best](f, t) = 1.0;
    }
  return masks;
}

Spectrogram OracleMaskMvdr(const Spectrogram &x, const Eigen::MatrixXd &mask, int reference) {
  const std::size_t bins = x.bins(), frames = x.frames();
  const Eigen::Index m = static_cast<Eigen::Index>(x.channels());
  if (mask.rows() != static_cast<Eigen::Index>(bins) ||
      mask.cols() != static_cast<Eigen::Index>(frames))
    throw Error(ErrorKind::kInvalidInput, "mask shape does not match the spectrogram");
  if (reference < 0 || reference >= m)
    throw Error(ErrorKind::kInvalidInput, "reference channel out of range");
  if (!mask.allFinite() || mask.minCoeff() < 0.0 || mask.maxCoeff() > 1.0)
    throw Error(ErrorKind::kInvalidInput, "mask values must lie in [0, 1]");
  if (mask.maxCoeff() == 0.0) throw Error(ErrorKind::kInvalidInput, "mask is all zero");
  if (mask.minCoeff() == 1.0) throw Error(ErrorKind::kInvalidInput, "mask is all one");

  BeamformerFilterField w;
  w.mode = TimeMode::kTimeInvariant;
  w.reference = reference;
  w.bins = bins;
  w.frames = 1;
  w.w.assign(bins, CVector::Unit(m, reference));
  for (std::size_t f = 0; f < bins; ++f) {
    CMatrix sp = CMatrix::Zero(m, m), sq = CMatrix::Zero(m, m);
    double wp = 0.0, wq = 0.0;
    for (std::size_t t = 0; t < frames; ++t) {
      auto b = x.bin(f, t);
      const CMatrix xx = b * b.adjoint();
      const double a = mask(f, t);
      sp += a * xx;
      sq += (1.0 - a) * xx;
      wp += a;
      wq += 1.0 - a;
    }
    if (!(wp > 0.0) || !(wq > 0.0)) continue;
    const HermitianMatrix p = HermitianMatrix::Symmetrized(sp / wp);
    const HermitianMatrix q = HermitianMatrix::Symmetrized(sq / wq);
    if (!(p.Trace() > 0.0) || !(q.Trace() > 0.0)) continue;
    w.w[f] = MvdrFilter(PrincipalEigenvector(p, 0), q, reference);
  }
  return ApplyFilter(w, x);
}

}  // namespace mnmfbf
