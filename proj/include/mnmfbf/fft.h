// include/mnmfbf/fft.h

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

#ifndef MNMFBF_FFT_H_
#define MNMFBF_FFT_H_

#include <complex>
#include <memory>

namespace mnmfbf {

// Unnormalized real-input DFT of length n (n/2 + 1 output bins) and its
// unnormalized inverse. Backed by FFTW with estimate-mode plans.
class RealFft {
 public:
  explicit RealFft(int n);
  ~RealFft();
  RealFft(const RealFft &) = delete;
  RealFft &operator=(const RealFft &) = delete;

  int size() const { return n_; }
  void Forward(const double *in, std::complex<double> *out);
  // `in` is not modified.
  void Inverse(const std::complex<double> *in, double *out);

 private:
  struct Impl;
  int n_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mnmfbf

#endif  // MNMFBF_FFT_H_
