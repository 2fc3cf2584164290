// src/fft.cc

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

#include "mnmfbf/fft.h"

#include <cstring>
#include <mutex>

#include <fftw3.h>

namespace mnmfbf {

namespace {
// Planner calls are not thread safe in FFTW.
std::mutex &PlannerMutex() {
  static std::mutex mu;
  return mu;
}
}  // namespace

struct RealFft::Impl {
  double *real = nullptr;
  fftw_complex *spec = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

RealFft::RealFft(int n) : n_(n), impl_(std::make_unique<Impl>()) {
  std::lock_guard<std::mutex> lock(PlannerMutex());
  impl_->real = fftw_alloc_real(n);
  impl_->spec = fftw_alloc_complex(n / 2 + 1);
  impl_->forward = fftw_plan_dft_r2c_1d(n, impl_->real, impl_->spec, FFTW_ESTIMATE);
  impl_->inverse = fftw_plan_dft_c2r_1d(n, impl_->spec, impl_->real, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(PlannerMutex());
  fftw_destroy_plan(impl_->forward);
  fftw_destroy_plan(impl_->inverse);
  fftw_free(impl_->real);
  fftw_free(impl_->spec);
}

void RealFft::Forward(const double *in, std::complex<double> *out) {
  std::memcpy(impl_->real, in, sizeof(double) * n_);
  fftw_execute(impl_->forward);
  std::memcpy(static_cast<void *>(out), impl_->spec,
              sizeof(fftw_complex) * (n_ / 2 + 1));
}

void RealFft::Inverse(const std::complex<double> *in, double *out) {
  std::memcpy(impl_->spec, in, sizeof(fftw_complex) * (n_ / 2 + 1));
  fftw_execute(impl_->inverse);
  std::memcpy(out, impl_->real, sizeof(double) * n_);
}

}  // namespace mnmfbf
