// src/small_hpd.h

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

// Allocation-free inverse of small Hermitian positive definite matrices for
// the per-bin inner loops. Buffers are column-major m x m, m <= 16.

#ifndef MNMFBF_SMALL_HPD_H_
#define MNMFBF_SMALL_HPD_H_

#include <cmath>

#include "mnmfbf/hermitian.h"

namespace mnmfbf {
namespace small_hpd {

// In-place lower Cholesky factor; false when a pivot is not positive.
inline bool Cholesky(cdouble *a, int m) {
  for (int j = 0; j < m; ++j) {
    double d = a[j + j * m].real();
    for (int k = 0; k < j; ++k) d -= std::norm(a[j + k * m]);
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    const double ljj = std::sqrt(d);
    a[j + j * m] = ljj;
    for (int i = j + 1; i < m; ++i) {
      cdouble s = a[i + j * m];
      for (int k = 0; k < j; ++k) s -= a[i + k * m] * std::conj(a[j + k * m]);
      a[i + j * m] = s / ljj;
    }
  }
  return true;
}

// Given the Cholesky factor in `l`, writes the full inverse into `inv` and
// returns log det.
inline double InverseFromCholesky(const cdouble *l, int m, cdouble *inv) {
  // linv = L^-1, lower triangular, stored in inv temporarily.
  cdouble linv[16 * 16];
  double logdet = 0.0;
  for (int j = 0; j < m; ++j) {
    logdet += std::log(l[j + j * m].real());
    for (int i = 0; i < m; ++i) linv[i + j * m] = 0.0;
    linv[j + j * m] = 1.0 / l[j + j * m].real();
    for (int i = j + 1; i < m; ++i) {
      cdouble s = 0.0;
      for (int k = j; k < i; ++k) s -= l[i + k * m] * linv[k + j * m];
      linv[i + j * m] = s / l[i + i * m].real();
    }
  }
  // inv = linv^H linv
  for (int j = 0; j < m; ++j)
    for (int i = 0; i <= j; ++i) {
      cdouble s = 0.0;
      for (int k = j; k < m; ++k) s += std::conj(linv[k + i * m]) * linv[k + j * m];
      inv[i + j * m] = s;
      inv[j + i * m] = std::conj(s);
    }
  for (int i = 0; i < m; ++i) inv[i + i * m] = inv[i + i * m].real();
  return 2.0 * logdet;
}

// inv = a^-1 for Hermitian positive definite `a`; on a failed factorization
// retries once with a + delta I, delta = max(1e-10 tr(a) / m, 1e-300).
// Returns false when both attempts fail.
inline bool Invert(const cdouble *a, int m, cdouble *inv, double *logdet) {
  cdouble l[16 * 16];
  for (int i = 0; i < m * m; ++i) l[i] = a[i];
  if (!Cholesky(l, m)) {
    double tr = 0.0;
    for (int i = 0; i < m; ++i) tr += a[i + i * m].real();
    const double delta = std::max(1e-10 * tr / m, 1e-300);
    for (int i = 0; i < m * m; ++i) l[i] = a[i];
    for (int i = 0; i < m; ++i) l[i + i * m] += delta;
    if (!Cholesky(l, m)) return false;
  }
  *logdet = InverseFromCholesky(l, m, inv);
  return true;
}

}  // namespace small_hpd
}  // namespace mnmfbf

#endif  // MNMFBF_SMALL_HPD_H_
