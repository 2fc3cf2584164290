// src/packed.h

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

// Real M*M-vector encoding of an M x M Hermitian matrix:
//   [A_00 .. A_(M-1)(M-1), then for i < j: sqrt2 Re A_ij, sqrt2 Im A_ij]
// so that pack(A) . pack(B) = tr(A B) and pack is linear over the reals.
// Sums of weighted SCMs and batches of trace products become dense real
// matrix products.

#ifndef MNMFBF_PACKED_H_
#define MNMFBF_PACKED_H_

#include <cmath>
#include <numbers>

#include "mnmfbf/hermitian.h"

namespace mnmfbf {
namespace packed {

inline constexpr int kMaxDim = 16;

inline int Size(int m) { return m * m; }

template <typename MatrixLike>
inline void Pack(const MatrixLike &a, int m, double *out) {
  const double s = std::numbers::sqrt2;
  for (int i = 0; i < m; ++i) out[i] = std::real(a(i, i));
  int k = m;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      cdouble v = a(i, j);
      out[k++] = s * v.real();
      out[k++] = s * v.imag();
    }
}

// Packs x x^H.
inline void PackOuter(const cdouble *x, int m, double *out) {
  const double s = std::numbers::sqrt2;
  for (int i = 0; i < m; ++i) out[i] = std::norm(x[i]);
  int k = m;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      cdouble v = x[i] * std::conj(x[j]);
      out[k++] = s * v.real();
      out[k++] = s * v.imag();
    }
}

// Writes the full Hermitian matrix into a column-major m x m buffer.
inline void Unpack(const double *p, int m, cdouble *out) {
  const double r = std::numbers::sqrt2 / 2.0;
  for (int i = 0; i < m; ++i) out[i + i * m] = cdouble(p[i], 0.0);
  int k = m;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      cdouble v(p[k] * r, p[k + 1] * r);
      k += 2;
      out[i + j * m] = v;
      out[j + i * m] = std::conj(v);
    }
}

inline CMatrix UnpackMatrix(const double *p, int m) {
  CMatrix a(m, m);
  Unpack(p, m, a.data());
  return a;
}

}  // namespace packed
}  // namespace mnmfbf

#endif  // MNMFBF_PACKED_H_
