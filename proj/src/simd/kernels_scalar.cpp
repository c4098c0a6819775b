/*
Copyright 2026 The CCID Workbench Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

// Reference kernels. The vector variants must match these bit for bit.

#include "kernels_impl.hpp"

namespace ccid::simd::detail {

namespace {

void blend_mask(double* out, const double* deep, const double* reliable, const double* mask,
                std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = tail::blend_mask(deep[i], reliable[i], mask[i]);
}

void blend_weight(double* out, const double* deep, const double* reliable, double w,
                  std::size_t n) {
  const double om = 1.0 - w;
  for (std::size_t i = 0; i < n; ++i) out[i] = tail::blend_weight(deep[i], reliable[i], w, om);
}

void correlate_rows(const double* src, std::size_t src_stride, double* dst,
                    std::size_t dst_stride, std::size_t rows, std::size_t out_width,
                    const double* taps, std::size_t ntaps) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* s = src + r * src_stride;
    double* d = dst + r * dst_stride;
    for (std::size_t x = 0; x < out_width; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < ntaps; ++k) acc += taps[k] * s[x + k];
      d[x] = acc;
    }
  }
}

void correlate_cols(const double* src, std::size_t src_stride, double* dst,
                    std::size_t dst_stride, std::size_t out_rows, std::size_t width,
                    const double* taps, std::size_t ntaps) {
  for (std::size_t y = 0; y < out_rows; ++y) {
    double* d = dst + y * dst_stride;
    for (std::size_t x = 0; x < width; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < ntaps; ++k) acc += taps[k] * src[(y + k) * src_stride + x];
      d[x] = acc;
    }
  }
}

void dense_rows(const double* in, double* out, std::size_t rows, std::size_t n_in,
                std::size_t n_out, const double* mat_t) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = in + r * n_in;
    double* y = out + r * n_out;
    for (std::size_t k = 0; k < n_out; ++k) {
      double acc = 0.0;
      for (std::size_t n = 0; n < n_in; ++n) acc += x[n] * mat_t[n * n_out + k];
      y[k] = acc;
    }
  }
}

void dense_cols(const double* in, double* out, std::size_t n_in, std::size_t n_out,
                std::size_t cols, const double* mat) {
  for (std::size_t k = 0; k < n_out; ++k) {
    double* y = out + k * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (std::size_t n = 0; n < n_in; ++n) acc += mat[k * n_in + n] * in[n * cols + c];
      y[c] = acc;
    }
  }
}

void multiply(double* out, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void ssim_map(double* out, const double* mu_a, const double* mu_b, const double* m_aa,
              const double* m_bb, const double* m_ab, std::size_t n, double c1, double c2) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = tail::ssim(mu_a[i], mu_b[i], m_aa[i], m_bb[i], m_ab[i], c1, c2);
  }
}

}  // namespace

const Kernels kScalarKernels = {
    Isa::scalar,  "scalar",   blend_mask, blend_weight, correlate_rows,
    correlate_cols, dense_rows, dense_cols, multiply,   ssim_map,
};

}  // namespace ccid::simd::detail
