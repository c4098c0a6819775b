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

// AArch64 NEON kernels, 2 doubles per register. Requires -ffp-contract=off so
// the compiler does not fuse the separate vmulq/vaddq into fmla.

#include <arm_neon.h>

#include "kernels_impl.hpp"

namespace ccid::simd::detail {

namespace {

void blend_mask(double* out, const double* deep, const double* reliable, const double* mask,
                std::size_t n) {
  const float64x2_t one = vdupq_n_f64(1.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t m = vld1q_f64(mask + i);
    const float64x2_t md = vmulq_f64(m, vld1q_f64(deep + i));
    const float64x2_t om = vsubq_f64(one, m);
    const float64x2_t omr = vmulq_f64(om, vld1q_f64(reliable + i));
    vst1q_f64(out + i, vaddq_f64(md, omr));
  }
  for (; i < n; ++i) out[i] = tail::blend_mask(deep[i], reliable[i], mask[i]);
}

void blend_weight(double* out, const double* deep, const double* reliable, double w,
                  std::size_t n) {
  const double om_s = 1.0 - w;
  const float64x2_t wv = vdupq_n_f64(w);
  const float64x2_t om = vdupq_n_f64(om_s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t wd = vmulq_f64(wv, vld1q_f64(deep + i));
    const float64x2_t omr = vmulq_f64(om, vld1q_f64(reliable + i));
    vst1q_f64(out + i, vaddq_f64(wd, omr));
  }
  for (; i < n; ++i) out[i] = tail::blend_weight(deep[i], reliable[i], w, om_s);
}

void correlate_rows(const double* src, std::size_t src_stride, double* dst,
                    std::size_t dst_stride, std::size_t rows, std::size_t out_width,
                    const double* taps, std::size_t ntaps) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* s = src + r * src_stride;
    double* d = dst + r * dst_stride;
    std::size_t x = 0;
    for (; x + 2 <= out_width; x += 2) {
      float64x2_t acc = vdupq_n_f64(0.0);
      for (std::size_t k = 0; k < ntaps; ++k) {
        acc = vaddq_f64(acc, vmulq_f64(vdupq_n_f64(taps[k]), vld1q_f64(s + x + k)));
      }
      vst1q_f64(d + x, acc);
    }
    for (; x < out_width; ++x) {
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
    std::size_t x = 0;
    for (; x + 2 <= width; x += 2) {
      float64x2_t acc = vdupq_n_f64(0.0);
      for (std::size_t k = 0; k < ntaps; ++k) {
        acc = vaddq_f64(acc, vmulq_f64(vdupq_n_f64(taps[k]),
                                       vld1q_f64(src + (y + k) * src_stride + x)));
      }
      vst1q_f64(d + x, acc);
    }
    for (; x < width; ++x) {
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
    std::size_t k = 0;
    for (; k + 4 <= n_out; k += 4) {
      float64x2_t a0 = vdupq_n_f64(0.0), a1 = vdupq_n_f64(0.0);
      for (std::size_t n = 0; n < n_in; ++n) {
        const float64x2_t xv = vdupq_n_f64(x[n]);
        const double* m = mat_t + n * n_out + k;
        a0 = vaddq_f64(a0, vmulq_f64(xv, vld1q_f64(m)));
        a1 = vaddq_f64(a1, vmulq_f64(xv, vld1q_f64(m + 2)));
      }
      vst1q_f64(y + k, a0);
      vst1q_f64(y + k + 2, a1);
    }
    for (; k < n_out; ++k) {
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
    const double* m = mat + k * n_in;
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      float64x2_t a0 = vdupq_n_f64(0.0), a1 = vdupq_n_f64(0.0);
      for (std::size_t n = 0; n < n_in; ++n) {
        const float64x2_t mv = vdupq_n_f64(m[n]);
        const double* x = in + n * cols + c;
        a0 = vaddq_f64(a0, vmulq_f64(mv, vld1q_f64(x)));
        a1 = vaddq_f64(a1, vmulq_f64(mv, vld1q_f64(x + 2)));
      }
      vst1q_f64(y + c, a0);
      vst1q_f64(y + c + 2, a1);
    }
    for (; c < cols; ++c) {
      double acc = 0.0;
      for (std::size_t n = 0; n < n_in; ++n) acc += m[n] * in[n * cols + c];
      y[c] = acc;
    }
  }
}

void multiply(double* out, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void ssim_map(double* out, const double* mu_a, const double* mu_b, const double* m_aa,
              const double* m_bb, const double* m_ab, std::size_t n, double c1, double c2) {
  const float64x2_t two = vdupq_n_f64(2.0);
  const float64x2_t c1v = vdupq_n_f64(c1);
  const float64x2_t c2v = vdupq_n_f64(c2);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t a = vld1q_f64(mu_a + i);
    const float64x2_t b = vld1q_f64(mu_b + i);
    const float64x2_t mu_aa = vmulq_f64(a, a);
    const float64x2_t mu_bb = vmulq_f64(b, b);
    const float64x2_t mu_ab = vmulq_f64(a, b);
    const float64x2_t var_a = vsubq_f64(vld1q_f64(m_aa + i), mu_aa);
    const float64x2_t var_b = vsubq_f64(vld1q_f64(m_bb + i), mu_bb);
    const float64x2_t cov = vsubq_f64(vld1q_f64(m_ab + i), mu_ab);
    const float64x2_t num_l = vaddq_f64(vmulq_f64(two, mu_ab), c1v);
    const float64x2_t num_c = vaddq_f64(vmulq_f64(two, cov), c2v);
    const float64x2_t den_l = vaddq_f64(vaddq_f64(mu_aa, mu_bb), c1v);
    const float64x2_t den_c = vaddq_f64(vaddq_f64(var_a, var_b), c2v);
    vst1q_f64(out + i, vdivq_f64(vmulq_f64(num_l, num_c), vmulq_f64(den_l, den_c)));
  }
  for (; i < n; ++i) out[i] = tail::ssim(mu_a[i], mu_b[i], m_aa[i], m_bb[i], m_ab[i], c1, c2);
}

}  // namespace

const Kernels kNeonKernels = {
    Isa::neon,      "neon",     blend_mask, blend_weight, correlate_rows,
    correlate_cols, dense_rows, dense_cols, multiply,     ssim_map,
};

}  // namespace ccid::simd::detail
