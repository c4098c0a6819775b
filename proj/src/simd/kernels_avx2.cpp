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

// AVX2 kernels, 4 doubles per register. Built with -mavx2 but without -mfma:
// every multiply and add rounds separately, as in the scalar reference.

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace ccid::simd::detail {

namespace {

void blend_mask(double* out, const double* deep, const double* reliable, const double* mask,
                std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d m = _mm256_loadu_pd(mask + i);
    const __m256d md = _mm256_mul_pd(m, _mm256_loadu_pd(deep + i));
    const __m256d om = _mm256_sub_pd(one, m);
    const __m256d omr = _mm256_mul_pd(om, _mm256_loadu_pd(reliable + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(md, omr));
  }
  for (; i < n; ++i) out[i] = tail::blend_mask(deep[i], reliable[i], mask[i]);
}

void blend_weight(double* out, const double* deep, const double* reliable, double w,
                  std::size_t n) {
  const double om_s = 1.0 - w;
  const __m256d wv = _mm256_set1_pd(w);
  const __m256d om = _mm256_set1_pd(om_s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d wd = _mm256_mul_pd(wv, _mm256_loadu_pd(deep + i));
    const __m256d omr = _mm256_mul_pd(om, _mm256_loadu_pd(reliable + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(wd, omr));
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
    for (; x + 8 <= out_width; x += 8) {
      __m256d acc0 = _mm256_setzero_pd();
      __m256d acc1 = _mm256_setzero_pd();
      for (std::size_t k = 0; k < ntaps; ++k) {
        const __m256d t = _mm256_set1_pd(taps[k]);
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(t, _mm256_loadu_pd(s + x + k)));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(t, _mm256_loadu_pd(s + x + 4 + k)));
      }
      _mm256_storeu_pd(d + x, acc0);
      _mm256_storeu_pd(d + x + 4, acc1);
    }
    for (; x + 4 <= out_width; x += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t k = 0; k < ntaps; ++k) {
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(taps[k]), _mm256_loadu_pd(s + x + k)));
      }
      _mm256_storeu_pd(d + x, acc);
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
    for (; x + 8 <= width; x += 8) {
      __m256d acc0 = _mm256_setzero_pd();
      __m256d acc1 = _mm256_setzero_pd();
      for (std::size_t k = 0; k < ntaps; ++k) {
        const double* s = src + (y + k) * src_stride + x;
        const __m256d t = _mm256_set1_pd(taps[k]);
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(t, _mm256_loadu_pd(s)));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(t, _mm256_loadu_pd(s + 4)));
      }
      _mm256_storeu_pd(d + x, acc0);
      _mm256_storeu_pd(d + x + 4, acc1);
    }
    for (; x + 4 <= width; x += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t k = 0; k < ntaps; ++k) {
        const double* s = src + (y + k) * src_stride + x;
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(taps[k]), _mm256_loadu_pd(s)));
      }
      _mm256_storeu_pd(d + x, acc);
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
    for (; k + 16 <= n_out; k += 16) {
      __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
      __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
      for (std::size_t n = 0; n < n_in; ++n) {
        const __m256d xv = _mm256_set1_pd(x[n]);
        const double* m = mat_t + n * n_out + k;
        a0 = _mm256_add_pd(a0, _mm256_mul_pd(xv, _mm256_loadu_pd(m)));
        a1 = _mm256_add_pd(a1, _mm256_mul_pd(xv, _mm256_loadu_pd(m + 4)));
        a2 = _mm256_add_pd(a2, _mm256_mul_pd(xv, _mm256_loadu_pd(m + 8)));
        a3 = _mm256_add_pd(a3, _mm256_mul_pd(xv, _mm256_loadu_pd(m + 12)));
      }
      _mm256_storeu_pd(y + k, a0);
      _mm256_storeu_pd(y + k + 4, a1);
      _mm256_storeu_pd(y + k + 8, a2);
      _mm256_storeu_pd(y + k + 12, a3);
    }
    for (; k + 4 <= n_out; k += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t n = 0; n < n_in; ++n) {
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(x[n]),
                                               _mm256_loadu_pd(mat_t + n * n_out + k)));
      }
      _mm256_storeu_pd(y + k, acc);
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
    for (; c + 16 <= cols; c += 16) {
      __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
      __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
      for (std::size_t n = 0; n < n_in; ++n) {
        const __m256d mv = _mm256_set1_pd(m[n]);
        const double* x = in + n * cols + c;
        a0 = _mm256_add_pd(a0, _mm256_mul_pd(mv, _mm256_loadu_pd(x)));
        a1 = _mm256_add_pd(a1, _mm256_mul_pd(mv, _mm256_loadu_pd(x + 4)));
        a2 = _mm256_add_pd(a2, _mm256_mul_pd(mv, _mm256_loadu_pd(x + 8)));
        a3 = _mm256_add_pd(a3, _mm256_mul_pd(mv, _mm256_loadu_pd(x + 12)));
      }
      _mm256_storeu_pd(y + c, a0);
      _mm256_storeu_pd(y + c + 4, a1);
      _mm256_storeu_pd(y + c + 8, a2);
      _mm256_storeu_pd(y + c + 12, a3);
    }
    for (; c + 4 <= cols; c += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t n = 0; n < n_in; ++n) {
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(m[n]),
                                               _mm256_loadu_pd(in + n * cols + c)));
      }
      _mm256_storeu_pd(y + c, acc);
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
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void ssim_map(double* out, const double* mu_a, const double* mu_b, const double* m_aa,
              const double* m_bb, const double* m_ab, std::size_t n, double c1, double c2) {
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d c1v = _mm256_set1_pd(c1);
  const __m256d c2v = _mm256_set1_pd(c2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(mu_a + i);
    const __m256d b = _mm256_loadu_pd(mu_b + i);
    const __m256d mu_aa = _mm256_mul_pd(a, a);
    const __m256d mu_bb = _mm256_mul_pd(b, b);
    const __m256d mu_ab = _mm256_mul_pd(a, b);
    const __m256d var_a = _mm256_sub_pd(_mm256_loadu_pd(m_aa + i), mu_aa);
    const __m256d var_b = _mm256_sub_pd(_mm256_loadu_pd(m_bb + i), mu_bb);
    const __m256d cov = _mm256_sub_pd(_mm256_loadu_pd(m_ab + i), mu_ab);
    const __m256d num_l = _mm256_add_pd(_mm256_mul_pd(two, mu_ab), c1v);
    const __m256d num_c = _mm256_add_pd(_mm256_mul_pd(two, cov), c2v);
    const __m256d den_l = _mm256_add_pd(_mm256_add_pd(mu_aa, mu_bb), c1v);
    const __m256d den_c = _mm256_add_pd(_mm256_add_pd(var_a, var_b), c2v);
    const __m256d num = _mm256_mul_pd(num_l, num_c);
    const __m256d den = _mm256_mul_pd(den_l, den_c);
    _mm256_storeu_pd(out + i, _mm256_div_pd(num, den));
  }
  for (; i < n; ++i) out[i] = tail::ssim(mu_a[i], mu_b[i], m_aa[i], m_bb[i], m_ab[i], c1, c2);
}

}  // namespace

const Kernels kAvx2Kernels = {
    Isa::avx2,      "avx2",     blend_mask, blend_weight, correlate_rows,
    correlate_cols, dense_rows, dense_cols, multiply,     ssim_map,
};

}  // namespace ccid::simd::detail
