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

#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

// Data-parallel inner loops shared by the transforms, the Gaussian filter,
// SSIM and the fusion engines.
//
// Every kernel has a scalar reference implementation. Vector variants (AVX2 on
// x86-64, NEON on AArch64) assign one output element per lane and perform the
// same sequence of IEEE operations as the scalar loop, without FMA
// contraction, so all variants produce bit-identical results. The equivalence
// tests compare each compiled variant against the scalar table with memcmp.
//
// Reductions (sums over an image) are intentionally not provided here: their
// summation order would differ between variants.

namespace ccid::simd {

enum class Isa { scalar, avx2, neon };

struct Kernels {
  Isa isa;
  const char* name;

  /// out[i] = mask[i]*deep[i] + (1-mask[i])*reliable[i]
  void (*blend_mask)(double* out, const double* deep, const double* reliable, const double* mask,
                     std::size_t n);

  /// out[i] = w*deep[i] + (1-w)*reliable[i]
  void (*blend_weight)(double* out, const double* deep, const double* reliable, double w,
                       std::size_t n);

  /// dst[r][x] = sum_k taps[k] * src[r][x+k], k ascending, for x < out_width.
  void (*correlate_rows)(const double* src, std::size_t src_stride, double* dst,
                         std::size_t dst_stride, std::size_t rows, std::size_t out_width,
                         const double* taps, std::size_t ntaps);

  /// dst[y][x] = sum_k taps[k] * src[y+k][x], k ascending, for y < out_rows.
  void (*correlate_cols)(const double* src, std::size_t src_stride, double* dst,
                         std::size_t dst_stride, std::size_t out_rows, std::size_t width,
                         const double* taps, std::size_t ntaps);

  /// out[r][k] = sum_n in[r][n] * mat_t[n][k]; mat_t is n_in x n_out row-major.
  void (*dense_rows)(const double* in, double* out, std::size_t rows, std::size_t n_in,
                     std::size_t n_out, const double* mat_t);

  /// out[k][c] = sum_n mat[k][n] * in[n][c]; mat is n_out x n_in row-major.
  void (*dense_cols)(const double* in, double* out, std::size_t n_in, std::size_t n_out,
                     std::size_t cols, const double* mat);

  /// out[i] = a[i] * b[i]
  void (*multiply)(double* out, const double* a, const double* b, std::size_t n);

  /// Per-pixel SSIM from local means and second moments.
  void (*ssim_map)(double* out, const double* mu_a, const double* mu_b, const double* m_aa,
                   const double* m_bb, const double* m_ab, std::size_t n, double c1, double c2);
};

const Kernels& scalar_kernels() noexcept;

/// Variants compiled into this binary that the running CPU supports,
/// scalar first.
std::vector<const Kernels*> available_kernels();

/// The table used by the library. Chosen once, on first use: the widest
/// supported variant, unless CCID_SIMD=scalar|avx2|neon forces one.
const Kernels& active_kernels();

std::string_view to_string(Isa isa) noexcept;

}  // namespace ccid::simd
