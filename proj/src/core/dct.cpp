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

// The 2-D DCT is applied as two dense basis products, one per axis. Image
// sides are arbitrary (ragged BSD crops, padded tiles), so a single
// precomputed basis matrix per length replaces a radix-specific fast
// transform; the inner products run through the SIMD dense kernels.

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "ccid/errors.hpp"
#include "ccid/simd.hpp"
#include "ccid/transforms.hpp"

namespace ccid {

namespace {

// C[k][n] = alpha_k cos(pi (2n+1) k / 2N), alpha_0 = sqrt(1/N), alpha_k = sqrt(2/N).
struct DctBasis {
  std::vector<double> forward;     // C, N x N
  std::vector<double> transposed;  // C^T
};

std::shared_ptr<const DctBasis> make_basis(std::size_t n) {
  auto basis = std::make_shared<DctBasis>();
  basis->forward.resize(n * n);
  basis->transposed.resize(n * n);
  const double nd = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double alpha = k == 0 ? std::sqrt(1.0 / nd) : std::sqrt(2.0 / nd);
    for (std::size_t i = 0; i < n; ++i) {
      // Reduce the angle index modulo 4N so large products stay exact.
      const std::size_t phase = ((2 * i + 1) * k) % (4 * n);
      const double v = alpha * std::cos(std::numbers::pi * static_cast<double>(phase) / (2.0 * nd));
      basis->forward[k * n + i] = v;
      basis->transposed[i * n + k] = v;
    }
  }
  return basis;
}

std::shared_ptr<const DctBasis> basis_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::shared_ptr<const DctBasis>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = make_basis(n);
  return slot;
}

}  // namespace

DctSpectrum dct2(const ImagePlane& img) {
  if (img.empty()) throw InvalidArgument("dct2: empty image");
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  const auto bx = basis_for(w);
  const auto by = basis_for(h);
  const auto& k = simd::active_kernels();

  // Rows: out[y][kx] = sum_x img[y][x] * C_w[kx][x].
  std::vector<double> rows(w * h);
  k.dense_rows(img.data(), rows.data(), h, w, w, bx->transposed.data());
  // Columns: out[ky][kx] = sum_y C_h[ky][y] * rows[y][kx].
  DctSpectrum spec{w, h, std::vector<double>(w * h)};
  k.dense_cols(rows.data(), spec.coeffs.data(), h, h, w, by->forward.data());
  return spec;
}

ImagePlane idct2(const DctSpectrum& spectrum) {
  const std::size_t w = spectrum.width;
  const std::size_t h = spectrum.height;
  if (w == 0 || h == 0 || spectrum.coeffs.size() != w * h) {
    throw DimensionError("idct2: inconsistent spectrum");
  }
  const auto bx = basis_for(w);
  const auto by = basis_for(h);
  const auto& k = simd::active_kernels();

  // Rows: out[ky][x] = sum_kx S[ky][kx] * C_w[kx][x].
  std::vector<double> rows(w * h);
  k.dense_rows(spectrum.coeffs.data(), rows.data(), h, w, w, bx->forward.data());
  // Columns: out[y][x] = sum_ky C_h[ky][y] * rows[ky][x].
  ImagePlane out(w, h);
  k.dense_cols(rows.data(), out.data(), h, h, w, by->transposed.data());
  return out;
}

}  // namespace ccid
