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

#include "ccid/image.hpp"

namespace ccid {

//------------------------------------------------------------------------------
// DCT

/// Orthonormal DCT-II coefficients, row-major: coeff(kx, ky) pairs the
/// horizontal frequency index kx with the vertical index ky.
struct DctSpectrum {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> coeffs;

  double& operator()(std::size_t kx, std::size_t ky) noexcept { return coeffs[ky * width + kx]; }
  double operator()(std::size_t kx, std::size_t ky) const noexcept {
    return coeffs[ky * width + kx];
  }

  friend bool operator==(const DctSpectrum&, const DctSpectrum&) = default;
};

/// Separable orthonormal DCT-II (rows, then columns). coeff(0,0) equals
/// mean(img) * sqrt(width * height).
DctSpectrum dct2(const ImagePlane& img);

/// Exact inverse of dct2 (orthonormal DCT-III).
ImagePlane idct2(const DctSpectrum& spectrum);

//------------------------------------------------------------------------------
// DWT

enum class Wavelet { haar, db2 };

Wavelet parse_wavelet(std::string_view name);
std::string_view to_string(Wavelet w) noexcept;

struct DetailBands {
  ImagePlane horizontal;  // low-pass along x, high-pass along y
  ImagePlane vertical;    // high-pass along x, low-pass along y
  ImagePlane diagonal;    // high-pass along both
};

/// Multi-level 2-D decomposition. details[0] is level 1, the finest.
///
/// Filters are orthonormal and applied with periodic extension. A level whose
/// input has an odd side first replicates its last row/column (symmetric
/// extension) to make it even; `input_dims` remembers the unpadded size so the
/// inverse can crop it away again.
struct WaveletPyramid {
  Wavelet wavelet = Wavelet::haar;
  std::size_t levels = 0;
  ImagePlane approximation;
  std::vector<DetailBands> details;
  std::vector<std::pair<std::size_t, std::size_t>> input_dims;  // (w, h) entering each level
};

/// Deepest decomposition allowed for a w x h image: 2^levels <= min(w, h).
std::size_t max_dwt_levels(std::size_t width, std::size_t height) noexcept;

WaveletPyramid dwt2(const ImagePlane& img, std::size_t levels, Wavelet wavelet = Wavelet::haar);
ImagePlane idwt2(const WaveletPyramid& pyramid);

//------------------------------------------------------------------------------
// 8x8 tiling

inline constexpr std::size_t kTileSize = 8;

struct TileGrid {
  std::size_t grid_width = 0;   // tiles per row
  std::size_t grid_height = 0;  // tile rows
  std::vector<ImagePlane> tiles;  // row-major, each 8x8
};

/// Partitions an image whose sides are multiples of 8 into 8x8 tiles.
TileGrid tile8(const ImagePlane& img);

/// Reassembles tile8's output.
ImagePlane stitch8(const TileGrid& grid);

}  // namespace ccid
