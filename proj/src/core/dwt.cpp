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

#include <array>
#include <cmath>
#include <span>
#include <string>

#include "ccid/errors.hpp"
#include "ccid/transforms.hpp"

namespace ccid {

namespace {

struct FilterBank {
  std::span<const double> low;
  std::span<const double> high;
};

const FilterBank& filters(Wavelet w) {
  static const double r2 = std::sqrt(2.0);
  static const double r3 = std::sqrt(3.0);
  static const std::array<double, 2> haar_lo = {1.0 / r2, 1.0 / r2};
  static const std::array<double, 2> haar_hi = {1.0 / r2, -1.0 / r2};
  static const std::array<double, 4> db2_lo = {(1 + r3) / (4 * r2), (3 + r3) / (4 * r2),
                                               (3 - r3) / (4 * r2), (1 - r3) / (4 * r2)};
  // Quadrature mirror: g[k] = (-1)^k h[L-1-k].
  static const std::array<double, 4> db2_hi = {db2_lo[3], -db2_lo[2], db2_lo[1], -db2_lo[0]};
  static const FilterBank haar{haar_lo, haar_hi};
  static const FilterBank db2{db2_lo, db2_hi};
  return w == Wavelet::haar ? haar : db2;
}

// One analysis step on a strided signal of even length n (periodic extension).
void analyze(const double* x, std::size_t stride, std::size_t n, const FilterBank& fb,
             double* lo, double* hi, std::size_t out_stride) {
  const std::size_t half = n / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double a = 0.0;
    double d = 0.0;
    for (std::size_t k = 0; k < fb.low.size(); ++k) {
      const double v = x[((2 * i + k) % n) * stride];
      a += fb.low[k] * v;
      d += fb.high[k] * v;
    }
    lo[i * out_stride] = a;
    hi[i * out_stride] = d;
  }
}

// Transpose of analyze: accumulates both halves back into x (length n).
void synthesize(const double* lo, const double* hi, std::size_t in_stride, std::size_t n,
                const FilterBank& fb, double* x, std::size_t stride) {
  for (std::size_t j = 0; j < n; ++j) x[j * stride] = 0.0;
  const std::size_t half = n / 2;
  for (std::size_t i = 0; i < half; ++i) {
    const double a = lo[i * in_stride];
    const double d = hi[i * in_stride];
    for (std::size_t k = 0; k < fb.low.size(); ++k) {
      x[((2 * i + k) % n) * stride] += fb.low[k] * a + fb.high[k] * d;
    }
  }
}

struct LevelBands {
  ImagePlane ll, lh, hl, hh;
};

LevelBands analyze_level(const ImagePlane& input, const FilterBank& fb) {
  const std::size_t we = input.width() + (input.width() & 1);
  const std::size_t he = input.height() + (input.height() & 1);
  const ImagePlane x = pad_reflect(input, we, he);
  const std::size_t hw = we / 2;
  const std::size_t hh = he / 2;

  // Rows: left half low-pass, right half high-pass.
  ImagePlane rows(we, he);
  for (std::size_t y = 0; y < he; ++y) {
    analyze(x.row(y).data(), 1, we, fb, rows.row(y).data(), rows.row(y).data() + hw, 1);
  }
  // Columns: top half low-pass, bottom half high-pass.
  ImagePlane cols(we, he);
  for (std::size_t c = 0; c < we; ++c) {
    analyze(rows.data() + c, we, he, fb, cols.data() + c, cols.data() + hh * we + c, we);
  }
  LevelBands out{crop(cols, 0, 0, hw, hh), crop(cols, 0, hh, hw, hh), crop(cols, hw, 0, hw, hh),
                 crop(cols, hw, hh, hw, hh)};
  return out;
}

ImagePlane synthesize_level(const ImagePlane& ll, const DetailBands& d, std::size_t width,
                            std::size_t height, const FilterBank& fb) {
  const std::size_t hw = ll.width();
  const std::size_t hh = ll.height();
  const std::size_t we = 2 * hw;
  const std::size_t he = 2 * hh;
  ImagePlane cols(we, he);
  for (std::size_t y = 0; y < hh; ++y) {
    for (std::size_t x = 0; x < hw; ++x) {
      cols(x, y) = ll(x, y);
      cols(x, y + hh) = d.horizontal(x, y);
      cols(x + hw, y) = d.vertical(x, y);
      cols(x + hw, y + hh) = d.diagonal(x, y);
    }
  }
  ImagePlane rows(we, he);
  for (std::size_t c = 0; c < we; ++c) {
    synthesize(cols.data() + c, cols.data() + hh * we + c, we, he, fb, rows.data() + c, we);
  }
  ImagePlane out(we, he);
  for (std::size_t y = 0; y < he; ++y) {
    synthesize(rows.row(y).data(), rows.row(y).data() + hw, 1, we, fb, out.row(y).data(), 1);
  }
  return crop(out, 0, 0, width, height);
}

}  // namespace

Wavelet parse_wavelet(std::string_view name) {
  if (name == "haar") return Wavelet::haar;
  if (name == "db2") return Wavelet::db2;
  throw InvalidArgument("unknown wavelet '" + std::string(name) + "'");
}

std::string_view to_string(Wavelet w) noexcept { return w == Wavelet::haar ? "haar" : "db2"; }

std::size_t max_dwt_levels(std::size_t width, std::size_t height) noexcept {
  std::size_t m = std::min(width, height);
  std::size_t levels = 0;
  while ((std::size_t{2} << levels) <= m) ++levels;
  return levels;
}

WaveletPyramid dwt2(const ImagePlane& img, std::size_t levels, Wavelet wavelet) {
  if (levels < 1) throw InvalidArgument("dwt2: levels must be >= 1");
  if (img.empty() || levels > max_dwt_levels(img.width(), img.height())) {
    throw InvalidArgument("dwt2: " + std::to_string(levels) + " levels is too deep for " +
                          std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
  const FilterBank& fb = filters(wavelet);
  WaveletPyramid pyr;
  pyr.wavelet = wavelet;
  pyr.levels = levels;
  ImagePlane current = img;
  for (std::size_t l = 0; l < levels; ++l) {
    pyr.input_dims.emplace_back(current.width(), current.height());
    LevelBands bands = analyze_level(current, fb);
    pyr.details.push_back({std::move(bands.lh), std::move(bands.hl), std::move(bands.hh)});
    current = std::move(bands.ll);
  }
  pyr.approximation = std::move(current);
  return pyr;
}

ImagePlane idwt2(const WaveletPyramid& pyr) {
  if (pyr.levels < 1 || pyr.details.size() != pyr.levels || pyr.input_dims.size() != pyr.levels) {
    throw DimensionError("idwt2: pyramid level count is inconsistent");
  }
  const FilterBank& fb = filters(pyr.wavelet);
  ImagePlane current = pyr.approximation;
  for (std::size_t l = pyr.levels; l-- > 0;) {
    const auto [w, h] = pyr.input_dims[l];
    const DetailBands& d = pyr.details[l];
    const std::size_t hw = (w + 1) / 2;
    const std::size_t hh = (h + 1) / 2;
    for (const ImagePlane* band : std::initializer_list<const ImagePlane*>{&current, &d.horizontal, &d.vertical, &d.diagonal}) {
      if (band->width() != hw || band->height() != hh) {
        throw DimensionError("idwt2: band size mismatch at level " + std::to_string(l + 1));
      }
    }
    current = synthesize_level(current, d, w, h, fb);
  }
  return current;
}

TileGrid tile8(const ImagePlane& img) {
  if (img.empty() || img.width() % kTileSize != 0 || img.height() % kTileSize != 0) {
    throw DimensionError("tile8: image sides must be multiples of 8");
  }
  TileGrid grid;
  grid.grid_width = img.width() / kTileSize;
  grid.grid_height = img.height() / kTileSize;
  grid.tiles.reserve(grid.grid_width * grid.grid_height);
  for (std::size_t ty = 0; ty < grid.grid_height; ++ty) {
    for (std::size_t tx = 0; tx < grid.grid_width; ++tx) {
      grid.tiles.push_back(crop(img, tx * kTileSize, ty * kTileSize, kTileSize, kTileSize));
    }
  }
  return grid;
}

ImagePlane stitch8(const TileGrid& grid) {
  if (grid.tiles.size() != grid.grid_width * grid.grid_height || grid.tiles.empty()) {
    throw DimensionError("stitch8: tile count does not match grid dimensions");
  }
  ImagePlane out(grid.grid_width * kTileSize, grid.grid_height * kTileSize);
  for (std::size_t ty = 0; ty < grid.grid_height; ++ty) {
    for (std::size_t tx = 0; tx < grid.grid_width; ++tx) {
      const ImagePlane& tile = grid.tiles[ty * grid.grid_width + tx];
      if (tile.width() != kTileSize || tile.height() != kTileSize) {
        throw DimensionError("stitch8: tile is not 8x8");
      }
      for (std::size_t y = 0; y < kTileSize; ++y) {
        const auto src = tile.row(y);
        std::copy(src.begin(), src.end(),
                  out.row(ty * kTileSize + y).begin() + static_cast<long>(tx * kTileSize));
      }
    }
  }
  return out;
}

}  // namespace ccid
