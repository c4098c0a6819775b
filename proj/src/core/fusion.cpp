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

#include "ccid/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ccid/errors.hpp"
#include "ccid/simd.hpp"

namespace ccid {

namespace {

constexpr double kMinSpread = 1e-12;

double normalized_frequency(std::size_t index, std::size_t dim) noexcept {
  return dim > 1 ? static_cast<double>(index) / static_cast<double>(dim - 1) : 0.0;
}

void blend_plane(ImagePlane& out, const ImagePlane& deep, const ImagePlane& reliable, double w) {
  out = ImagePlane(deep.width(), deep.height());
  simd::active_kernels().blend_weight(out.data(), deep.data(), reliable.data(), w, deep.size());
}

WaveletPyramid blend_pyramids(const WaveletPyramid& deep, const WaveletPyramid& reliable,
                              const std::vector<double>& weights) {
  WaveletPyramid out;
  out.wavelet = deep.wavelet;
  out.levels = deep.levels;
  out.input_dims = deep.input_dims;
  out.details.resize(deep.levels);
  blend_plane(out.approximation, deep.approximation, reliable.approximation, weights[0]);
  for (std::size_t l = 0; l < deep.levels; ++l) {
    const double wb = weights[l + 1];
    blend_plane(out.details[l].horizontal, deep.details[l].horizontal,
                reliable.details[l].horizontal, wb);
    blend_plane(out.details[l].vertical, deep.details[l].vertical, reliable.details[l].vertical,
                wb);
    blend_plane(out.details[l].diagonal, deep.details[l].diagonal, reliable.details[l].diagonal,
                wb);
  }
  return out;
}

bool same_layout(const WaveletPyramid& a, const WaveletPyramid& b) {
  if (a.levels != b.levels || a.wavelet != b.wavelet || a.input_dims != b.input_dims) return false;
  return a.approximation.same_dims(b.approximation);
}

}  // namespace

FusionMode parse_fusion_mode(std::string_view name) {
  if (name == "dct") return FusionMode::dct;
  if (name == "dwt") return FusionMode::dwt_global;
  if (name == "dwt-conf") return FusionMode::dwt_confidence;
  throw InvalidArgument("unknown fusion mode '" + std::string(name) + "' (dct|dwt|dwt-conf)");
}

std::string_view to_string(FusionMode mode) noexcept {
  switch (mode) {
    case FusionMode::dct:
      return "dct";
    case FusionMode::dwt_global:
      return "dwt";
    case FusionMode::dwt_confidence:
      return "dwt-conf";
  }
  return "unknown";
}

DwtSchedule parse_schedule(std::string_view name) {
  if (name == "uniform") return DwtSchedule::uniform;
  if (name == "low_first") return DwtSchedule::low_first;
  throw InvalidArgument("unknown DWT schedule '" + std::string(name) + "' (uniform|low_first)");
}

std::string_view to_string(DwtSchedule schedule) noexcept {
  return schedule == DwtSchedule::uniform ? "uniform" : "low_first";
}

void FusionParams::validate() const {
  if (!(w >= 0.0 && w <= 1.0)) throw InvalidArgument("fusion weight w must lie in [0,1]");
  if (!(a > 0.0)) throw InvalidArgument("mask scale a must be positive");
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  if (!(t > 0.0 && t < 1.0)) throw InvalidArgument("confidence threshold t must lie in (0,1)");
  if (levels < 1) throw InvalidArgument("DWT levels must be >= 1");
}

double mask_spread(double w, double a, double eps) noexcept {
  const double s = a * (1.0 / (1.0 - w + eps) - 1.0);
  return s > 0.0 ? s : kMinSpread;
}

FusionMask dct_fusion_mask(std::size_t width, std::size_t height, const FusionParams& params) {
  params.validate();
  FusionMask mask{width, height, std::vector<double>(width * height)};
  if (params.w == 0.0) return mask;
  if (params.w == 1.0) {
    std::fill(mask.values.begin(), mask.values.end(), 1.0);
    return mask;
  }
  const double s = mask_spread(params.w, params.a, params.eps);
  for (std::size_t ky = 0; ky < height; ++ky) {
    const double fy = normalized_frequency(ky, height);
    for (std::size_t kx = 0; kx < width; ++kx) {
      const double fx = normalized_frequency(kx, width);
      mask.values[ky * width + kx] = std::exp(-(fx * fx + fy * fy) / (2.0 * s));
    }
  }
  return mask;
}

ImagePlane fuse_dct(const ImagePlane& deep, const ImagePlane& reliable,
                    const FusionParams& params) {
  require_same_dims(deep, reliable, "fuse_dct");
  params.validate();
  if (params.w == 0.0) return reliable;
  if (params.w == 1.0) return deep;
  return fuse_dct(dct2(deep), dct2(reliable), params);
}

ImagePlane fuse_dct(const DctSpectrum& deep, const DctSpectrum& reliable,
                    const FusionParams& params) {
  if (deep.width != reliable.width || deep.height != reliable.height) {
    throw DimensionError("fuse_dct: spectrum dimension mismatch");
  }
  const FusionMask mask = dct_fusion_mask(deep.width, deep.height, params);
  DctSpectrum fused{deep.width, deep.height, std::vector<double>(deep.coeffs.size())};
  simd::active_kernels().blend_mask(fused.coeffs.data(), deep.coeffs.data(),
                                    reliable.coeffs.data(), mask.values.data(),
                                    fused.coeffs.size());
  return idct2(fused);
}

std::vector<double> band_weights(double w, std::size_t levels, const FusionParams& params) {
  std::vector<double> weights(levels + 1, w);
  if (params.schedule == DwtSchedule::uniform || w == 0.0 || w == 1.0) return weights;
  const double s = mask_spread(w, params.a, params.eps);
  const double depth = static_cast<double>(levels);
  weights[0] = 1.0;  // approximation: rank 0
  for (std::size_t l = 1; l <= levels; ++l) {
    const double rank = (depth - static_cast<double>(l) + 1.0) / depth;
    weights[l] = std::exp(-(rank * rank) / (2.0 * s));
  }
  return weights;
}

ImagePlane fuse_dwt(const ImagePlane& deep, const ImagePlane& reliable,
                    const FusionParams& params) {
  require_same_dims(deep, reliable, "fuse_dwt");
  params.validate();
  if (params.w == 0.0) return reliable;
  if (params.w == 1.0) return deep;
  const std::size_t levels = global_dwt_levels(deep.width(), deep.height(), params);
  return fuse_dwt(dwt2(deep, levels, params.wavelet), dwt2(reliable, levels, params.wavelet),
                  params);
}

std::size_t global_dwt_levels(std::size_t width, std::size_t height, const FusionParams& params) {
  return std::max<std::size_t>(1, std::min(params.levels, max_dwt_levels(width, height)));
}

ImagePlane fuse_dwt(const WaveletPyramid& deep, const WaveletPyramid& reliable,
                    const FusionParams& params) {
  params.validate();
  if (!same_layout(deep, reliable)) throw DimensionError("fuse_dwt: pyramid layouts differ");
  const auto weights = band_weights(params.w, deep.levels, params);
  return idwt2(blend_pyramids(deep, reliable, weights));
}

double region_weight(double w, double c, double t) noexcept {
  return std::clamp(w * (1.0 + (c - t)), 0.0, 1.0);
}

ImagePlane fuse_dwt_confidence(const ImagePlane& deep, const ImagePlane& reliable,
                               const ConfidenceMap* conf, const FusionParams& params) {
  require_same_dims(deep, reliable, "fuse_dwt_confidence");
  params.validate();
  const auto [gw, gh] = confidence_grid_dims(deep.width(), deep.height());
  if (conf) {
    if (conf->grid_width != gw || conf->grid_height != gh) {
      throw DimensionError("fuse_dwt_confidence: confidence grid " +
                           std::to_string(conf->grid_width) + "x" +
                           std::to_string(conf->grid_height) + " does not cover image (" +
                           std::to_string(gw) + "x" + std::to_string(gh) + " expected)");
    }
    conf->validate();
  }
  const TileGrid deep_tiles = tile8(pad_to_multiple(deep, kTileSize));
  const TileGrid reliable_tiles = tile8(pad_to_multiple(reliable, kTileSize));

  TileGrid fused;
  fused.grid_width = gw;
  fused.grid_height = gh;
  fused.tiles.resize(gw * gh);
  for (std::size_t i = 0; i < fused.tiles.size(); ++i) {
    const double wr = conf ? region_weight(params.w, conf->values[i], params.t) : params.w;
    if (wr == 0.0) {
      fused.tiles[i] = reliable_tiles.tiles[i];
    } else if (wr == 1.0) {
      fused.tiles[i] = deep_tiles.tiles[i];
    } else {
      const auto weights = band_weights(wr, kTileDwtLevels, params);
      fused.tiles[i] = idwt2(blend_pyramids(dwt2(deep_tiles.tiles[i], kTileDwtLevels),
                                            dwt2(reliable_tiles.tiles[i], kTileDwtLevels),
                                            weights));
    }
  }
  return crop(stitch8(fused), 0, 0, deep.width(), deep.height());
}

ImagePlane fuse(const ImagePlane& deep, const ImagePlane& reliable, const ConfidenceMap* conf,
                const FusionParams& params) {
  switch (params.mode) {
    case FusionMode::dct:
      return fuse_dct(deep, reliable, params);
    case FusionMode::dwt_global:
      return fuse_dwt(deep, reliable, params);
    case FusionMode::dwt_confidence:
      return fuse_dwt_confidence(deep, reliable, conf, params);
  }
  throw InvalidArgument("unknown fusion mode");
}

FusionEngine::FusionEngine(ImagePlane deep, ImagePlane reliable)
    : deep_(std::move(deep)), reliable_(std::move(reliable)) {
  require_same_dims(deep_, reliable_, "FusionEngine");
}

std::shared_ptr<const FusionEngine::SpectrumPair> FusionEngine::spectra() const {
  {
    std::lock_guard lock(mutex_);
    if (spectra_) return spectra_;
  }
  auto computed = std::make_shared<const SpectrumPair>(dct2(deep_), dct2(reliable_));
  std::lock_guard lock(mutex_);
  if (!spectra_) spectra_ = std::move(computed);
  return spectra_;
}

std::shared_ptr<const FusionEngine::PyramidPair> FusionEngine::pyramids(Wavelet wavelet,
                                                                        std::size_t levels) const {
  const auto key = std::make_pair(wavelet, levels);
  {
    std::lock_guard lock(mutex_);
    if (auto it = pyramids_.find(key); it != pyramids_.end()) return it->second;
  }
  auto computed = std::make_shared<const PyramidPair>(dwt2(deep_, levels, wavelet),
                                                      dwt2(reliable_, levels, wavelet));
  std::lock_guard lock(mutex_);
  return pyramids_.emplace(key, std::move(computed)).first->second;
}

ImagePlane FusionEngine::fuse(const FusionParams& params, const ConfidenceMap* conf) const {
  params.validate();
  switch (params.mode) {
    case FusionMode::dct:
      if (params.w == 0.0) return reliable_;
      if (params.w == 1.0) return deep_;
      {
        const auto s = spectra();
        return fuse_dct(s->first, s->second, params);
      }
    case FusionMode::dwt_global:
      if (params.w == 0.0) return reliable_;
      if (params.w == 1.0) return deep_;
      {
        const auto p = pyramids(params.wavelet,
                                global_dwt_levels(deep_.width(), deep_.height(), params));
        return fuse_dwt(p->first, p->second, params);
      }
    case FusionMode::dwt_confidence:
      return fuse_dwt_confidence(deep_, reliable_, conf, params);
  }
  throw InvalidArgument("unknown fusion mode");
}

}  // namespace ccid
