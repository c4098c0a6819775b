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

#include <map>
#include <memory>
#include <mutex>
#include <string_view>
#include <utility>
#include <vector>

#include "ccid/confidence.hpp"
#include "ccid/image.hpp"
#include "ccid/transforms.hpp"

namespace ccid {

enum class FusionMode { dct, dwt_global, dwt_confidence };

/// How the scalar weight w is spread over wavelet bands.
///  uniform:   every band uses w (equivalent to spatial alpha blending).
///  low_first: band weight exp(-r^2 / 2s) with the DCT mask's s(w), where r
///             is the band's frequency rank in [0,1]; coarse bands switch to
///             the deep image before fine ones.
enum class DwtSchedule { uniform, low_first };

FusionMode parse_fusion_mode(std::string_view name);  // dct | dwt | dwt-conf
std::string_view to_string(FusionMode mode) noexcept;
DwtSchedule parse_schedule(std::string_view name);  // uniform | low_first
std::string_view to_string(DwtSchedule schedule) noexcept;

inline constexpr std::size_t kGlobalDwtLevels = 4;
inline constexpr std::size_t kTileDwtLevels = 3;

struct FusionParams {
  double w = 0.5;        // user weight: 0 = reliable, 1 = deep
  double a = 0.1;        // mask scale
  double eps = 1e-3;     // keeps s finite as w -> 1
  double t = 0.8;        // confidence threshold for region weights
  FusionMode mode = FusionMode::dwt_global;
  DwtSchedule schedule = DwtSchedule::low_first;
  Wavelet wavelet = Wavelet::haar;  // global DWT only; tiles are always Haar
  std::size_t levels = kGlobalDwtLevels;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

/// s = a (1 / (1 - w + eps) - 1), floored at 1e-12 for w > 0.
double mask_spread(double w, double a, double eps) noexcept;

/// Per-coefficient deep-image weight, same layout as DctSpectrum.
struct FusionMask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;

  double operator()(std::size_t kx, std::size_t ky) const noexcept {
    return values[ky * width + kx];
  }
};

/// M = exp(-(wx^2 + wy^2) / 2s) over frequencies normalised to index/(dim-1).
/// M is identically 0 at w = 0 and identically 1 at w = 1.
FusionMask dct_fusion_mask(std::size_t width, std::size_t height, const FusionParams& params);

ImagePlane fuse_dct(const ImagePlane& deep, const ImagePlane& reliable, const FusionParams& params);

/// Same as fuse_dct, starting from precomputed spectra.
ImagePlane fuse_dct(const DctSpectrum& deep, const DctSpectrum& reliable,
                    const FusionParams& params);

/// Deep-image weight of each band for a pyramid of `levels` levels:
/// index 0 is the approximation, index l (1..levels) the details of level l.
std::vector<double> band_weights(double w, std::size_t levels, const FusionParams& params);

ImagePlane fuse_dwt(const ImagePlane& deep, const ImagePlane& reliable, const FusionParams& params);

/// Depth used by full-image DWT fusion: params.levels capped by the image size.
std::size_t global_dwt_levels(std::size_t width, std::size_t height, const FusionParams& params);

/// Same as fuse_dwt, starting from precomputed pyramids.
ImagePlane fuse_dwt(const WaveletPyramid& deep, const WaveletPyramid& reliable,
                    const FusionParams& params);

/// w (1 + c - t), clamped to [0,1].
double region_weight(double w, double c, double t) noexcept;

/// Patch-wise fusion: each 8x8 tile gets a 3-level Haar decomposition and is
/// blended with its own weight region_weight(w, c, t). A null map means every
/// tile uses w (unguided tiled fusion). Images whose sides are not multiples
/// of 8 are reflect-padded and cropped back.
ImagePlane fuse_dwt_confidence(const ImagePlane& deep, const ImagePlane& reliable,
                               const ConfidenceMap* conf, const FusionParams& params);

/// Dispatches on params.mode. `conf` is only read in dwt_confidence mode.
ImagePlane fuse(const ImagePlane& deep, const ImagePlane& reliable, const ConfidenceMap* conf,
                const FusionParams& params);

/// A deep/reliable pair with lazily cached transforms. fuse() returns exactly
/// what the free function fuse() returns for the same planes. Thread-safe.
class FusionEngine {
 public:
  FusionEngine(ImagePlane deep, ImagePlane reliable);

  const ImagePlane& deep() const noexcept { return deep_; }
  const ImagePlane& reliable() const noexcept { return reliable_; }

  ImagePlane fuse(const FusionParams& params, const ConfidenceMap* conf = nullptr) const;

 private:
  using SpectrumPair = std::pair<DctSpectrum, DctSpectrum>;
  using PyramidPair = std::pair<WaveletPyramid, WaveletPyramid>;

  std::shared_ptr<const SpectrumPair> spectra() const;
  std::shared_ptr<const PyramidPair> pyramids(Wavelet wavelet, std::size_t levels) const;

  ImagePlane deep_;
  ImagePlane reliable_;
  mutable std::mutex mutex_;
  mutable std::shared_ptr<const SpectrumPair> spectra_;
  mutable std::map<std::pair<Wavelet, std::size_t>, std::shared_ptr<const PyramidPair>> pyramids_;
};

}  // namespace ccid
