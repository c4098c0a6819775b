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
#include <span>
#include <string_view>
#include <vector>

namespace ccid {

/// Single-channel raster, row-major, intensities on the [0,255] scale.
/// Values may leave that range while processing; only file boundaries clamp.
class ImagePlane {
 public:
  ImagePlane() = default;
  ImagePlane(std::size_t width, std::size_t height, double fill = 0.0);
  ImagePlane(std::size_t width, std::size_t height, std::vector<double> pixels);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  double& operator()(std::size_t x, std::size_t y) noexcept { return pixels_[y * width_ + x]; }
  double operator()(std::size_t x, std::size_t y) const noexcept { return pixels_[y * width_ + x]; }

  std::span<double> row(std::size_t y) noexcept { return {pixels_.data() + y * width_, width_}; }
  std::span<const double> row(std::size_t y) const noexcept {
    return {pixels_.data() + y * width_, width_};
  }

  std::span<double> pixels() noexcept { return pixels_; }
  std::span<const double> pixels() const noexcept { return pixels_; }
  double* data() noexcept { return pixels_.data(); }
  const double* data() const noexcept { return pixels_.data(); }

  bool same_dims(const ImagePlane& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const ImagePlane&, const ImagePlane&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> pixels_;
};

/// Throws DimensionError naming `what` when the planes differ in size.
void require_same_dims(const ImagePlane& a, const ImagePlane& b, std::string_view what);

/// Throws InvalidArgument unless both sides are at least 8 pixels.
void require_pipeline_size(const ImagePlane& img, std::string_view what);

/// Half-sample symmetric index folding (d c b a | a b c d | d c b a).
std::size_t reflect_index(long long i, std::size_t n) noexcept;

/// Extends `img` on the bottom/right to width x height by symmetric reflection.
ImagePlane pad_reflect(const ImagePlane& img, std::size_t width, std::size_t height);

/// Pads bottom/right to the next multiple of `block` (no-op when already aligned).
ImagePlane pad_to_multiple(const ImagePlane& img, std::size_t block);

ImagePlane crop(const ImagePlane& img, std::size_t x0, std::size_t y0, std::size_t width,
                std::size_t height);

/// Mean of every 8x8 block. Dimensions must be multiples of 8.
ImagePlane avg_pool8(const ImagePlane& img);

double mean(const ImagePlane& img) noexcept;

/// Largest absolute pixel difference; planes must match in size.
double max_abs_diff(const ImagePlane& a, const ImagePlane& b);

ImagePlane abs_diff(const ImagePlane& a, const ImagePlane& b);
ImagePlane subtract(const ImagePlane& a, const ImagePlane& b);

}  // namespace ccid
