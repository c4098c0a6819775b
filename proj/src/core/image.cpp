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

#include "ccid/image.hpp"

#include <cmath>
#include <string>

#include "ccid/errors.hpp"

namespace ccid {

namespace {

std::string dims_str(const ImagePlane& p) {
  return std::to_string(p.width()) + "x" + std::to_string(p.height());
}

}  // namespace

ImagePlane::ImagePlane(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), pixels_(width * height, fill) {}

ImagePlane::ImagePlane(std::size_t width, std::size_t height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (pixels_.size() != width * height) {
    throw DimensionError("pixel count " + std::to_string(pixels_.size()) + " does not match " +
                         std::to_string(width) + "x" + std::to_string(height));
  }
}

void require_same_dims(const ImagePlane& a, const ImagePlane& b, std::string_view what) {
  if (!a.same_dims(b)) {
    throw DimensionError(std::string(what) + ": dimension mismatch " + dims_str(a) + " vs " +
                         dims_str(b));
  }
}

void require_pipeline_size(const ImagePlane& img, std::string_view what) {
  if (img.width() < 8 || img.height() < 8) {
    throw InvalidArgument(std::string(what) + ": image " + dims_str(img) +
                          " is smaller than the 8x8 minimum");
  }
}

std::size_t reflect_index(long long i, std::size_t n) noexcept {
  const long long period = 2 * static_cast<long long>(n);
  long long m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<long long>(n)) m = period - 1 - m;
  return static_cast<std::size_t>(m);
}

ImagePlane pad_reflect(const ImagePlane& img, std::size_t width, std::size_t height) {
  if (width < img.width() || height < img.height()) {
    throw InvalidArgument("pad_reflect: target smaller than source");
  }
  if (width == img.width() && height == img.height()) return img;
  ImagePlane out(width, height);
  for (std::size_t y = 0; y < height; ++y) {
    const std::size_t sy = reflect_index(static_cast<long long>(y), img.height());
    for (std::size_t x = 0; x < width; ++x) {
      out(x, y) = img(reflect_index(static_cast<long long>(x), img.width()), sy);
    }
  }
  return out;
}

ImagePlane pad_to_multiple(const ImagePlane& img, std::size_t block) {
  const auto up = [block](std::size_t v) { return (v + block - 1) / block * block; };
  return pad_reflect(img, up(img.width()), up(img.height()));
}

ImagePlane crop(const ImagePlane& img, std::size_t x0, std::size_t y0, std::size_t width,
                std::size_t height) {
  if (x0 + width > img.width() || y0 + height > img.height()) {
    throw DimensionError("crop: window exceeds image " + dims_str(img));
  }
  ImagePlane out(width, height);
  for (std::size_t y = 0; y < height; ++y) {
    const auto src = img.row(y0 + y).subspan(x0, width);
    std::copy(src.begin(), src.end(), out.row(y).begin());
  }
  return out;
}

ImagePlane avg_pool8(const ImagePlane& img) {
  if (img.width() % 8 != 0 || img.height() % 8 != 0 || img.empty()) {
    throw DimensionError("avg_pool8: dimensions " + dims_str(img) + " are not multiples of 8");
  }
  const std::size_t gw = img.width() / 8;
  const std::size_t gh = img.height() / 8;
  ImagePlane out(gw, gh);
  for (std::size_t by = 0; by < gh; ++by) {
    for (std::size_t bx = 0; bx < gw; ++bx) {
      double sum = 0.0;
      for (std::size_t y = 0; y < 8; ++y) {
        for (std::size_t x = 0; x < 8; ++x) sum += img(bx * 8 + x, by * 8 + y);
      }
      out(bx, by) = sum / 64.0;
    }
  }
  return out;
}

double mean(const ImagePlane& img) noexcept {
  if (img.empty()) return 0.0;
  double sum = 0.0;
  for (double v : img.pixels()) sum += v;
  return sum / static_cast<double>(img.size());
}

double max_abs_diff(const ImagePlane& a, const ImagePlane& b) {
  require_same_dims(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

ImagePlane abs_diff(const ImagePlane& a, const ImagePlane& b) {
  require_same_dims(a, b, "abs_diff");
  ImagePlane out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = std::abs(a.data()[i] - b.data()[i]);
  return out;
}

ImagePlane subtract(const ImagePlane& a, const ImagePlane& b) {
  require_same_dims(a, b, "subtract");
  ImagePlane out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] - b.data()[i];
  return out;
}

}  // namespace ccid
