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

#include <span>

#include "ccid/image.hpp"
#include "ccid/simd.hpp"

namespace ccid::detail {

/// Separable correlation with the same taps on both axes, "valid" region only:
/// output is (w - n + 1) x (h - n + 1). Rows first, then columns.
inline ImagePlane correlate_separable_valid(const ImagePlane& src, std::span<const double> taps) {
  const auto& k = simd::active_kernels();
  const std::size_t n = taps.size();
  const std::size_t ow = src.width() - n + 1;
  const std::size_t oh = src.height() - n + 1;
  ImagePlane rows(ow, src.height());
  k.correlate_rows(src.data(), src.width(), rows.data(), ow, src.height(), ow, taps.data(), n);
  ImagePlane out(ow, oh);
  k.correlate_cols(rows.data(), ow, out.data(), ow, oh, ow, taps.data(), n);
  return out;
}

}  // namespace ccid::detail
