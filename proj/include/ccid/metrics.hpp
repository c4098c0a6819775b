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

#include <filesystem>
#include <string>
#include <vector>

#include "ccid/image.hpp"

namespace ccid {

struct MetricReport {
  double psnr_db = 0.0;  // +infinity for identical images
  double ssim = 0.0;
};

/// 10*log10(255^2 / MSE).
double psnr(const ImagePlane& a, const ImagePlane& b);

/// Mean local SSIM over the valid region of an 11x11 Gaussian window
/// (sigma 1.5), K1 = 0.01, K2 = 0.03, dynamic range 255.
double ssim(const ImagePlane& a, const ImagePlane& b);

/// PSNR and SSIM of `output` against `reference`. With `quantized` set the
/// output is first clamped and rounded to 8 bits, as it would be on disk.
MetricReport evaluate(const ImagePlane& output, const ImagePlane& reference, bool quantized = true);

/// Formats a metric for CSV: shortest round-trip decimal, "inf" for infinity.
std::string format_metric(double v);

struct NamedMetric {
  std::string image;
  MetricReport report;
};

/// CSV with header `image,psnr_db,ssim`.
void write_metrics_csv(const std::filesystem::path& path, const std::vector<NamedMetric>& rows);

}  // namespace ccid
