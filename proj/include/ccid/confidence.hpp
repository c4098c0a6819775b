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

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccid/image.hpp"
#include "ccid/io.hpp"

namespace ccid {

/// Error normalisation for ground-truth confidence: the highest noise level
/// the workbench targets.
inline constexpr double kSigmaMax = 100.0;

/// Default overlay threshold; values above render green, below purple.
inline constexpr double kOverlayThreshold = 0.95;

/// One confidence value in [0,1] per 8x8 region of the (padded) image.
struct ConfidenceMap {
  std::size_t grid_width = 0;
  std::size_t grid_height = 0;
  std::vector<double> values;  // row-major

  double operator()(std::size_t gx, std::size_t gy) const noexcept {
    return values[gy * grid_width + gx];
  }
  double& operator()(std::size_t gx, std::size_t gy) noexcept {
    return values[gy * grid_width + gx];
  }

  /// Throws FormatError unless sizes agree and every value lies in [0,1].
  void validate() const;

  friend bool operator==(const ConfidenceMap&, const ConfidenceMap&) = default;
};

/// Grid size covering a w x h image (sides rounded up to multiples of 8).
std::pair<std::size_t, std::size_t> confidence_grid_dims(std::size_t width, std::size_t height);

/// c = clamp(1 - avg_pool8(|y_gt - y_dnn|) / sigma_max, 0, 1), after padding
/// both planes to multiples of 8.
ConfidenceMap ground_truth_confidence(const ImagePlane& y_gt, const ImagePlane& y_dnn);

//------------------------------------------------------------------------------
// Region features for the linear confidence surrogate

inline constexpr std::size_t kFeatureCount = 5;

/// Per-region feature vectors:
///  0  std of (noisy - filtered)
///  1  |mean of noise_map|
///  2  |std of noise_map - median over regions of that std|
///  3  mean level-1 Haar detail energy of the denoised region (noisy - noise_map)
///  4  mean of filtered / 255
struct FeatureGrid {
  std::size_t grid_width = 0;
  std::size_t grid_height = 0;
  std::vector<std::array<double, kFeatureCount>> regions;  // row-major
};

FeatureGrid region_features(const ImagePlane& noisy, const ImagePlane& filtered,
                            const ImagePlane& noise_map);

/// Linear model over standardised features: c = w0 + sum_j w_j (f_j - mean_j) / scale_j.
struct ConfidenceModel {
  std::size_t feature_count = kFeatureCount;
  std::vector<double> weights;  // intercept first, then one per feature
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;

  friend bool operator==(const ConfidenceModel&, const ConfidenceModel&) = default;
};

struct ConfidenceFit {
  ConfidenceModel model;
  bool rank_deficient = false;  // fell back to the pseudo-inverse
  double train_rmse = 0.0;
  std::size_t samples = 0;
};

inline constexpr double kDefaultRidge = 1e-3;
inline constexpr std::size_t kMinTrainingRegions = 100;

/// Ridge least squares (intercept unpenalised) on raw feature rows.
ConfidenceFit fit_confidence_model(std::span<const std::array<double, kFeatureCount>> features,
                                   std::span<const double> targets, double ridge = kDefaultRidge);

/// Convenience overload pairing each feature grid with its target map.
ConfidenceFit fit_confidence_model(std::span<const FeatureGrid> features,
                                   std::span<const ConfidenceMap> targets,
                                   double ridge = kDefaultRidge);

double predict_region(const ConfidenceModel& model,
                      std::span<const double> features);  // clamped to [0,1]

ConfidenceMap predict_confidence(const ConfidenceModel& model, const FeatureGrid& features);

std::string serialize_model(const ConfidenceModel& model);
ConfidenceModel parse_model(std::string_view json);
void save_model(const ConfidenceModel& model, const std::filesystem::path& path);
ConfidenceModel load_model(const std::filesystem::path& path);

//------------------------------------------------------------------------------
// Visualisation and files

/// Green with intensity (c - t) / (1 - t) at or above the threshold, purple
/// (red = blue) with intensity (t - c) / t below it. Each region becomes an
/// 8x8 block; the result is cropped to width x height when those are given.
RgbImage render_overlay(const ConfidenceMap& conf, double threshold = kOverlayThreshold,
                        std::size_t width = 0, std::size_t height = 0);

/// "CMAP <w> <h>" followed by h rows of w values (9 significant digits).
std::string format_confidence(const ConfidenceMap& conf);
ConfidenceMap parse_confidence(std::string_view text);
void save_confidence(const ConfidenceMap& conf, const std::filesystem::path& path);
ConfidenceMap load_confidence(const std::filesystem::path& path);

}  // namespace ccid
