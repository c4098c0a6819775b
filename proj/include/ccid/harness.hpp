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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccid/confidence.hpp"
#include "ccid/denoisers.hpp"
#include "ccid/fusion.hpp"
#include "ccid/metrics.hpp"
#include "ccid/noise.hpp"
#include "ccid/pipeline.hpp"

namespace ccid {

/// {0, 0.05, ..., 1}.
std::vector<double> default_weight_grid();

/// "start:stop:step" (inclusive) or a comma-separated list. Grid points are
/// rounded to 12 decimals so 0:1:0.05 yields 0.15 rather than 0.15000000000000002.
std::vector<double> parse_weight_grid(std::string_view text);

/// Throws InvalidArgument unless the grid is non-empty, sorted, unique and in [0,1].
void validate_weight_grid(std::span<const double> grid);

/// Image files (.png, .pgm, .ppm) in a directory, sorted by file name.
std::vector<std::filesystem::path> list_dataset(const std::filesystem::path& dir);

struct ExperimentSpec {
  std::filesystem::path dataset;
  NoiseSpec noise;  // noise.seed is the base seed; image i uses derive_seed(seed, i)
  DenoiserSpec reliable;
  DenoiserSpec deep;
  FusionParams fusion;
  std::vector<FusionMode> modes{FusionMode::dwt_global};
  std::vector<double> grid = default_weight_grid();
  ConfidenceSpec confidence;
  std::filesystem::path out;  // empty: nothing written
  bool clamp_deep = false;    // clamp the deep branch to [0,255] before fusion
  bool write_images = true;
};

struct CurvePoint {
  double w = 0.0;
  FusionMode mode = FusionMode::dwt_global;
  MetricReport quantized;  // 8-bit outputs
  MetricReport exact;      // float outputs
};

struct ImageFailure {
  std::string image;
  std::string error;
};

struct SweepResult {
  std::vector<CurvePoint> curve;  // dataset means, ordered by mode then w
  std::vector<std::string> images;  // images that contributed, in dataset order
  std::vector<ImageFailure> failures;
  MetricReport reliable_quantized, reliable_exact;
  MetricReport deep_quantized, deep_exact;

  bool partial() const noexcept { return !failures.empty(); }
};

/// Mean PSNR/SSIM per (mode, w) over the dataset. When spec.out is set, writes:
///   sweep.csv, sweep_float.csv           `w,mode,psnr_db,ssim`
///   metrics/{reliable,deep,deep_clamped,<mode>_w<w>}.csv   `image,psnr_db,ssim`
///   fused/<stem>_<mode>_w<w>.png         (with write_images)
///   conf/<stem>.cmap, conf/<stem>_overlay.png   (when a confidence source is set)
///   failures.csv                         `image,error` (only for partial runs)
/// Images whose denoisers fail are recorded as failures and skipped; throws
/// when the dataset is empty or every image fails.
SweepResult weight_sweep(const ExperimentSpec& spec);

inline constexpr double kDefaultFusionWeight = 0.5;

struct OodCase {
  std::string type;  // data_domain | noise_level | noise_type
  NoiseSpec noise;
  std::filesystem::path dataset;  // empty: use the experiment's dataset
};

/// Parses "TYPE,NOISE[,DATASET]", e.g. "noise_level,gaussian:35".
OodCase parse_ood_case(std::string_view text);

struct OodRow {
  std::string type;
  MetricReport reliable, deep, ccid_default, ccid_best;
  double best_w_psnr = 0.0;  // grid weight maximising mean PSNR
  double best_w_ssim = 0.0;  // grid weight maximising mean SSIM
};

struct OodResult {
  std::vector<OodRow> quantized;
  std::vector<OodRow> exact;
};

/// Per case: reliable alone, deep alone, fusion at w = 0.5, and fusion at the
/// best grid weight, for the first mode in base.modes. The best PSNR and the
/// best SSIM are chosen independently. When base.out is set, writes ood.csv,
/// ood_float.csv and ood_<type>_sweep.csv per case.
OodResult ood_eval(const ExperimentSpec& base, std::span<const OodCase> cases);

struct ConfDistSpec {
  std::filesystem::path dataset;
  DenoiserSpec reliable;
  DenoiserSpec deep;
  std::vector<double> sigmas{0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  std::size_t bins = 20;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

struct HistogramRow {
  std::string denoiser;  // "reliable" or "deep"
  double sigma = 0.0;
  double bin_lo = 0.0;
  double bin_hi = 0.0;
  std::size_t count = 0;         // regions in the bin
  double region_fraction = 0.0;  // count / all regions
  double image_fraction = 0.0;   // mean over images of the per-image fraction
};

struct MeanRow {
  std::string denoiser;
  double sigma = 0.0;
  double mean_region = 0.0;  // mean over all regions
  double mean_image = 0.0;   // mean over images of per-image means
};

struct ConfDistResult {
  std::vector<HistogramRow> histogram;
  std::vector<MeanRow> means;
  std::size_t regions_per_level = 0;
};

/// Oracle confidence of both denoisers over Gaussian noise levels. When
/// spec.out is set, writes conf_hist.csv and conf_mean.csv.
ConfDistResult confidence_distribution(const ConfDistSpec& spec);

struct TrainingSpec {
  std::filesystem::path dataset;
  std::vector<NoiseSpec> noises;  // each image is corrupted at every level
  DenoiserSpec reliable;
  DenoiserSpec deep;
  double ridge = kDefaultRidge;
};

/// Fits the linear confidence surrogate on oracle targets.
ConfidenceFit train_confidence_model(const TrainingSpec& spec);

}  // namespace ccid
