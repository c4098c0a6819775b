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
#include <string_view>
#include <vector>

#include "ccid/image.hpp"

namespace ccid {

enum class DenoiserKind { gaussian_filter, external_file, external_command, mock };

enum class MockMode {
  identity,      // returns the noisy input
  box3,          // 3x3 mean filter
  corrupt_half,  // clean-ish left half, noisy + sinusoidal artifact right half
  clean,         // returns the reference image (deep stand-in for controlled sweeps)
};

struct DenoiserSpec {
  DenoiserKind kind = DenoiserKind::gaussian_filter;
  double filter_sigma = 4.0;
  std::filesystem::path path;  // file, or directory holding <stem>.png|.pgm
  std::string command;         // template with {in} and {out}
  MockMode mock_mode = MockMode::identity;
};

/// Parses "gaussian:4", "file:PATH", "cmd:TEMPLATE" or "mock:identity|box3|corrupt_half|clean".
DenoiserSpec parse_denoiser_spec(std::string_view text);
std::string to_string(const DenoiserSpec& spec);

/// Normalised taps of a sampled Gaussian, radius ceil(3 sigma).
std::vector<double> gaussian_taps(double sigma);

/// Separable Gaussian blur with symmetric-reflect borders. Mean-preserving.
ImagePlane gaussian_filter(const ImagePlane& img, double sigma);

/// 3x3 mean filter with symmetric-reflect borders.
ImagePlane box3_filter(const ImagePlane& img);

/// Amplitude and period of the structured artifact the corrupt_half mock adds.
inline constexpr double kCorruptAmplitude = 20.0;
inline constexpr double kCorruptPeriod = 12.0;

struct DeepOutput {
  ImagePlane denoised;
  ImagePlane noise_map;  // noisy - denoised
};

struct DenoiseContext {
  std::string image_stem;                // resolves <dir>/<stem>.* for external_file
  const ImagePlane* reference = nullptr;  // clean image, used by the corrupt_half and clean mocks
};

/// Packages a denoised plane: snaps it to the 2^-32 grid and forms the residual
/// noise map, so that noise_map + denoised == noisy for on-grid inputs.
DeepOutput make_deep_output(const ImagePlane& noisy, const ImagePlane& denoised);

/// Runs the deep branch. Throws ExternalToolError (with stderr) when a file is
/// missing, a command fails, or the result has the wrong size.
DeepOutput run_deep_denoiser(const DenoiserSpec& spec, const ImagePlane& noisy,
                             const DenoiseContext& ctx = {});

/// The reliable branch: only gaussian_filter specs are accepted.
ImagePlane run_reliable_denoiser(const DenoiserSpec& spec, const ImagePlane& noisy);

}  // namespace ccid
