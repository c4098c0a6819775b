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
#include <optional>
#include <string>
#include <string_view>

#include "ccid/confidence.hpp"
#include "ccid/denoisers.hpp"
#include "ccid/fusion.hpp"
#include "ccid/image.hpp"
#include "ccid/metrics.hpp"

namespace ccid {

/// Everything the fusion stage needs for one image.
struct Scene {
  std::string name;                 // file stem
  std::optional<ImagePlane> clean;  // ground truth, when known
  ImagePlane noisy;
  ImagePlane reliable;
  DeepOutput deep;
};

/// Runs both denoising branches on `noisy`.
Scene make_scene(std::string name, std::optional<ImagePlane> clean, ImagePlane noisy,
                 const DenoiserSpec& reliable, const DenoiserSpec& deep);

/// Same, with the deep output supplied directly instead of computed.
Scene make_scene_with_deep(std::string name, std::optional<ImagePlane> clean, ImagePlane noisy,
                           const DenoiserSpec& reliable, const ImagePlane& deep_denoised);

/// Copy of the deep branch with pixel values clamped to [0,255].
DeepOutput clamp_deep_output(const ImagePlane& noisy, const DeepOutput& deep);

enum class ConfidenceSource { oracle, model, external, none };

struct ConfidenceSpec {
  ConfidenceSource source = ConfidenceSource::none;
  std::filesystem::path path;  // model JSON, or directory of <stem>.cmap files
};

/// Parses "oracle", "model:PATH", "file:DIR" or "none".
ConfidenceSpec parse_confidence_spec(std::string_view text);
std::string to_string(const ConfidenceSpec& spec);
std::string_view to_string(ConfidenceSource source) noexcept;

/// Oracle confidence: ground_truth_confidence(clean, deep). Throws
/// InvalidArgument when the scene has no ground truth.
ConfidenceMap oracle_confidence(const Scene& scene);

/// Surrogate confidence from the scene's region features.
ConfidenceMap model_confidence(const ConfidenceModel& model, const Scene& scene);

/// Resolves a confidence spec for a scene. `model` must be non-null for the
/// model source. Returns nothing for ConfidenceSource::none.
std::optional<ConfidenceMap> resolve_confidence(const Scene& scene, const ConfidenceSpec& spec,
                                                const ConfidenceModel* model);

}  // namespace ccid
