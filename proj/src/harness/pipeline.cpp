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

#include "ccid/pipeline.hpp"

#include <algorithm>

#include "ccid/errors.hpp"

namespace ccid {

Scene make_scene(std::string name, std::optional<ImagePlane> clean, ImagePlane noisy,
                 const DenoiserSpec& reliable, const DenoiserSpec& deep) {
  require_pipeline_size(noisy, "noisy image");
  if (clean) require_same_dims(*clean, noisy, "ground truth");
  Scene scene;
  scene.reliable = run_reliable_denoiser(reliable, noisy);
  DenoiseContext ctx{name, clean ? &*clean : nullptr};
  scene.deep = run_deep_denoiser(deep, noisy, ctx);
  scene.name = std::move(name);
  scene.clean = std::move(clean);
  scene.noisy = std::move(noisy);
  return scene;
}

Scene make_scene_with_deep(std::string name, std::optional<ImagePlane> clean, ImagePlane noisy,
                           const DenoiserSpec& reliable, const ImagePlane& deep_denoised) {
  require_pipeline_size(noisy, "noisy image");
  if (clean) require_same_dims(*clean, noisy, "ground truth");
  require_same_dims(deep_denoised, noisy, "deep output");
  Scene scene;
  scene.reliable = run_reliable_denoiser(reliable, noisy);
  scene.deep = make_deep_output(noisy, deep_denoised);
  scene.name = std::move(name);
  scene.clean = std::move(clean);
  scene.noisy = std::move(noisy);
  return scene;
}

DeepOutput clamp_deep_output(const ImagePlane& noisy, const DeepOutput& deep) {
  ImagePlane clamped = deep.denoised;
  for (auto& v : clamped.pixels()) v = std::clamp(v, 0.0, 255.0);
  return make_deep_output(noisy, clamped);
}

ConfidenceSpec parse_confidence_spec(std::string_view text) {
  if (text == "oracle") return {ConfidenceSource::oracle, {}};
  if (text == "none") return {ConfidenceSource::none, {}};
  if (text.starts_with("model:") && text.size() > 6) {
    return {ConfidenceSource::model, std::filesystem::path(text.substr(6))};
  }
  if (text.starts_with("file:") && text.size() > 5) {
    return {ConfidenceSource::external, std::filesystem::path(text.substr(5))};
  }
  throw InvalidArgument("confidence source must be oracle, model:PATH, file:DIR or none, got '" +
                        std::string(text) + "'");
}

std::string_view to_string(ConfidenceSource source) noexcept {
  switch (source) {
    case ConfidenceSource::oracle:
      return "oracle";
    case ConfidenceSource::model:
      return "model";
    case ConfidenceSource::external:
      return "file";
    case ConfidenceSource::none:
      return "none";
  }
  return "none";
}

std::string to_string(const ConfidenceSpec& spec) {
  switch (spec.source) {
    case ConfidenceSource::model:
      return "model:" + spec.path.string();
    case ConfidenceSource::external:
      return "file:" + spec.path.string();
    default:
      return std::string(to_string(spec.source));
  }
}

ConfidenceMap oracle_confidence(const Scene& scene) {
  if (!scene.clean) {
    throw InvalidArgument("oracle confidence needs a ground-truth image for '" + scene.name + "'");
  }
  return ground_truth_confidence(*scene.clean, scene.deep.denoised);
}

ConfidenceMap model_confidence(const ConfidenceModel& model, const Scene& scene) {
  return predict_confidence(model,
                            region_features(scene.noisy, scene.reliable, scene.deep.noise_map));
}

std::optional<ConfidenceMap> resolve_confidence(const Scene& scene, const ConfidenceSpec& spec,
                                                const ConfidenceModel* model) {
  switch (spec.source) {
    case ConfidenceSource::none:
      return std::nullopt;
    case ConfidenceSource::oracle:
      return oracle_confidence(scene);
    case ConfidenceSource::model:
      if (!model) throw InvalidArgument("model confidence requested without a model");
      return model_confidence(*model, scene);
    case ConfidenceSource::external: {
      const auto file = std::filesystem::is_directory(spec.path)
                            ? spec.path / (scene.name + ".cmap")
                            : spec.path;
      ConfidenceMap conf = load_confidence(file);
      const auto [gw, gh] = confidence_grid_dims(scene.noisy.width(), scene.noisy.height());
      if (conf.grid_width != gw || conf.grid_height != gh) {
        throw DimensionError("confidence map " + file.string() + " is " +
                             std::to_string(conf.grid_width) + "x" +
                             std::to_string(conf.grid_height) + ", image needs " +
                             std::to_string(gw) + "x" + std::to_string(gh));
      }
      return conf;
    }
  }
  return std::nullopt;
}

}  // namespace ccid
