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

#include "ccid/confidence.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "ccid/errors.hpp"

namespace ccid {

namespace {

double clamp01(double v) noexcept { return std::clamp(v, 0.0, 1.0); }

struct RegionStats {
  double mean = 0.0;
  double std = 0.0;
};

RegionStats region_stats(const ImagePlane& img, std::size_t gx, std::size_t gy) {
  double sum = 0.0;
  for (std::size_t y = 0; y < 8; ++y)
    for (std::size_t x = 0; x < 8; ++x) sum += img(gx * 8 + x, gy * 8 + y);
  const double m = sum / 64.0;
  double ss = 0.0;
  for (std::size_t y = 0; y < 8; ++y) {
    for (std::size_t x = 0; x < 8; ++x) {
      const double d = img(gx * 8 + x, gy * 8 + y) - m;
      ss += d * d;
    }
  }
  return {m, std::sqrt(ss / 64.0)};
}

// Sum of squared level-1 Haar detail coefficients over the region, per pixel.
double haar_detail_energy(const ImagePlane& img, std::size_t gx, std::size_t gy) {
  double energy = 0.0;
  for (std::size_t y = 0; y < 8; y += 2) {
    for (std::size_t x = 0; x < 8; x += 2) {
      const double p = img(gx * 8 + x, gy * 8 + y);
      const double q = img(gx * 8 + x + 1, gy * 8 + y);
      const double r = img(gx * 8 + x, gy * 8 + y + 1);
      const double s = img(gx * 8 + x + 1, gy * 8 + y + 1);
      const double lh = (p + q - r - s) / 2.0;
      const double hl = (p - q + r - s) / 2.0;
      const double hh = (p - q - r + s) / 2.0;
      energy += lh * lh + hl * hl + hh * hh;
    }
  }
  return energy / 64.0;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<long>(mid));
  return (lo + hi) / 2.0;
}

std::string format_sig9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

void ConfidenceMap::validate() const {
  if (values.size() != grid_width * grid_height) {
    throw FormatError("confidence map has " + std::to_string(values.size()) + " values, header says " +
                      std::to_string(grid_width) + "x" + std::to_string(grid_height));
  }
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw FormatError("confidence value " + format_sig9(v) + " outside [0,1]");
    }
  }
}

std::pair<std::size_t, std::size_t> confidence_grid_dims(std::size_t width, std::size_t height) {
  return {(width + 7) / 8, (height + 7) / 8};
}

ConfidenceMap ground_truth_confidence(const ImagePlane& y_gt, const ImagePlane& y_dnn) {
  require_same_dims(y_gt, y_dnn, "ground_truth_confidence");
  const ImagePlane err = pad_to_multiple(abs_diff(y_gt, y_dnn), 8);
  const ImagePlane pooled = avg_pool8(err);
  ConfidenceMap conf{pooled.width(), pooled.height(), std::vector<double>(pooled.size())};
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    conf.values[i] = clamp01(1.0 - pooled.data()[i] / kSigmaMax);
  }
  return conf;
}

FeatureGrid region_features(const ImagePlane& noisy, const ImagePlane& filtered,
                            const ImagePlane& noise_map) {
  require_same_dims(noisy, filtered, "region_features");
  require_same_dims(noisy, noise_map, "region_features");
  const ImagePlane n = pad_to_multiple(noisy, 8);
  const ImagePlane f = pad_to_multiple(filtered, 8);
  const ImagePlane nm = pad_to_multiple(noise_map, 8);
  const ImagePlane residual = subtract(n, f);
  const ImagePlane denoised = subtract(n, nm);

  FeatureGrid grid;
  grid.grid_width = n.width() / 8;
  grid.grid_height = n.height() / 8;
  const std::size_t count = grid.grid_width * grid.grid_height;
  grid.regions.resize(count);

  std::vector<double> noise_std(count);
  for (std::size_t gy = 0; gy < grid.grid_height; ++gy) {
    for (std::size_t gx = 0; gx < grid.grid_width; ++gx) {
      const std::size_t i = gy * grid.grid_width + gx;
      const RegionStats nm_stats = region_stats(nm, gx, gy);
      noise_std[i] = nm_stats.std;
      auto& feat = grid.regions[i];
      feat[0] = region_stats(residual, gx, gy).std;
      feat[1] = std::abs(nm_stats.mean);
      feat[3] = haar_detail_energy(denoised, gx, gy);
      feat[4] = region_stats(f, gx, gy).mean / 255.0;
    }
  }
  const double med = median(noise_std);
  for (std::size_t i = 0; i < count; ++i) grid.regions[i][2] = std::abs(noise_std[i] - med);
  return grid;
}

ConfidenceFit fit_confidence_model(std::span<const std::array<double, kFeatureCount>> features,
                                   std::span<const double> targets, double ridge) {
  if (features.size() != targets.size()) {
    throw DimensionError("fit_confidence_model: feature and target counts differ");
  }
  if (features.size() < kMinTrainingRegions) {
    throw InvalidArgument("fit_confidence_model: need at least " +
                          std::to_string(kMinTrainingRegions) + " regions, got " +
                          std::to_string(features.size()));
  }
  if (ridge < 0.0) throw InvalidArgument("ridge must be non-negative");
  constexpr std::size_t K = kFeatureCount;
  const std::size_t n = features.size();

  ConfidenceModel model;
  model.feature_count = K;
  model.feature_mean.assign(K, 0.0);
  model.feature_scale.assign(K, 1.0);
  for (std::size_t j = 0; j < K; ++j) {
    double sum = 0.0;
    for (const auto& f : features) sum += f[j];
    const double m = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& f : features) ss += (f[j] - m) * (f[j] - m);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    model.feature_mean[j] = m;
    model.feature_scale[j] = sd > 0.0 ? sd : 1.0;
  }

  Eigen::MatrixXd z(n, K + 1);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    z(i, 0) = 1.0;
    for (std::size_t j = 0; j < K; ++j) {
      z(i, j + 1) = (features[i][j] - model.feature_mean[j]) / model.feature_scale[j];
    }
    y(i) = targets[i];
  }

  ConfidenceFit fit;
  fit.samples = n;
  const Eigen::MatrixXd gram = z.transpose() * z;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
  const auto rank = (eig.eigenvalues().array() > 1e-10 * top).count();
  Eigen::VectorXd w;
  if (rank < static_cast<long>(K + 1)) {
    fit.rank_deficient = true;
    w = z.completeOrthogonalDecomposition().solve(y);
  } else {
    Eigen::MatrixXd a = gram;
    for (std::size_t j = 1; j <= K; ++j) a(j, j) += ridge;
    w = a.ldlt().solve(z.transpose() * y);
  }
  model.weights.assign(w.data(), w.data() + w.size());
  fit.train_rmse = std::sqrt((z * w - y).squaredNorm() / static_cast<double>(n));
  fit.model = std::move(model);
  return fit;
}

ConfidenceFit fit_confidence_model(std::span<const FeatureGrid> features,
                                   std::span<const ConfidenceMap> targets, double ridge) {
  if (features.size() != targets.size()) {
    throw DimensionError("fit_confidence_model: need one target map per feature grid");
  }
  std::vector<std::array<double, kFeatureCount>> rows;
  std::vector<double> ys;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].grid_width != targets[i].grid_width ||
        features[i].grid_height != targets[i].grid_height) {
      throw DimensionError("fit_confidence_model: feature grid and target map sizes differ");
    }
    rows.insert(rows.end(), features[i].regions.begin(), features[i].regions.end());
    ys.insert(ys.end(), targets[i].values.begin(), targets[i].values.end());
  }
  return fit_confidence_model(std::span<const std::array<double, kFeatureCount>>(rows),
                              std::span<const double>(ys), ridge);
}

double predict_region(const ConfidenceModel& model, std::span<const double> features) {
  if (features.size() != model.feature_count || model.weights.size() != model.feature_count + 1) {
    throw DimensionError("predict_confidence: model expects " +
                         std::to_string(model.feature_count) + " features, got " +
                         std::to_string(features.size()));
  }
  double c = model.weights[0];
  for (std::size_t j = 0; j < model.feature_count; ++j) {
    c += model.weights[j + 1] * ((features[j] - model.feature_mean[j]) / model.feature_scale[j]);
  }
  return clamp01(c);
}

ConfidenceMap predict_confidence(const ConfidenceModel& model, const FeatureGrid& features) {
  ConfidenceMap conf{features.grid_width, features.grid_height, {}};
  conf.values.reserve(features.regions.size());
  for (const auto& f : features.regions) conf.values.push_back(predict_region(model, f));
  return conf;
}

std::string serialize_model(const ConfidenceModel& model) {
  nlohmann::json j;
  j["format"] = "ccid-confidence-model";
  j["version"] = 1;
  j["feature_count"] = model.feature_count;
  j["weights"] = model.weights;
  j["feature_mean"] = model.feature_mean;
  j["feature_scale"] = model.feature_scale;
  return j.dump(2) + "\n";
}

ConfidenceModel parse_model(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "ccid-confidence-model") {
      throw FormatError("not a confidence model file");
    }
    ConfidenceModel m;
    m.feature_count = j.at("feature_count").get<std::size_t>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.feature_mean = j.at("feature_mean").get<std::vector<double>>();
    m.feature_scale = j.at("feature_scale").get<std::vector<double>>();
    if (m.weights.size() != m.feature_count + 1 || m.feature_mean.size() != m.feature_count ||
        m.feature_scale.size() != m.feature_count) {
      throw FormatError("confidence model arrays do not match feature_count");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed confidence model: ") + e.what());
  }
}

void save_model(const ConfidenceModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << serialize_model(model);
}

ConfidenceModel load_model(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_model(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

RgbImage render_overlay(const ConfidenceMap& conf, double threshold, std::size_t width,
                        std::size_t height) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw InvalidArgument("overlay threshold must lie in (0,1)");
  }
  conf.validate();
  if (width == 0) width = conf.grid_width * 8;
  if (height == 0) height = conf.grid_height * 8;
  if (width > conf.grid_width * 8 || height > conf.grid_height * 8) {
    throw DimensionError("render_overlay: image larger than the confidence grid covers");
  }
  RgbImage img{width, height, std::vector<std::uint8_t>(width * height * 3, 0)};
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double c = conf(x / 8, y / 8);
      std::uint8_t* px = &img.rgb[(y * width + x) * 3];
      if (c >= threshold) {
        px[1] = quantize8(255.0 * (c - threshold) / (1.0 - threshold));
      } else {
        const std::uint8_t v = quantize8(255.0 * (threshold - c) / threshold);
        px[0] = v;
        px[2] = v;
      }
    }
  }
  return img;
}

std::string format_confidence(const ConfidenceMap& conf) {
  conf.validate();
  std::string out =
      "CMAP " + std::to_string(conf.grid_width) + " " + std::to_string(conf.grid_height) + "\n";
  for (std::size_t gy = 0; gy < conf.grid_height; ++gy) {
    for (std::size_t gx = 0; gx < conf.grid_width; ++gx) {
      if (gx) out += ' ';
      out += format_sig9(conf(gx, gy));
    }
    out += '\n';
  }
  return out;
}

ConfidenceMap parse_confidence(std::string_view text) {
  std::size_t pos = 0;
  const auto skip_space = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  const auto next_token = [&]() -> std::string_view {
    skip_space();
    const std::size_t start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    return text.substr(start, pos - start);
  };
  const auto parse_size = [](std::string_view tok) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || v == 0) {
      throw FormatError("bad CMAP dimension '" + std::string(tok) + "'");
    }
    return v;
  };

  if (next_token() != "CMAP") throw FormatError("missing CMAP header");
  ConfidenceMap conf;
  conf.grid_width = parse_size(next_token());
  conf.grid_height = parse_size(next_token());
  for (;;) {
    const auto tok = next_token();
    if (tok.empty()) break;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw FormatError("bad CMAP value '" + std::string(tok) + "'");
    }
    conf.values.push_back(v);
  }
  conf.validate();
  return conf;
}

void save_confidence(const ConfidenceMap& conf, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << format_confidence(conf);
}

ConfidenceMap load_confidence(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return parse_confidence(
        std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace ccid
