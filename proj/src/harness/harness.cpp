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

#include "ccid/harness.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>

#include "ccid/errors.hpp"
#include "ccid/io.hpp"

namespace ccid {

namespace {

double parse_number(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InvalidArgument("not a number: '" + std::string(text) + "'");
  }
  return v;
}

double round12(double v) { return std::round(v * 1e12) / 1e12; }

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::string weight_tag(double w) { return "w" + format_metric(w); }

MetricReport mean_report(const std::vector<MetricReport>& rows) {
  MetricReport m;
  for (const auto& r : rows) {
    m.psnr_db += r.psnr_db;
    m.ssim += r.ssim;
  }
  const auto n = static_cast<double>(rows.size());
  m.psnr_db /= n;
  m.ssim /= n;
  return m;
}

struct ImageEval {
  std::string name;
  MetricReport reliable_q, reliable_e;
  MetricReport deep_q, deep_e;
  MetricReport deep_clamped_q;
  std::vector<MetricReport> fused_q, fused_e;  // [mode][w] flattened
};

ImageEval evaluate_image(const ExperimentSpec& spec, std::size_t index,
                         const std::filesystem::path& file, const ConfidenceModel* model) {
  ImageEval ev;
  ev.name = file.stem().string();
  const ImagePlane clean = load_image(file);
  NoiseSpec noise = spec.noise;
  noise.seed = derive_seed(spec.noise.seed, index);
  ImagePlane noisy = add_noise(clean, noise);
  Scene scene = make_scene(ev.name, clean, std::move(noisy), spec.reliable, spec.deep);
  const DeepOutput clamped = clamp_deep_output(scene.noisy, scene.deep);
  if (spec.clamp_deep) scene.deep = clamped;
  const auto conf = resolve_confidence(scene, spec.confidence, model);

  ev.reliable_q = evaluate(scene.reliable, clean, true);
  ev.reliable_e = evaluate(scene.reliable, clean, false);
  ev.deep_q = evaluate(scene.deep.denoised, clean, true);
  ev.deep_e = evaluate(scene.deep.denoised, clean, false);
  ev.deep_clamped_q = evaluate(clamped.denoised, clean, true);

  const bool writing = !spec.out.empty();
  if (writing && conf) {
    save_confidence(*conf, spec.out / "conf" / (ev.name + ".cmap"));
    save_image(render_overlay(*conf, kOverlayThreshold, clean.width(), clean.height()),
               spec.out / "conf" / (ev.name + "_overlay.png"));
  }

  const FusionEngine engine(scene.deep.denoised, scene.reliable);
  for (const FusionMode mode : spec.modes) {
    for (const double w : spec.grid) {
      FusionParams params = spec.fusion;
      params.mode = mode;
      params.w = w;
      const ImagePlane fused = engine.fuse(params, conf ? &*conf : nullptr);
      ev.fused_q.push_back(evaluate(fused, clean, true));
      ev.fused_e.push_back(evaluate(fused, clean, false));
      if (writing && spec.write_images) {
        save_image(fused, spec.out / "fused" /
                              (ev.name + "_" + std::string(to_string(mode)) + "_" +
                               weight_tag(w) + ".png"));
      }
    }
  }
  return ev;
}

void write_curve(const std::filesystem::path& path, const std::vector<CurvePoint>& curve,
                 bool quantized) {
  auto out = open_csv(path);
  out << "w,mode,psnr_db,ssim\n";
  for (const auto& p : curve) {
    const MetricReport& r = quantized ? p.quantized : p.exact;
    out << format_metric(p.w) << ',' << to_string(p.mode) << ',' << format_metric(r.psnr_db)
        << ',' << format_metric(r.ssim) << '\n';
  }
}

const std::vector<std::string_view> kOodTypes{"data_domain", "noise_level", "noise_type"};

}  // namespace

std::vector<double> default_weight_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(round12(i * 0.05));
  return grid;
}

std::vector<double> parse_weight_grid(std::string_view text) {
  std::vector<double> grid;
  if (text.find(':') != std::string_view::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw InvalidArgument("weight grid must be START:STOP:STEP");
    const double start = parse_number(parts[0]);
    const double stop = parse_number(parts[1]);
    const double step = parse_number(parts[2]);
    if (!(step > 0.0)) throw InvalidArgument("weight grid step must be positive");
    const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
    if (count < 0) throw InvalidArgument("weight grid stop must not precede start");
    for (long long i = 0; i <= count; ++i) {
      grid.push_back(round12(start + static_cast<double>(i) * step));
    }
  } else {
    for (const auto part : split(text, ',')) grid.push_back(parse_number(part));
  }
  validate_weight_grid(grid);
  return grid;
}

void validate_weight_grid(std::span<const double> grid) {
  if (grid.empty()) throw InvalidArgument("weight grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] <= 1.0)) {
      throw InvalidArgument("weight grid values must lie in [0,1]");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw InvalidArgument("weight grid must be sorted and free of duplicates");
    }
  }
}

std::vector<std::filesystem::path> list_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("dataset directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) {
      return static_cast<char>(std::tolower(c));
    });
    if (ext == ".png" || ext == ".pgm" || ext == ".ppm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
  return files;
}

SweepResult weight_sweep(const ExperimentSpec& spec) {
  validate_weight_grid(spec.grid);
  if (spec.modes.empty()) throw InvalidArgument("no fusion mode requested");
  const auto files = list_dataset(spec.dataset);
  if (files.empty()) throw InvalidArgument("dataset " + spec.dataset.string() + " has no images");

  std::optional<ConfidenceModel> model;
  if (spec.confidence.source == ConfidenceSource::model) model = load_model(spec.confidence.path);

  const bool writing = !spec.out.empty();
  if (writing) {
    std::filesystem::create_directories(spec.out / "metrics");
    if (spec.write_images) std::filesystem::create_directories(spec.out / "fused");
    if (spec.confidence.source != ConfidenceSource::none) {
      std::filesystem::create_directories(spec.out / "conf");
    }
  }

  SweepResult result;
  std::vector<ImageEval> evals;
  for (std::size_t i = 0; i < files.size(); ++i) {
    try {
      evals.push_back(evaluate_image(spec, i, files[i], model ? &*model : nullptr));
      result.images.push_back(evals.back().name);
    } catch (const Error& e) {
      result.failures.push_back({files[i].stem().string(), e.what()});
    }
  }
  if (evals.empty()) {
    throw Error("every image failed; first error: " + result.failures.front().error);
  }

  auto column = [&](auto member) {
    std::vector<MetricReport> rows;
    for (const auto& ev : evals) rows.push_back(ev.*member);
    return rows;
  };
  result.reliable_quantized = mean_report(column(&ImageEval::reliable_q));
  result.reliable_exact = mean_report(column(&ImageEval::reliable_e));
  result.deep_quantized = mean_report(column(&ImageEval::deep_q));
  result.deep_exact = mean_report(column(&ImageEval::deep_e));

  const std::size_t nw = spec.grid.size();
  for (std::size_t m = 0; m < spec.modes.size(); ++m) {
    for (std::size_t k = 0; k < nw; ++k) {
      std::vector<MetricReport> q, e;
      for (const auto& ev : evals) {
        q.push_back(ev.fused_q[m * nw + k]);
        e.push_back(ev.fused_e[m * nw + k]);
      }
      result.curve.push_back({spec.grid[k], spec.modes[m], mean_report(q), mean_report(e)});
    }
  }

  if (writing) {
    write_curve(spec.out / "sweep.csv", result.curve, true);
    write_curve(spec.out / "sweep_float.csv", result.curve, false);
    auto named = [&](auto pick) {
      std::vector<NamedMetric> rows;
      for (const auto& ev : evals) rows.push_back({ev.name, pick(ev)});
      return rows;
    };
    write_metrics_csv(spec.out / "metrics" / "reliable.csv",
                      named([](const ImageEval& ev) { return ev.reliable_q; }));
    write_metrics_csv(spec.out / "metrics" / "deep.csv",
                      named([](const ImageEval& ev) { return ev.deep_q; }));
    write_metrics_csv(spec.out / "metrics" / "deep_clamped.csv",
                      named([](const ImageEval& ev) { return ev.deep_clamped_q; }));
    for (std::size_t m = 0; m < spec.modes.size(); ++m) {
      for (std::size_t k = 0; k < nw; ++k) {
        const auto file = std::string(to_string(spec.modes[m])) + "_" + weight_tag(spec.grid[k]);
        write_metrics_csv(spec.out / "metrics" / (file + ".csv"),
                          named([&](const ImageEval& ev) { return ev.fused_q[m * nw + k]; }));
      }
    }
    const auto failures_path = spec.out / "failures.csv";
    if (result.partial()) {
      auto out = open_csv(failures_path);
      out << "image,error\n";
      for (const auto& f : result.failures) {
        std::string msg = f.error;
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        std::replace(msg.begin(), msg.end(), '"', '\'');
        out << f.image << ",\"" << msg << "\"\n";
      }
    } else {
      std::filesystem::remove(failures_path);
    }
  }
  return result;
}

OodCase parse_ood_case(std::string_view text) {
  const auto parts = split(text, ',');
  if (parts.size() < 2 || parts.size() > 3) {
    throw InvalidArgument("OOD case must be TYPE,NOISE[,DATASET], got '" + std::string(text) + "'");
  }
  if (std::find(kOodTypes.begin(), kOodTypes.end(), parts[0]) == kOodTypes.end()) {
    throw InvalidArgument("OOD type must be data_domain, noise_level or noise_type, got '" +
                          std::string(parts[0]) + "'");
  }
  OodCase c;
  c.type = std::string(parts[0]);
  c.noise = parse_noise_spec(parts[1]);
  if (parts.size() == 3) c.dataset = std::filesystem::path(parts[2]);
  return c;
}

OodResult ood_eval(const ExperimentSpec& base, std::span<const OodCase> cases) {
  if (cases.empty()) throw InvalidArgument("no OOD cases given");
  if (base.modes.empty()) throw InvalidArgument("no fusion mode requested");
  std::vector<double> grid = base.grid;
  validate_weight_grid(grid);
  if (!std::binary_search(grid.begin(), grid.end(), kDefaultFusionWeight)) {
    grid.insert(std::lower_bound(grid.begin(), grid.end(), kDefaultFusionWeight),
                kDefaultFusionWeight);
  }
  if (!base.out.empty()) std::filesystem::create_directories(base.out);

  OodResult result;
  for (const auto& c : cases) {
    if (std::find(kOodTypes.begin(), kOodTypes.end(), c.type) == kOodTypes.end()) {
      throw InvalidArgument("unknown OOD type '" + c.type + "'");
    }
    ExperimentSpec spec = base;
    spec.noise = c.noise;
    spec.noise.seed = base.noise.seed;
    if (!c.dataset.empty()) spec.dataset = c.dataset;
    spec.modes = {base.modes.front()};
    spec.grid = grid;
    spec.out.clear();
    const SweepResult sweep = weight_sweep(spec);
    if (!base.out.empty()) write_curve(base.out / ("ood_" + c.type + "_sweep.csv"), sweep.curve, true);

    for (const bool quantized : {true, false}) {
      OodRow row;
      row.type = c.type;
      row.reliable = quantized ? sweep.reliable_quantized : sweep.reliable_exact;
      row.deep = quantized ? sweep.deep_quantized : sweep.deep_exact;
      row.ccid_best.psnr_db = -std::numeric_limits<double>::infinity();
      row.ccid_best.ssim = -std::numeric_limits<double>::infinity();
      for (const auto& p : sweep.curve) {
        const MetricReport& r = quantized ? p.quantized : p.exact;
        if (p.w == kDefaultFusionWeight) row.ccid_default = r;
        if (r.psnr_db > row.ccid_best.psnr_db) {
          row.ccid_best.psnr_db = r.psnr_db;
          row.best_w_psnr = p.w;
        }
        if (r.ssim > row.ccid_best.ssim) {
          row.ccid_best.ssim = r.ssim;
          row.best_w_ssim = p.w;
        }
      }
      (quantized ? result.quantized : result.exact).push_back(row);
    }
  }

  if (!base.out.empty()) {
    for (const bool quantized : {true, false}) {
      auto out = open_csv(base.out / (quantized ? "ood.csv" : "ood_float.csv"));
      out << "ood_type,reliable_psnr_db,reliable_ssim,deep_psnr_db,deep_ssim,ccid_d_psnr_db,"
             "ccid_d_ssim,ccid_psnr_db,ccid_ssim,best_w_psnr,best_w_ssim\n";
      for (const auto& r : quantized ? result.quantized : result.exact) {
        out << r.type;
        for (const auto* m : {&r.reliable, &r.deep, &r.ccid_default, &r.ccid_best}) {
          out << ',' << format_metric(m->psnr_db) << ',' << format_metric(m->ssim);
        }
        out << ',' << format_metric(r.best_w_psnr) << ',' << format_metric(r.best_w_ssim) << '\n';
      }
    }
  }
  return result;
}

ConfDistResult confidence_distribution(const ConfDistSpec& spec) {
  if (spec.bins < 1) throw InvalidArgument("histogram needs at least one bin");
  if (spec.sigmas.empty()) throw InvalidArgument("no noise levels given");
  for (const double s : spec.sigmas) {
    if (!(s >= 0.0 && s <= kSigmaMax)) throw InvalidArgument("noise levels must lie in [0,100]");
  }
  const auto files = list_dataset(spec.dataset);
  if (files.empty()) {
    throw InvalidArgument("confidence distribution needs ground-truth images; " +
                          spec.dataset.string() + " has none");
  }
  std::vector<ImagePlane> cleans;
  for (const auto& f : files) cleans.push_back(load_image(f));

  ConfDistResult result;
  const std::size_t nb = spec.bins;
  struct Accumulator {
    std::vector<std::size_t> counts;
    std::vector<double> image_fraction;
    double sum = 0.0;
    double image_mean_sum = 0.0;
    std::size_t regions = 0;
  };
  for (std::size_t si = 0; si < spec.sigmas.size(); ++si) {
    const double sigma = spec.sigmas[si];
    Accumulator acc[2];
    for (auto& a : acc) {
      a.counts.assign(nb, 0);
      a.image_fraction.assign(nb, 0.0);
    }
    for (std::size_t i = 0; i < cleans.size(); ++i) {
      NoiseSpec noise;
      noise.kind = NoiseKind::gaussian;
      noise.sigma = sigma;
      noise.seed = derive_seed(derive_seed(spec.seed, si), i);
      const Scene scene = make_scene(files[i].stem().string(), cleans[i],
                                     add_noise(cleans[i], noise), spec.reliable, spec.deep);
      const ConfidenceMap maps[2] = {ground_truth_confidence(cleans[i], scene.reliable),
                                     ground_truth_confidence(cleans[i], scene.deep.denoised)};
      for (int d = 0; d < 2; ++d) {
        const auto& values = maps[d].values;
        std::vector<std::size_t> local(nb, 0);
        double local_sum = 0.0;
        for (const double c : values) {
          const auto bin = std::min(nb - 1, static_cast<std::size_t>(c * static_cast<double>(nb)));
          ++local[bin];
          local_sum += c;
        }
        const auto n = static_cast<double>(values.size());
        for (std::size_t b = 0; b < nb; ++b) {
          acc[d].counts[b] += local[b];
          acc[d].image_fraction[b] += static_cast<double>(local[b]) / n;
        }
        acc[d].sum += local_sum;
        acc[d].image_mean_sum += local_sum / n;
        acc[d].regions += values.size();
      }
    }
    result.regions_per_level = acc[0].regions;
    const auto images = static_cast<double>(cleans.size());
    for (int d = 0; d < 2; ++d) {
      const std::string name = d == 0 ? "reliable" : "deep";
      for (std::size_t b = 0; b < nb; ++b) {
        HistogramRow row;
        row.denoiser = name;
        row.sigma = sigma;
        row.bin_lo = static_cast<double>(b) / static_cast<double>(nb);
        row.bin_hi = static_cast<double>(b + 1) / static_cast<double>(nb);
        row.count = acc[d].counts[b];
        row.region_fraction = static_cast<double>(row.count) / static_cast<double>(acc[d].regions);
        row.image_fraction = acc[d].image_fraction[b] / images;
        result.histogram.push_back(row);
      }
      result.means.push_back({name, sigma, acc[d].sum / static_cast<double>(acc[d].regions),
                              acc[d].image_mean_sum / images});
    }
  }

  if (!spec.out.empty()) {
    std::filesystem::create_directories(spec.out);
    auto hist = open_csv(spec.out / "conf_hist.csv");
    hist << "denoiser,sigma,bin_lo,bin_hi,count,region_fraction,image_fraction\n";
    for (const auto& r : result.histogram) {
      hist << r.denoiser << ',' << format_metric(r.sigma) << ',' << format_metric(r.bin_lo) << ','
           << format_metric(r.bin_hi) << ',' << r.count << ',' << format_metric(r.region_fraction)
           << ',' << format_metric(r.image_fraction) << '\n';
    }
    auto means = open_csv(spec.out / "conf_mean.csv");
    means << "denoiser,sigma,mean_region,mean_image\n";
    for (const auto& r : result.means) {
      means << r.denoiser << ',' << format_metric(r.sigma) << ',' << format_metric(r.mean_region)
            << ',' << format_metric(r.mean_image) << '\n';
    }
  }
  return result;
}

ConfidenceFit train_confidence_model(const TrainingSpec& spec) {
  if (spec.noises.empty()) throw InvalidArgument("no training noise levels given");
  const auto files = list_dataset(spec.dataset);
  if (files.empty()) throw InvalidArgument("training dataset has no images");
  std::vector<FeatureGrid> features;
  std::vector<ConfidenceMap> targets;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const ImagePlane clean = load_image(files[i]);
    for (std::size_t ni = 0; ni < spec.noises.size(); ++ni) {
      NoiseSpec noise = spec.noises[ni];
      noise.seed = derive_seed(derive_seed(noise.seed, ni), i);
      const Scene scene = make_scene(files[i].stem().string(), clean, add_noise(clean, noise),
                                     spec.reliable, spec.deep);
      features.push_back(region_features(scene.noisy, scene.reliable, scene.deep.noise_map));
      targets.push_back(ground_truth_confidence(clean, scene.deep.denoised));
    }
  }
  return fit_confidence_model(features, targets, spec.ridge);
}

}  // namespace ccid
