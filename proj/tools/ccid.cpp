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

// ccid: command-line front end for sweeps, OOD tables, confidence statistics,
// single-image fusion, surrogate training and the HTTP service.

#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "ccid/errors.hpp"
#include "ccid/harness.hpp"
#include "ccid/io.hpp"
#include "ccid/service.hpp"
#include "ccid/simd.hpp"

namespace {

using namespace ccid;

struct FusionOptions {
  std::string mode = "dwt";
  std::string schedule = "low_first";
  std::string wavelet = "haar";
  std::size_t levels = kGlobalDwtLevels;
  double a = 0.1;
  double eps = 1e-3;
  double t = 0.8;

  void attach(CLI::App& app, bool multi_mode) {
    app.add_option("--mode", mode,
                   multi_mode ? "Fusion modes, comma-separated: dct,dwt,dwt-conf"
                              : "Fusion mode: dct|dwt|dwt-conf")
        ->capture_default_str();
    app.add_option("--schedule", schedule, "DWT band schedule: uniform|low_first")
        ->capture_default_str();
    app.add_option("--wavelet", wavelet, "Full-image wavelet: haar|db2")->capture_default_str();
    app.add_option("--levels", levels, "Full-image DWT levels")->capture_default_str();
    app.add_option("--a", a, "Mask scale")->capture_default_str();
    app.add_option("--eps", eps, "Mask offset")->capture_default_str();
    app.add_option("--t", t, "Confidence threshold")->capture_default_str();
  }

  FusionParams params() const {
    FusionParams p;
    p.schedule = parse_schedule(schedule);
    p.wavelet = parse_wavelet(wavelet);
    p.levels = levels;
    p.a = a;
    p.eps = eps;
    p.t = t;
    p.mode = modes().front();
    p.validate();
    return p;
  }

  std::vector<FusionMode> modes() const {
    std::vector<FusionMode> out;
    std::size_t start = 0;
    for (;;) {
      const auto pos = mode.find(',', start);
      out.push_back(parse_fusion_mode(std::string_view(mode).substr(start, pos - start)));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    return out;
  }
};

struct ExperimentOptions {
  std::string dataset;
  std::string noise = "gaussian:25";
  std::string reliable = "gaussian:4";
  std::string deep;
  std::string grid = "0:1:0.05";
  std::string conf = "none";
  std::string out;
  std::uint64_t seed = 0;
  bool clamp_deep = false;
  bool no_images = false;
  FusionOptions fusion;

  void attach(CLI::App& app, bool with_noise) {
    app.add_option("--dataset", dataset, "Directory of clean images")->required();
    if (with_noise) {
      app.add_option("--noise", noise, "Noise model: gaussian:SIGMA|poisson:PEAK")
          ->capture_default_str();
    }
    app.add_option("--reliable", reliable, "Reliable denoiser: gaussian:SIGMA")
        ->capture_default_str();
    app.add_option("--deep", deep,
                   "Deep denoiser: file:DIR|cmd:TEMPLATE {in} {out}|mock:MODE")
        ->required();
    app.add_option("--grid", grid, "Weights: START:STOP:STEP or a comma list")
        ->capture_default_str();
    app.add_option("--conf", conf, "Confidence: oracle|model:PATH|file:DIR|none")
        ->capture_default_str();
    app.add_option("--out", out, "Output directory")->required();
    app.add_option("--seed", seed, "Base noise seed")->capture_default_str();
    app.add_flag("--clamp-deep", clamp_deep, "Clamp the deep output to [0,255] before fusion");
    app.add_flag("--no-images", no_images, "Skip writing fused PNGs");
    fusion.attach(app, true);
  }

  ExperimentSpec spec() const {
    ExperimentSpec s;
    s.dataset = dataset;
    s.noise = parse_noise_spec(noise);
    s.noise.seed = seed;
    s.reliable = parse_denoiser_spec(reliable);
    s.deep = parse_denoiser_spec(deep);
    s.fusion = fusion.params();
    s.modes = fusion.modes();
    s.grid = parse_weight_grid(grid);
    s.confidence = parse_confidence_spec(conf);
    s.out = out;
    s.clamp_deep = clamp_deep;
    s.write_images = !no_images;
    return s;
  }
};

void print_curve(const SweepResult& r) {
  std::cout << "w,mode,psnr_db,ssim\n";
  for (const auto& p : r.curve) {
    std::cout << format_metric(p.w) << ',' << to_string(p.mode) << ','
              << format_metric(p.quantized.psnr_db) << ',' << format_metric(p.quantized.ssim)
              << '\n';
  }
}

int run_sweep(const ExperimentOptions& opt) {
  const SweepResult r = weight_sweep(opt.spec());
  print_curve(r);
  if (r.partial()) {
    std::cerr << "ccid: warning: " << r.failures.size()
              << " image(s) failed; results are partial (see failures.csv)\n";
    return 2;
  }
  return 0;
}

int run_ood(const ExperimentOptions& opt, const std::vector<std::string>& case_texts) {
  std::vector<OodCase> cases;
  for (const auto& c : case_texts) cases.push_back(parse_ood_case(c));
  const OodResult r = ood_eval(opt.spec(), cases);
  std::cout << "ood_type,reliable,deep,ccid_d,ccid,best_w_psnr,best_w_ssim\n";
  for (const auto& row : r.quantized) {
    auto pair = [](const MetricReport& m) {
      return format_metric(m.psnr_db) + "/" + format_metric(m.ssim);
    };
    std::cout << row.type << ',' << pair(row.reliable) << ',' << pair(row.deep) << ','
              << pair(row.ccid_default) << ',' << pair(row.ccid_best) << ','
              << format_metric(row.best_w_psnr) << ',' << format_metric(row.best_w_ssim) << '\n';
  }
  return 0;
}

struct ConfDistOptions {
  std::string dataset, reliable = "gaussian:4", deep, sigmas = "0:100:10", out;
  std::size_t bins = 20;
  std::uint64_t seed = 0;
};

std::vector<double> parse_levels(const std::string& text) {
  // Noise levels share the weight-grid syntax but live on [0,100].
  std::vector<double> out;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const auto second = text.find(':', colon + 1);
    if (second == std::string::npos) throw InvalidArgument("levels must be START:STOP:STEP");
    const double start = std::stod(text.substr(0, colon));
    const double stop = std::stod(text.substr(colon + 1, second - colon - 1));
    const double step = std::stod(text.substr(second + 1));
    if (!(step > 0.0)) throw InvalidArgument("level step must be positive");
    for (int i = 0; start + i * step <= stop + 1e-9; ++i) out.push_back(start + i * step);
  } else {
    std::size_t start = 0;
    for (;;) {
      const auto pos = text.find(',', start);
      out.push_back(std::stod(text.substr(start, pos - start)));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
  }
  return out;
}

int run_conf_dist(const ConfDistOptions& opt) {
  ConfDistSpec spec;
  spec.dataset = opt.dataset;
  spec.reliable = parse_denoiser_spec(opt.reliable);
  spec.deep = parse_denoiser_spec(opt.deep);
  spec.sigmas = parse_levels(opt.sigmas);
  spec.bins = opt.bins;
  spec.seed = opt.seed;
  spec.out = opt.out;
  const ConfDistResult r = confidence_distribution(spec);
  std::cout << "denoiser,sigma,mean_region,mean_image\n";
  for (const auto& m : r.means) {
    std::cout << m.denoiser << ',' << format_metric(m.sigma) << ','
              << format_metric(m.mean_region) << ',' << format_metric(m.mean_image) << '\n';
  }
  return 0;
}

struct FuseOptions {
  std::string noisy, clean, noise = "gaussian:25", reliable = "gaussian:4", deep = "mock:identity",
                           deep_image, conf = "none", out, conf_out, overlay;
  double w = 0.5;
  std::uint64_t seed = 0;
  bool clamp_deep = false;
  FusionOptions fusion;
};

int run_fuse(const FuseOptions& opt) {
  if (opt.noisy.empty() && opt.clean.empty()) {
    throw InvalidArgument("give --noisy, or --clean to synthesise the noisy input");
  }
  std::optional<ImagePlane> clean;
  if (!opt.clean.empty()) clean = load_image(opt.clean);
  ImagePlane noisy;
  std::string name;
  if (!opt.noisy.empty()) {
    noisy = load_image(opt.noisy);
    name = std::filesystem::path(opt.noisy).stem().string();
  } else {
    NoiseSpec noise = parse_noise_spec(opt.noise);
    noise.seed = derive_seed(opt.seed, 0);
    noisy = add_noise(*clean, noise);
    name = std::filesystem::path(opt.clean).stem().string();
  }
  const DenoiserSpec reliable = parse_denoiser_spec(opt.reliable);
  Scene scene = opt.deep_image.empty()
                    ? make_scene(name, clean, std::move(noisy), reliable,
                                 parse_denoiser_spec(opt.deep))
                    : make_scene_with_deep(name, clean, std::move(noisy), reliable,
                                           load_image(opt.deep_image));
  if (opt.clamp_deep) scene.deep = clamp_deep_output(scene.noisy, scene.deep);

  const ConfidenceSpec conf_spec = parse_confidence_spec(opt.conf);
  std::optional<ConfidenceModel> model;
  if (conf_spec.source == ConfidenceSource::model) model = load_model(conf_spec.path);
  const auto conf = resolve_confidence(scene, conf_spec, model ? &*model : nullptr);

  FusionParams params = opt.fusion.params();
  params.w = opt.w;
  const FusionEngine engine(scene.deep.denoised, scene.reliable);
  const ImagePlane fused = engine.fuse(params, conf ? &*conf : nullptr);
  save_image(fused, opt.out);
  if (conf && !opt.conf_out.empty()) save_confidence(*conf, opt.conf_out);
  if (conf && !opt.overlay.empty()) {
    save_image(render_overlay(*conf, kOverlayThreshold, fused.width(), fused.height()),
               opt.overlay);
  }
  nlohmann::json j{{"image", name}, {"mode", to_string(params.mode)}, {"w", params.w}};
  if (clean) {
    const MetricReport m = evaluate(fused, *clean, true);
    j["psnr_db"] = format_metric(m.psnr_db);
    j["ssim"] = format_metric(m.ssim);
  }
  std::cout << j.dump() << '\n';
  return 0;
}

struct FitOptions {
  std::string dataset, reliable = "gaussian:4", deep, out;
  std::vector<std::string> noises{"gaussian:10", "gaussian:25", "gaussian:50"};
  double ridge = kDefaultRidge;
  std::uint64_t seed = 0;
};

int run_fit(const FitOptions& opt) {
  TrainingSpec spec;
  spec.dataset = opt.dataset;
  for (const auto& n : opt.noises) {
    NoiseSpec noise = parse_noise_spec(n);
    noise.seed = opt.seed;
    spec.noises.push_back(noise);
  }
  spec.reliable = parse_denoiser_spec(opt.reliable);
  spec.deep = parse_denoiser_spec(opt.deep);
  spec.ridge = opt.ridge;
  const ConfidenceFit fit = train_confidence_model(spec);
  save_model(fit.model, opt.out);
  std::cout << "regions " << fit.samples << ", train rmse " << format_metric(fit.train_rmse)
            << (fit.rank_deficient ? ", rank deficient (pseudo-inverse)" : "") << '\n';
  return 0;
}

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = -1;
  std::string model, app, reliable = "gaussian:4", deep = "mock:identity";
  std::size_t max_sessions = service::kDefaultMaxSessions;
};

int run_serve(const ServeOptions& opt) {
  service::ServiceConfig config;
  config.max_sessions = opt.max_sessions;
  config.model = opt.model.empty() ? service::builtin_model() : load_model(opt.model);
  config.app_dir = opt.app;
  config.default_reliable = parse_denoiser_spec(opt.reliable);
  config.default_deep = parse_denoiser_spec(opt.deep);
  const std::uint16_t port =
      opt.port >= 0 ? static_cast<std::uint16_t>(opt.port) : service::port_from_env();
  service::Service svc(std::move(config));
  std::cerr << "ccid: serving on http://" << opt.host << ':' << port << " (kernels "
            << simd::to_string(simd::active_kernels().isa) << ")\n";
  svc.listen(opt.host, port);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Controllable confidence-based image denoising workbench"};
  app.require_subcommand(1);

  ExperimentOptions sweep_opt;
  auto* sweep = app.add_subcommand("sweep", "Mean PSNR/SSIM over a weight grid");
  sweep_opt.attach(*sweep, true);

  ExperimentOptions ood_opt;
  std::vector<std::string> ood_cases;
  auto* ood = app.add_subcommand("ood", "Reliable / deep / fixed-weight / best-weight table");
  ood_opt.attach(*ood, false);
  ood->add_option("--case", ood_cases, "TYPE,NOISE[,DATASET]; TYPE is data_domain|noise_level|noise_type")
      ->required();

  ConfDistOptions cd_opt;
  auto* cd = app.add_subcommand("conf-dist", "Oracle confidence histograms over noise levels");
  cd->add_option("--dataset", cd_opt.dataset, "Directory of clean images")->required();
  cd->add_option("--reliable", cd_opt.reliable, "Reliable denoiser")->capture_default_str();
  cd->add_option("--deep", cd_opt.deep, "Deep denoiser")->required();
  cd->add_option("--sigmas", cd_opt.sigmas, "Gaussian noise levels")->capture_default_str();
  cd->add_option("--bins", cd_opt.bins, "Histogram bins on [0,1]")->capture_default_str();
  cd->add_option("--seed", cd_opt.seed, "Base noise seed")->capture_default_str();
  cd->add_option("--out", cd_opt.out, "Output directory")->required();

  FuseOptions fuse_opt;
  auto* fuse = app.add_subcommand("fuse", "Fuse one image");
  fuse->add_option("--noisy", fuse_opt.noisy, "Noisy input image");
  fuse->add_option("--clean", fuse_opt.clean, "Ground truth (metrics, oracle confidence)");
  fuse->add_option("--noise", fuse_opt.noise, "Noise synthesised from --clean when --noisy is absent")
      ->capture_default_str();
  fuse->add_option("--seed", fuse_opt.seed, "Base noise seed")->capture_default_str();
  fuse->add_option("--reliable", fuse_opt.reliable, "Reliable denoiser")->capture_default_str();
  fuse->add_option("--deep", fuse_opt.deep, "Deep denoiser")->capture_default_str();
  fuse->add_option("--deep-image", fuse_opt.deep_image, "Precomputed deep output");
  fuse->add_option("--w", fuse_opt.w, "Fusion weight")->capture_default_str();
  fuse->add_option("--conf", fuse_opt.conf, "Confidence: oracle|model:PATH|file:PATH|none")
      ->capture_default_str();
  fuse->add_option("--out", fuse_opt.out, "Output image (.png or .pgm)")->required();
  fuse->add_option("--conf-out", fuse_opt.conf_out, "Write the confidence map here");
  fuse->add_option("--overlay", fuse_opt.overlay, "Write the confidence overlay PNG here");
  fuse->add_flag("--clamp-deep", fuse_opt.clamp_deep, "Clamp the deep output to [0,255]");
  fuse_opt.fusion.attach(*fuse, false);

  FitOptions fit_opt;
  auto* fit = app.add_subcommand("fit-model", "Fit the linear confidence surrogate");
  fit->add_option("--dataset", fit_opt.dataset, "Directory of clean images")->required();
  fit->add_option("--noise", fit_opt.noises, "Training noise models (repeatable)")
      ->capture_default_str();
  fit->add_option("--reliable", fit_opt.reliable, "Reliable denoiser")->capture_default_str();
  fit->add_option("--deep", fit_opt.deep, "Deep denoiser")->required();
  fit->add_option("--ridge", fit_opt.ridge, "Ridge penalty")->capture_default_str();
  fit->add_option("--seed", fit_opt.seed, "Base noise seed")->capture_default_str();
  fit->add_option("--out", fit_opt.out, "Model JSON path")->required();

  ServeOptions serve_opt;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--host", serve_opt.host, "Bind address")->capture_default_str();
  serve->add_option("--port", serve_opt.port, "Port (default: CCID_PORT or 8787)");
  serve->add_option("--model", serve_opt.model, "Confidence model JSON (default: built-in)");
  serve->add_option("--app", serve_opt.app, "Static UI directory served under /app");
  serve->add_option("--reliable", serve_opt.reliable, "Default reliable denoiser")
      ->capture_default_str();
  serve->add_option("--deep", serve_opt.deep, "Default deep denoiser")->capture_default_str();
  serve->add_option("--max-sessions", serve_opt.max_sessions, "Sessions kept in memory")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed()) return run_sweep(sweep_opt);
    if (ood->parsed()) return run_ood(ood_opt, ood_cases);
    if (cd->parsed()) return run_conf_dist(cd_opt);
    if (fuse->parsed()) return run_fuse(fuse_opt);
    if (fit->parsed()) return run_fit(fit_opt);
    if (serve->parsed()) return run_serve(serve_opt);
  } catch (const ExternalToolError& e) {
    std::cerr << "ccid: error: " << e.what() << '\n';
    if (!e.stderr_excerpt().empty()) std::cerr << e.stderr_excerpt() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "ccid: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
