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

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "ccid/confidence.hpp"
#include "ccid/fusion.hpp"
#include "ccid/harness.hpp"
#include "ccid/metrics.hpp"
#include "ccid/transforms.hpp"
#include "support.hpp"

namespace ccid {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

DctSpectrum naive_dct(const ImagePlane& img) {
  const std::size_t w = img.width(), h = img.height();
  auto scale = [](std::size_t k, std::size_t n) { return std::sqrt((k == 0 ? 1.0 : 2.0) / n); };
  DctSpectrum out{w, h, std::vector<double>(w * h)};
  for (std::size_t ky = 0; ky < h; ++ky)
    for (std::size_t kx = 0; kx < w; ++kx) {
      double acc = 0.0;
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
          acc += img(x, y) * std::cos(std::numbers::pi * (2.0 * x + 1.0) * kx / (2.0 * w)) *
                 std::cos(std::numbers::pi * (2.0 * y + 1.0) * ky / (2.0 * h));
      out(kx, ky) = scale(kx, w) * scale(ky, h) * acc;
    }
  return out;
}

Outcome transforms() {
  Outcome o;
  double worst_dct = 0.0, worst_dwt = 0.0, worst_oracle = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const ImagePlane img = test::random_plane(64, 64, 1000 + seed, -50.0, 300.0);
    worst_dct = std::max(worst_dct, max_abs_diff(idct2(dct2(img)), img));
    const Wavelet wv = seed % 2 ? Wavelet::db2 : Wavelet::haar;
    const std::size_t levels = 1 + seed % max_dwt_levels(64, 64);
    worst_dwt = std::max(worst_dwt, max_abs_diff(idwt2(dwt2(img, levels, wv)), img));
    if (seed < 50) {
      const ImagePlane tile = test::random_plane(8, 8, 5000 + seed);
      const DctSpectrum a = dct2(tile), b = naive_dct(tile);
      for (std::size_t i = 0; i < 64; ++i) worst_oracle = std::max(worst_oracle, std::abs(a.coeffs[i] - b.coeffs[i]));
    }
  }
  o.check(worst_dct <= 1e-6, "dct round trip " + fmt(worst_dct));
  o.check(worst_dwt <= 1e-6, "dwt round trip " + fmt(worst_dwt));
  o.check(worst_oracle <= 1e-9, "dct vs naive " + fmt(worst_oracle));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("max errors dct ") + fmt(worst_dct) + ", dwt " +
              fmt(worst_dwt) + ", oracle " + fmt(worst_oracle);
  return o;
}

Outcome endpoints() {
  Outcome o;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t w = 24 + seed * 7, h = 16 + seed * 5;
    const ImagePlane deep = test::random_plane(w, h, seed);
    const ImagePlane rel = test::random_plane(w, h, seed + 77);
    const auto [gw, gh] = confidence_grid_dims(w, h);
    ConfidenceMap any{gw, gh, {}}, confident{gw, gh, {}};
    for (std::size_t i = 0; i < gw * gh; ++i) {
      any.values.push_back(static_cast<double>((i * 37 + seed) % 101) / 100.0);
      confident.values.push_back(0.8 + 0.2 * static_cast<double>((i * 13 + seed) % 11) / 10.0);
    }
    for (FusionMode mode : {FusionMode::dct, FusionMode::dwt_global, FusionMode::dwt_confidence}) {
      for (DwtSchedule sch : {DwtSchedule::uniform, DwtSchedule::low_first}) {
        FusionParams p;
        p.mode = mode;
        p.schedule = sch;
        p.w = 0.0;
        worst = std::max(worst, max_abs_diff(fuse(deep, rel, nullptr, p), rel));
        if (mode == FusionMode::dwt_confidence) worst = std::max(worst, max_abs_diff(fuse(deep, rel, &any, p), rel));
        p.w = 1.0;
        worst = std::max(worst, max_abs_diff(fuse(deep, rel, nullptr, p), deep));
        if (mode == FusionMode::dwt_confidence) {
          worst = std::max(worst, max_abs_diff(fuse(deep, rel, &confident, p), deep));
        }
      }
    }
  }
  o.check(worst <= 1e-6, "endpoint deviation " + fmt(worst));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("max deviation ") + fmt(worst);
  return o;
}

Outcome trend() {
  Outcome o;
  ExperimentSpec spec;
  spec.dataset = test::fixtures_dir();
  spec.noise = parse_noise_spec("gaussian:25");
  spec.noise.seed = 2024;
  spec.reliable = parse_denoiser_spec("gaussian:4");
  spec.deep = parse_denoiser_spec("mock:clean");
  spec.modes = {FusionMode::dct, FusionMode::dwt_global};
  spec.fusion.schedule = DwtSchedule::low_first;
  spec.grid = parse_weight_grid("0:0.9:0.1");
  const SweepResult r = weight_sweep(spec);
  o.check(r.images.size() >= 5, "only " + std::to_string(r.images.size()) + " images");
  double worst_psnr = 0.0, worst_ssim = 0.0;
  for (std::size_t i = 1; i < r.curve.size(); ++i) {
    if (r.curve[i].mode != r.curve[i - 1].mode) continue;
    worst_psnr = std::max(worst_psnr, r.curve[i - 1].quantized.psnr_db - r.curve[i].quantized.psnr_db);
    worst_ssim = std::max(worst_ssim, r.curve[i - 1].quantized.ssim - r.curve[i].quantized.ssim);
  }
  o.check(worst_psnr <= 0.01, "PSNR drop " + fmt(worst_psnr) + " dB");
  o.check(worst_ssim <= 0.001, "SSIM drop " + fmt(worst_ssim));
  std::string summary = std::to_string(r.images.size()) + " images;";
  for (const auto& p : r.curve) {
    if (p.w == 0.0 || p.w == 0.9) summary += " " + std::string(to_string(p.mode)) + "@" + fmt(p.w) + "=" + fmt(p.quantized.psnr_db) + "dB";
  }
  summary += "; largest drops " + fmt(std::max(worst_psnr, 0.0)) + " dB, " + fmt(std::max(worst_ssim, 0.0));
  o.detail += (o.detail.empty() ? "" : "; ") + summary;
  return o;
}

Outcome confidence_oracle() {
  Outcome o;
  const ImagePlane gt = test::fixture("camera.png");
  const std::pair<double, double> cases[] = {{0, 1.0}, {10, 0.9}, {50, 0.5}, {150, 0.0}};
  for (auto [delta, expected] : cases) {
    ImagePlane est = gt;
    for (auto& v : est.pixels()) v += delta;
    for (double c : ground_truth_confidence(gt, est).values) {
      if (std::abs(c - expected) > 1e-9) {
        o.check(false, "delta " + fmt(delta) + " gave " + fmt(c));
        break;
      }
    }
  }
  return o;
}

Outcome region_law() {
  Outcome o;
  struct Row {
    double w, c, t, expected;
  };
  // Worked by hand: w * (1 + c - t), then clamped.
  const Row rows[] = {
      {0.5, 0.9, 0.8, 0.55},  {0.9, 1.0, 0.8, 1.0},   {0.0, 1.0, 0.8, 0.0},   {1.0, 0.0, 0.8, 0.2},
      {1.0, 1.0, 0.8, 1.0},   {0.5, 0.8, 0.8, 0.5},   {0.2, 0.0, 0.8, 0.04},  {0.6, 0.3, 0.8, 0.3},
      {0.0, 0.0, 0.8, 0.0},   {0.7, 0.95, 0.8, 0.805}, {0.85, 1.0, 0.8, 1.0}, {0.8, 1.0, 0.8, 0.96},
      {0.4, 0.5, 0.5, 0.4},   {0.4, 0.0, 0.5, 0.2},   {0.9, 0.2, 0.99, 0.189}, {0.3, 1.0, 0.01, 0.597},
      {0.6, 1.0, 0.1, 1.0},   {0.25, 0.6, 0.8, 0.2},  {0.1, 0.1, 0.8, 0.03},  {0.5, 0.0, 0.8, 0.1},
  };
  for (const Row& r : rows) {
    const double got = region_weight(r.w, r.c, r.t);
    o.check(std::abs(got - r.expected) <= 1e-12,
            "w=" + fmt(r.w) + " c=" + fmt(r.c) + " t=" + fmt(r.t) + " gave " + fmt(got));
  }
  return o;
}

Outcome mask_law() {
  Outcome o;
  // 0.1 * (1/0.501 - 1) = 0.1 * 0.499 / 0.501, in extended precision
  const long double expected = 0.0499L / 0.501L;
  const double s = mask_spread(0.5, 0.1, 1e-3);
  o.check(std::abs(static_cast<long double>(s) - expected) <= 1e-12L, "s(0.5) = " + fmt(s));
  std::vector<double> prev(32 * 32, 0.0);
  std::size_t violations = 0;
  for (int i = 0; i <= 100; ++i) {
    FusionParams p;
    p.mode = FusionMode::dct;
    p.w = i / 100.0;
    const FusionMask m = dct_fusion_mask(32, 32, p);
    for (std::size_t k = 0; k < m.values.size(); ++k) violations += m.values[k] < prev[k];
    prev = m.values;
  }
  o.check(violations == 0, std::to_string(violations) + " monotonicity violations");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("s(0.5)=") + fmt(s);
  return o;
}

Outcome guided_benefit() {
  Outcome o;
  const DenoiserSpec reliable = parse_denoiser_spec("gaussian:4");
  const DenoiserSpec deep = parse_denoiser_spec("mock:corrupt_half");
  // Single-image check on the fixture the corrupt_half mock is described against.
  const auto files = list_dataset(test::fixtures_dir());
  std::size_t wins = 0;
  std::string margins;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const ImagePlane clean = load_image(files[i]);
    NoiseSpec n = parse_noise_spec("gaussian:25");
    n.seed = derive_seed(77, i);
    const Scene scene = make_scene(files[i].stem().string(), clean, add_noise(clean, n), reliable, deep);
    const ConfidenceMap conf = oracle_confidence(scene);
    FusionParams p;
    p.mode = FusionMode::dwt_confidence;
    p.w = 0.5;
    const double guided = evaluate(fuse(scene.deep.denoised, scene.reliable, &conf, p), clean).psnr_db;
    const double unguided = evaluate(fuse(scene.deep.denoised, scene.reliable, nullptr, p), clean).psnr_db;
    wins += guided > unguided;
    margins += (margins.empty() ? "" : ",") + fmt(guided - unguided);
  }
  o.check(wins == files.size(), "guided beat unguided on " + std::to_string(wins) + "/" + std::to_string(files.size()));

  ExperimentSpec spec;
  spec.dataset = test::fixtures_dir();
  spec.noise = parse_noise_spec("gaussian:25");
  spec.noise.seed = 77;
  spec.reliable = reliable;
  spec.deep = deep;
  spec.grid = default_weight_grid();
  spec.modes = {FusionMode::dwt_global, FusionMode::dwt_confidence};
  spec.confidence = parse_confidence_spec("oracle");
  const SweepResult r = weight_sweep(spec);
  const double floor = std::max(r.reliable_quantized.psnr_db, r.deep_quantized.psnr_db);
  std::string best_text;
  for (FusionMode mode : spec.modes) {
    double best = -1e300, best_w = 0.0;
    for (const auto& p : r.curve) {
      if (p.mode == mode && p.quantized.psnr_db > best) {
        best = p.quantized.psnr_db;
        best_w = p.w;
      }
    }
    o.check(best >= floor, std::string(to_string(mode)) + " best " + fmt(best) + " < " + fmt(floor));
    best_text += " " + std::string(to_string(mode)) + " best " + fmt(best) + "dB@w=" + fmt(best_w);
  }
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("guided-unguided dB per image [") + margins +
              "]; reliable " + fmt(r.reliable_quantized.psnr_db) + "dB, deep " + fmt(r.deep_quantized.psnr_db) +
              "dB;" + best_text;
  return o;
}

Outcome metric_oracles() {
  Outcome o;
  const ImagePlane a = test::random_plane(64, 64, 9, 30.0, 200.0);
  ImagePlane b20 = a, b40 = a;
  for (auto& v : b20.pixels()) v += 25.5;
  for (auto& v : b40.pixels()) v += 2.55;
  const double p20 = psnr(a, b20), p40 = psnr(a, b40);
  o.check(std::abs(p20 - 20.0) <= 1e-9, "20 dB case gave " + fmt(p20));
  o.check(std::abs(p40 - 40.0) <= 1e-9, "40 dB case gave " + fmt(p40));
  o.check(std::isinf(psnr(a, a)), "identical images not infinite");
  for (const char* name : {"camera.png", "coins.pgm", "moon.pgm"}) {
    const ImagePlane img = test::fixture(name);
    const double s = ssim(img, img);
    o.check(s == 1.0, std::string(name) + " self SSIM " + fmt(s));
  }
  return o;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CCID_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome o;
  test::TempDir a, b;
  const std::string args = "sweep --dataset " + test::fixtures_dir().string() +
                           " --noise gaussian:25 --reliable gaussian:4 --deep mock:corrupt_half"
                           " --mode dct,dwt,dwt-conf --conf oracle --grid 0:1:0.05 --seed 1234 --out ";
  o.check(run_cli(args + a.path().string()) == 0, "first run failed");
  o.check(run_cli(args + b.path().string()) == 0, "second run failed");
  std::size_t files = 0, csvs = 0, pngs = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(a.path())) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a.path());
    ++files;
    csvs += rel.extension() == ".csv";
    pngs += rel.extension() == ".png";
    if (!fs::exists(b.path() / rel) || slurp(e.path()) != slurp(b.path() / rel)) ++differing;
  }
  std::size_t other = 0;
  for (const auto& e : fs::recursive_directory_iterator(b.path())) other += e.is_regular_file();
  o.check(files == other, "file counts differ");
  o.check(differing == 0, std::to_string(differing) + " files differ");
  o.check(csvs > 0 && pngs > 0, "nothing written");
  o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(csvs) + " CSVs and " + std::to_string(pngs) +
              " PNGs compared";
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0: no limit
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace ccid

int main() {
  using namespace ccid;
  const Criterion criteria[] = {
      {1, "transform round trips and DCT oracle", 10.0, transforms},
      {2, "fusion endpoint identities", 5.0, endpoints},
      {3, "clean-deep weight sweep is non-decreasing", 30.0, trend},
      {4, "constant-error confidence", 0.0, confidence_oracle},
      {5, "region weight law", 0.0, region_law},
      {6, "DCT mask spread and monotonicity", 5.0, mask_law},
      {7, "confidence-guided fusion benefit", 10.0, guided_benefit},
      {8, "PSNR and SSIM oracles", 0.0, metric_oracles},
      {9, "byte-identical CLI sweeps", 0.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0.0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += "; over the " + fmt(c.budget_s) + " s budget";
    }
    failures += !o.pass;
    std::printf("%s criterion %d: %s (%.2f s) %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
