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

#include "ccid/noise.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <numbers>

#include "ccid/errors.hpp"

namespace ccid {

namespace {

double parse_number(std::string_view text, std::string_view what) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw InvalidArgument("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

NoiseSpec parse_noise_spec(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw InvalidArgument("noise spec must look like gaussian:SIGMA or poisson:PEAK");
  }
  const auto kind = text.substr(0, colon);
  const double value = parse_number(text.substr(colon + 1), "noise level");
  NoiseSpec spec;
  if (kind == "gaussian") {
    if (value < 0.0 || value > 100.0) throw InvalidArgument("gaussian sigma must be in [0,100]");
    spec.kind = NoiseKind::gaussian;
    spec.sigma = value;
  } else if (kind == "poisson") {
    if (!(value > 0.0)) throw InvalidArgument("poisson peak must be positive");
    spec.kind = NoiseKind::poisson;
    spec.peak = value;
  } else {
    throw InvalidArgument("unknown noise kind '" + std::string(kind) + "'");
  }
  return spec;
}

std::string to_string(const NoiseSpec& spec) {
  char buf[64];
  if (spec.kind == NoiseKind::gaussian) {
    std::snprintf(buf, sizeof buf, "gaussian:%g", spec.sigma);
  } else {
    std::snprintf(buf, sizeof buf, "poisson:%g", spec.peak);
  }
  return buf;
}

double Rng::normal() noexcept {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  const double u1 = 1.0 - uniform();  // (0,1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

std::uint64_t Rng::poisson(double rate) noexcept {
  if (!(rate > 0.0)) return 0;
  if (rate < 10.0) {
    const double u = uniform();
    double p = std::exp(-rate);
    double cdf = p;
    std::uint64_t k = 0;
    while (u > cdf && k < 1000) {
      ++k;
      p *= rate / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }
  // Hörmann's PTRS.
  const double slam = std::sqrt(rate);
  const double loglam = std::log(rate);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + rate + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -rate + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double snap_to_grid(double v) noexcept {
  constexpr double kScale = 0x1.0p32;
  return std::round(v * kScale) / kScale;
}

ImagePlane add_awgn(const ImagePlane& img, const NoiseSpec& spec) {
  if (spec.kind != NoiseKind::gaussian) throw InvalidArgument("add_awgn requires a gaussian spec");
  if (spec.sigma < 0.0 || spec.sigma > 100.0) throw InvalidArgument("sigma must be in [0,100]");
  if (spec.sigma == 0.0) return img;
  Rng rng(spec.seed);
  ImagePlane out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    out.data()[i] = snap_to_grid(img.data()[i] + spec.sigma * rng.normal());
  }
  return out;
}

ImagePlane add_poisson(const ImagePlane& img, const NoiseSpec& spec) {
  if (spec.kind != NoiseKind::poisson) throw InvalidArgument("add_poisson requires a poisson spec");
  if (!(spec.peak > 0.0)) throw InvalidArgument("poisson peak must be positive");
  for (double v : img.pixels()) {
    if (v < 0.0) throw InvalidArgument("add_poisson: negative input pixel");
  }
  Rng rng(spec.seed);
  const double to_rate = spec.peak / 255.0;
  const double to_intensity = 255.0 / spec.peak;
  ImagePlane out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const auto k = rng.poisson(img.data()[i] * to_rate);
    out.data()[i] = snap_to_grid(static_cast<double>(k) * to_intensity);
  }
  return out;
}

ImagePlane add_noise(const ImagePlane& img, const NoiseSpec& spec) {
  return spec.kind == NoiseKind::gaussian ? add_awgn(img, spec) : add_poisson(img, spec);
}

}  // namespace ccid
