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
#include <random>
#include <string>
#include <string_view>

#include "ccid/image.hpp"

namespace ccid {

enum class NoiseKind { gaussian, poisson };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::gaussian;
  double sigma = 25.0;  // intensity units, gaussian only
  double peak = 30.0;   // expected photon count at intensity 255, poisson only
  std::uint64_t seed = 0;
};

/// Parses "gaussian:25" or "poisson:30"; the seed is left at its default.
NoiseSpec parse_noise_spec(std::string_view text);
std::string to_string(const NoiseSpec& spec);

/// Seeded sampler with a platform-independent output sequence.
///
/// Draws come from std::mt19937_64, whose sequence the C++ standard fixes.
/// The standard library's distributions are implementation-defined, so the
/// uniform, normal and Poisson transforms are implemented here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0,1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() noexcept;

  /// Poisson(rate): inversion for small rates, transformed rejection (PTRS) above 10.
  std::uint64_t poisson(double rate) noexcept;

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

/// Mixes a base seed with a stream index (splitmix64 finaliser).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

/// Rounds to the 2^-32 grid that every generated or adapted plane lives on.
/// Differences of two on-grid values below 2^20 are exact doubles, which keeps
/// residual bookkeeping (noisy = denoised + noise_map) bit-exact.
double snap_to_grid(double v) noexcept;

ImagePlane add_awgn(const ImagePlane& img, const NoiseSpec& spec);
ImagePlane add_poisson(const ImagePlane& img, const NoiseSpec& spec);

/// Dispatches on spec.kind.
ImagePlane add_noise(const ImagePlane& img, const NoiseSpec& spec);

}  // namespace ccid
