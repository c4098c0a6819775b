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

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "ccid/image.hpp"
#include "ccid/io.hpp"

namespace ccid::test {

inline std::filesystem::path data_dir() { return CCID_TEST_DATA_DIR; }
inline std::filesystem::path fixtures_dir() { return data_dir() / "fixtures"; }
inline ImagePlane fixture(const std::string& name) { return load_image(fixtures_dir() / name); }

/// Uniform random plane on [lo, hi).
inline ImagePlane random_plane(std::size_t w, std::size_t h, std::uint64_t seed, double lo = 0.0,
                               double hi = 255.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  ImagePlane p(w, h);
  for (auto& v : p.pixels()) v = dist(rng);
  return p;
}

/// Random plane of integers in [0,255], as loaded from an 8-bit file.
inline ImagePlane random_bytes_plane(std::size_t w, std::size_t h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(0, 255);
  ImagePlane p(w, h);
  for (auto& v : p.pixels()) v = dist(rng);
  return p;
}

/// Smooth plane with some structure, on-grid 8-bit values.
inline ImagePlane smooth_plane(std::size_t w, std::size_t h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 6.28);
  const double p1 = phase(rng), p2 = phase(rng);
  ImagePlane p(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      p(x, y) = std::round(128.0 + 60.0 * std::sin(0.11 * x + p1) * std::cos(0.07 * y + p2) +
                           30.0 * ((x / 16 + y / 16) % 2));
    }
  }
  return p;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("ccid-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace ccid::test
