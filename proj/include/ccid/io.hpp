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
#include <filesystem>
#include <span>
#include <vector>

#include "ccid/image.hpp"

namespace ccid {

/// 8-bit interleaved RGB raster, used for confidence overlays.
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;  // width * height * 3

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// Clamp to [0,255] then round half away from zero.
std::uint8_t quantize8(double v) noexcept;

/// Applies quantize8 to every pixel, keeping the result as a plane.
ImagePlane quantize(const ImagePlane& img);

/// Rec. 601 luma of an 8-bit RGB triple, unrounded.
double rec601_luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;

// Decoding accepts 8-bit PNG (gray, gray+alpha, RGB, RGBA, palette) and binary
// PGM/PPM with maxval <= 255. Colour inputs are reduced to Rec. 601 luma.
ImagePlane decode_image(std::span<const std::uint8_t> bytes);
ImagePlane load_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const ImagePlane& img);
std::vector<std::uint8_t> encode_png(const RgbImage& img);
std::vector<std::uint8_t> encode_pgm(const ImagePlane& img);

/// Writes PGM for a .pgm extension and PNG otherwise.
void save_image(const ImagePlane& img, const std::filesystem::path& path);
void save_image(const RgbImage& img, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace ccid
