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

#include "ccid/io.hpp"

#include <png.h>

#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <string>

#include "ccid/errors.hpp"

namespace ccid {

std::uint8_t quantize8(double v) noexcept {
  if (!(v > 0.0)) return 0;  // also maps NaN to 0
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(std::round(v));
}

ImagePlane quantize(const ImagePlane& img) {
  ImagePlane out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) out.data()[i] = quantize8(img.data()[i]);
  return out;
}

double rec601_luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

//------------------------------------------------------------------------------
// Netpbm

namespace {

bool is_pnm(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6');
}

class PnmHeaderReader {
 public:
  explicit PnmHeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes), pos_(2) {}

  std::size_t next_uint() {
    skip_space_and_comments();
    std::size_t v = 0;
    bool any = false;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > (1u << 24)) throw FormatError("PNM header value out of range");
      ++pos_;
      any = true;
    }
    if (!any) throw FormatError("malformed PNM header");
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw FormatError("malformed PNM header");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
};

ImagePlane decode_pnm(std::span<const std::uint8_t> bytes) {
  const bool color = bytes[1] == '6';
  PnmHeaderReader reader(bytes);
  const std::size_t width = reader.next_uint();
  const std::size_t height = reader.next_uint();
  const std::size_t maxval = reader.next_uint();
  if (width == 0 || height == 0) throw FormatError("PNM image has zero size");
  if (maxval == 0 || maxval > 255) {
    throw FormatError("unsupported PNM bit depth (maxval " + std::to_string(maxval) + ")");
  }
  const std::size_t offset = reader.raster_offset();
  const std::size_t channels = color ? 3 : 1;
  if (bytes.size() < offset + width * height * channels) {
    throw FormatError("truncated PNM raster");
  }
  const auto raster = bytes.subspan(offset);
  ImagePlane out(width, height);
  // Non-255 maxval is rescaled so the plane stays on the [0,255] scale.
  const double scale = 255.0 / static_cast<double>(maxval);
  for (std::size_t i = 0; i < width * height; ++i) {
    double v = color ? rec601_luma(raster[3 * i], raster[3 * i + 1], raster[3 * i + 2])
                     : static_cast<double>(raster[i]);
    out.data()[i] = maxval == 255 ? v : v * scale;
  }
  return out;
}

//------------------------------------------------------------------------------
// PNG

struct PngReadSource {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

void png_read_from_span(png_structp png, png_bytep out, png_size_t len) {
  auto* src = static_cast<PngReadSource*>(png_get_io_ptr(png));
  if (src->pos + len > src->bytes.size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, src->bytes.data() + src->pos, len);
  src->pos += len;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t len) {
  auto* dst = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  dst->insert(dst->end(), data, data + len);
}

void png_flush_noop(png_structp) {}

[[noreturn]] void png_throw(png_structp png, png_const_charp msg) {
  auto* err = static_cast<std::string*>(png_get_error_ptr(png));
  if (err) *err = msg;
  png_longjmp(png, 1);
}

void png_warn_silently(png_structp, png_const_charp) {}

ImagePlane decode_png(std::span<const std::uint8_t> bytes) {
  std::string error;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_throw, png_warn_silently);
  if (!png) throw FormatError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw FormatError("png_create_info_struct failed");
  }

  PngReadSource src{bytes};
  std::vector<std::uint8_t> raster;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  int channels = 0;
  int bit_depth = 0;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("PNG decode failed: " + error);
  }

  png_set_read_fn(png, &src, png_read_from_span);
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);

  if (bit_depth > 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("unsupported PNG bit depth " + std::to_string(bit_depth));
  }
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  raster.resize(stride * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = raster.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  ImagePlane out(width, height);
  for (std::size_t y = 0; y < height; ++y) {
    const std::uint8_t* row = raster.data() + y * stride;
    for (std::size_t x = 0; x < width; ++x) {
      out(x, y) = channels >= 3 ? rec601_luma(row[3 * x], row[3 * x + 1], row[3 * x + 2])
                                : static_cast<double>(row[x]);
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_png_raw(std::size_t width, std::size_t height, int color_type,
                                         std::span<const std::uint8_t> raster, int channels) {
  std::string error;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_throw, png_warn_silently);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  std::vector<std::uint8_t> out;
  std::vector<png_bytep> rows(height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encode failed: " + error);
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  // Fixed settings keep encoded bytes identical across runs.
  png_set_compression_level(png, 6);
  png_set_filter(png, 0, PNG_FILTER_NONE);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = width * static_cast<std::size_t>(channels);
  for (std::size_t y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(raster.data() + y * stride);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

bool has_extension(const std::filesystem::path& path, const char* ext) {
  std::string e = path.extension().string();
  for (auto& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return e == ext;
}

}  // namespace

ImagePlane decode_image(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSig, 8) == 0) return decode_png(bytes);
  if (is_pnm(bytes)) return decode_pnm(bytes);
  throw FormatError("unrecognised image format (expected PNG or binary PGM/PPM)");
}

ImagePlane load_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_image(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_png(const ImagePlane& img) {
  std::vector<std::uint8_t> raster(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) raster[i] = quantize8(img.data()[i]);
  return encode_png_raw(img.width(), img.height(), PNG_COLOR_TYPE_GRAY, raster, 1);
}

std::vector<std::uint8_t> encode_png(const RgbImage& img) {
  if (img.rgb.size() != img.width * img.height * 3) {
    throw DimensionError("RgbImage buffer does not match its dimensions");
  }
  return encode_png_raw(img.width, img.height, PNG_COLOR_TYPE_RGB, img.rgb, 3);
}

std::vector<std::uint8_t> encode_pgm(const ImagePlane& img) {
  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + img.size());
  for (double v : img.pixels()) out.push_back(quantize8(v));
  return out;
}

void save_image(const ImagePlane& img, const std::filesystem::path& path) {
  write_file(path, has_extension(path, ".pgm") ? encode_pgm(img) : encode_png(img));
}

void save_image(const RgbImage& img, const std::filesystem::path& path) {
  write_file(path, encode_png(img));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace ccid
