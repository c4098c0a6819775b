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

#include "ccid/denoisers.hpp"

#include <unistd.h>

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ccid/errors.hpp"
#include "ccid/io.hpp"
#include "ccid/noise.hpp"
#include "convolve.hpp"

namespace ccid {

namespace {

ImagePlane pad_all_sides(const ImagePlane& img, std::size_t r) {
  ImagePlane out(img.width() + 2 * r, img.height() + 2 * r);
  const auto ri = static_cast<long long>(r);
  for (std::size_t y = 0; y < out.height(); ++y) {
    const std::size_t sy = reflect_index(static_cast<long long>(y) - ri, img.height());
    for (std::size_t x = 0; x < out.width(); ++x) {
      out(x, y) = img(reflect_index(static_cast<long long>(x) - ri, img.width()), sy);
    }
  }
  return out;
}

ImagePlane filter_same(const ImagePlane& img, const std::vector<double>& taps) {
  const ImagePlane padded = pad_all_sides(img, taps.size() / 2);
  return detail::correlate_separable_valid(padded, taps);
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::string replace_all(std::string s, std::string_view from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

std::string read_excerpt(const std::filesystem::path& path, std::size_t limit = 2000) {
  std::ifstream in(path, std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (text.size() > limit) text = text.substr(text.size() - limit);
  return text;
}

class ScratchDir {
 public:
  ScratchDir() {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("ccid-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

ImagePlane run_command(const std::string& command_template, const ImagePlane& noisy) {
  if (command_template.find("{in}") == std::string::npos ||
      command_template.find("{out}") == std::string::npos) {
    throw InvalidArgument("command template needs {in} and {out} placeholders");
  }
  ScratchDir dir;
  const auto in = dir.path() / "noisy.pgm";
  const auto out = dir.path() / "denoised.pgm";
  const auto err = dir.path() / "stderr.txt";
  save_image(noisy, in);
  std::string cmd = replace_all(command_template, "{in}", shell_quote(in.string()));
  cmd = replace_all(cmd, "{out}", shell_quote(out.string()));
  // newline so a trailing shell comment in the template cannot eat the ")"
  cmd = "( " + cmd + "\n) 2> " + shell_quote(err.string());
  const int status = std::system(cmd.c_str());
  if (status != 0) {
    throw ExternalToolError("external denoiser exited with status " + std::to_string(status),
                            read_excerpt(err));
  }
  try {
    return load_image(out);
  } catch (const Error& e) {
    throw ExternalToolError(std::string("external denoiser produced no readable output: ") +
                                e.what(),
                            read_excerpt(err));
  }
}

ImagePlane load_precomputed(const std::filesystem::path& path, const std::string& stem) {
  std::filesystem::path file = path;
  if (std::filesystem::is_directory(path)) {
    file.clear();
    for (const char* ext : {".png", ".pgm", ".ppm"}) {
      const auto candidate = path / (stem + ext);
      if (std::filesystem::exists(candidate)) {
        file = candidate;
        break;
      }
    }
    if (file.empty()) {
      throw ExternalToolError("no precomputed output for '" + stem + "' in " + path.string());
    }
  }
  try {
    return load_image(file);
  } catch (const Error& e) {
    throw ExternalToolError(std::string("cannot load precomputed output: ") + e.what());
  }
}

ImagePlane corrupt_half(const ImagePlane& noisy, const ImagePlane* reference) {
  const ImagePlane smooth = reference ? *reference : gaussian_filter(noisy, 1.5);
  ImagePlane out(noisy.width(), noisy.height());
  const std::size_t split = noisy.width() / 2;
  for (std::size_t y = 0; y < noisy.height(); ++y) {
    for (std::size_t x = 0; x < noisy.width(); ++x) {
      if (x < split) {
        out(x, y) = smooth(x, y);
      } else {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(x + y) / kCorruptPeriod;
        out(x, y) = noisy(x, y) + kCorruptAmplitude * std::sin(phase);
      }
    }
  }
  return out;
}

double parse_positive(std::string_view text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !(v > 0.0)) {
    throw InvalidArgument("expected a positive number, got '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

DenoiserSpec parse_denoiser_spec(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw InvalidArgument("denoiser spec must look like KIND:ARG, got '" + std::string(text) + "'");
  }
  const auto kind = text.substr(0, colon);
  const auto arg = text.substr(colon + 1);
  DenoiserSpec spec;
  if (kind == "gaussian") {
    spec.kind = DenoiserKind::gaussian_filter;
    spec.filter_sigma = parse_positive(arg);
  } else if (kind == "file") {
    spec.kind = DenoiserKind::external_file;
    spec.path = std::string(arg);
  } else if (kind == "cmd") {
    spec.kind = DenoiserKind::external_command;
    spec.command = std::string(arg);
    if (spec.command.find("{in}") == std::string::npos ||
        spec.command.find("{out}") == std::string::npos) {
      throw InvalidArgument("command template needs {in} and {out} placeholders");
    }
  } else if (kind == "mock") {
    spec.kind = DenoiserKind::mock;
    if (arg == "identity") {
      spec.mock_mode = MockMode::identity;
    } else if (arg == "box3") {
      spec.mock_mode = MockMode::box3;
    } else if (arg == "corrupt_half") {
      spec.mock_mode = MockMode::corrupt_half;
    } else if (arg == "clean") {
      spec.mock_mode = MockMode::clean;
    } else {
      throw InvalidArgument("unknown mock mode '" + std::string(arg) + "'");
    }
  } else {
    throw InvalidArgument("unknown denoiser kind '" + std::string(kind) + "'");
  }
  return spec;
}

std::string to_string(const DenoiserSpec& spec) {
  switch (spec.kind) {
    case DenoiserKind::gaussian_filter: {
      std::ostringstream os;
      os << "gaussian:" << spec.filter_sigma;
      return os.str();
    }
    case DenoiserKind::external_file:
      return "file:" + spec.path.string();
    case DenoiserKind::external_command:
      return "cmd:" + spec.command;
    case DenoiserKind::mock:
      switch (spec.mock_mode) {
        case MockMode::identity:
          return "mock:identity";
        case MockMode::box3:
          return "mock:box3";
        case MockMode::corrupt_half:
          return "mock:corrupt_half";
        case MockMode::clean:
          return "mock:clean";
      }
  }
  return "unknown";
}

std::vector<double> gaussian_taps(double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("gaussian sigma must be positive");
  const auto radius = static_cast<long long>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (long long i = -radius; i <= radius; ++i) {
    const double v = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

ImagePlane gaussian_filter(const ImagePlane& img, double sigma) {
  if (img.empty()) throw InvalidArgument("gaussian_filter: empty image");
  return filter_same(img, gaussian_taps(sigma));
}

ImagePlane box3_filter(const ImagePlane& img) {
  if (img.empty()) throw InvalidArgument("box3_filter: empty image");
  return filter_same(img, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
}

DeepOutput make_deep_output(const ImagePlane& noisy, const ImagePlane& denoised) {
  if (!noisy.same_dims(denoised)) {
    throw ExternalToolError("deep denoiser output is " + std::to_string(denoised.width()) + "x" +
                            std::to_string(denoised.height()) + ", expected " +
                            std::to_string(noisy.width()) + "x" + std::to_string(noisy.height()));
  }
  DeepOutput out{ImagePlane(noisy.width(), noisy.height()),
                 ImagePlane(noisy.width(), noisy.height())};
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    const double d = snap_to_grid(denoised.data()[i]);
    out.denoised.data()[i] = d;
    out.noise_map.data()[i] = noisy.data()[i] - d;
  }
  return out;
}

DeepOutput run_deep_denoiser(const DenoiserSpec& spec, const ImagePlane& noisy,
                             const DenoiseContext& ctx) {
  switch (spec.kind) {
    case DenoiserKind::gaussian_filter:
      return make_deep_output(noisy, gaussian_filter(noisy, spec.filter_sigma));
    case DenoiserKind::external_file:
      return make_deep_output(noisy, load_precomputed(spec.path, ctx.image_stem));
    case DenoiserKind::external_command:
      return make_deep_output(noisy, run_command(spec.command, noisy));
    case DenoiserKind::mock:
      switch (spec.mock_mode) {
        case MockMode::identity:
          return make_deep_output(noisy, noisy);
        case MockMode::box3:
          return make_deep_output(noisy, box3_filter(noisy));
        case MockMode::corrupt_half:
          if (ctx.reference) require_same_dims(noisy, *ctx.reference, "corrupt_half reference");
          return make_deep_output(noisy, corrupt_half(noisy, ctx.reference));
        case MockMode::clean:
          if (!ctx.reference) throw InvalidArgument("mock:clean needs a ground-truth image");
          require_same_dims(noisy, *ctx.reference, "mock:clean reference");
          return make_deep_output(noisy, *ctx.reference);
      }
  }
  throw InvalidArgument("unsupported denoiser spec");
}

ImagePlane run_reliable_denoiser(const DenoiserSpec& spec, const ImagePlane& noisy) {
  if (spec.kind != DenoiserKind::gaussian_filter) {
    throw InvalidArgument("the reliable branch must be a gaussian filter");
  }
  return gaussian_filter(noisy, spec.filter_sigma);
}

}  // namespace ccid
