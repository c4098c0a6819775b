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

#include "ccid/metrics.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "ccid/errors.hpp"
#include "ccid/io.hpp"
#include "convolve.hpp"

namespace ccid {

namespace {

constexpr std::size_t kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kDynamicRange = 255.0;

std::array<double, kSsimWindow> ssim_taps() {
  std::array<double, kSsimWindow> taps{};
  constexpr int radius = kSsimWindow / 2;
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    taps[i + radius] = std::exp(-(i * i) / (2.0 * kSsimSigma * kSsimSigma));
    sum += taps[i + radius];
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

}  // namespace

double psnr(const ImagePlane& a, const ImagePlane& b) {
  require_same_dims(a, b, "psnr");
  if (a.empty()) throw InvalidArgument("psnr: empty image");
  double sse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    sse += d * d;
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(a.size());
  return 10.0 * std::log10(kDynamicRange * kDynamicRange / mse);
}

double ssim(const ImagePlane& a, const ImagePlane& b) {
  require_same_dims(a, b, "ssim");
  if (a.width() < kSsimWindow || a.height() < kSsimWindow) {
    throw InvalidArgument("ssim: images must be at least 11x11");
  }
  static const auto taps = ssim_taps();
  const auto& k = simd::active_kernels();

  ImagePlane aa(a.width(), a.height()), bb(a.width(), a.height()), ab(a.width(), a.height());
  k.multiply(aa.data(), a.data(), a.data(), a.size());
  k.multiply(bb.data(), b.data(), b.data(), b.size());
  k.multiply(ab.data(), a.data(), b.data(), a.size());

  const ImagePlane mu_a = detail::correlate_separable_valid(a, taps);
  const ImagePlane mu_b = detail::correlate_separable_valid(b, taps);
  const ImagePlane m_aa = detail::correlate_separable_valid(aa, taps);
  const ImagePlane m_bb = detail::correlate_separable_valid(bb, taps);
  const ImagePlane m_ab = detail::correlate_separable_valid(ab, taps);

  constexpr double c1 = (0.01 * kDynamicRange) * (0.01 * kDynamicRange);
  constexpr double c2 = (0.03 * kDynamicRange) * (0.03 * kDynamicRange);
  ImagePlane map(mu_a.width(), mu_a.height());
  k.ssim_map(map.data(), mu_a.data(), mu_b.data(), m_aa.data(), m_bb.data(), m_ab.data(),
             map.size(), c1, c2);
  return mean(map);
}

MetricReport evaluate(const ImagePlane& output, const ImagePlane& reference, bool quantized) {
  if (!quantized) return {psnr(output, reference), ssim(output, reference)};
  const ImagePlane q = quantize(output);
  return {psnr(q, reference), ssim(q, reference)};
}

std::string format_metric(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<NamedMetric>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "image,psnr_db,ssim\n";
  for (const auto& r : rows) {
    out << r.image << ',' << format_metric(r.report.psnr_db) << ',' << format_metric(r.report.ssim)
        << '\n';
  }
}

}  // namespace ccid
