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

#include "ccid/simd.hpp"

namespace ccid::simd::detail {

extern const Kernels kScalarKernels;

#if defined(CCID_HAVE_AVX2)
extern const Kernels kAvx2Kernels;
#endif

#if defined(CCID_HAVE_NEON)
extern const Kernels kNeonKernels;
#endif

// Scalar tails shared by the vector variants: each handles elements
// [begin, end) exactly as the reference loop would.
namespace tail {

static inline double blend_mask(double d, double r, double m) {
  const double md = m * d;
  const double om = 1.0 - m;
  const double omr = om * r;
  return md + omr;
}

static inline double blend_weight(double d, double r, double w, double om) {
  const double wd = w * d;
  const double omr = om * r;
  return wd + omr;
}

static inline double ssim(double mu_a, double mu_b, double m_aa, double m_bb, double m_ab, double c1,
                   double c2) {
  const double mu_aa = mu_a * mu_a;
  const double mu_bb = mu_b * mu_b;
  const double mu_ab = mu_a * mu_b;
  const double var_a = m_aa - mu_aa;
  const double var_b = m_bb - mu_bb;
  const double cov = m_ab - mu_ab;
  const double num_l = 2.0 * mu_ab + c1;
  const double num_c = 2.0 * cov + c2;
  const double den_l = mu_aa + mu_bb + c1;
  const double den_c = var_a + var_b + c2;
  const double num = num_l * num_c;
  const double den = den_l * den_c;
  return num / den;
}

}  // namespace tail

}  // namespace ccid::simd::detail
