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

#include <cstdio>
#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"

namespace ccid::simd {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(CCID_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const Kernels& select_kernels() {
  const auto candidates = available_kernels();
  const char* forced = std::getenv("CCID_SIMD");
  if (forced && *forced && std::string_view(forced) != "auto") {
    for (const Kernels* k : candidates) {
      if (std::string_view(forced) == k->name) return *k;
    }
    std::fprintf(stderr, "ccid: CCID_SIMD=%s not available, using %s\n", forced,
                 candidates.back()->name);
  }
  return *candidates.back();
}

}  // namespace

const Kernels& scalar_kernels() noexcept { return detail::kScalarKernels; }

std::vector<const Kernels*> available_kernels() {
  std::vector<const Kernels*> out{&detail::kScalarKernels};
#if defined(CCID_HAVE_AVX2)
  if (cpu_has_avx2()) out.push_back(&detail::kAvx2Kernels);
#endif
#if defined(CCID_HAVE_NEON)
  out.push_back(&detail::kNeonKernels);  // baseline on AArch64
#endif
  return out;
}

const Kernels& active_kernels() {
  static const Kernels& chosen = select_kernels();
  return chosen;
}

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

}  // namespace ccid::simd
