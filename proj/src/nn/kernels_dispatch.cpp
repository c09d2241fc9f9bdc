// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <string>

#include "smartpaste/nn/kernels.hpp"

namespace smartpaste::nn::kernels {

namespace {

const KernelTable kScalar{Impl::Scalar, scalar::dot, scalar::axpy, scalar::gemv, scalar::gemv_t,
                          scalar::ger};
#if SMARTPASTE_HAVE_AVX2_KERNELS
const KernelTable kAvx2{Impl::Avx2, avx2::dot, avx2::axpy, avx2::gemv, avx2::gemv_t, avx2::ger};
#endif

const KernelTable& pick() {
  if (const char* env = std::getenv("SMARTPASTE_KERNELS"); env != nullptr && std::string(env) == "scalar")
    return kScalar;
  return table_for(Impl::Avx2);
}

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

bool avx2_available() {
#if SMARTPASTE_HAVE_AVX2_KERNELS && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

const KernelTable& table_for(Impl impl) {
#if SMARTPASTE_HAVE_AVX2_KERNELS
  if (impl == Impl::Avx2 && avx2_available()) return kAvx2;
#endif
  (void)impl;
  return kScalar;
}

const KernelTable& active() {
  static const KernelTable& table = pick();
  return table;
}

std::string_view impl_name(Impl impl) { return impl == Impl::Avx2 ? "avx2" : "scalar"; }

}  // namespace smartpaste::nn::kernels
