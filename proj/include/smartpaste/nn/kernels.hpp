// SPDX-License-Identifier: Apache-2.0
/**
 * @file   kernels.hpp
 * @brief  Dense vector/matrix kernels used by the autodiff tape.
 *
 * Every kernel has a scalar reference implementation and an AVX2+FMA
 * variant. The variant is chosen once at startup from the CPU feature flags;
 * setting SMARTPASTE_KERNELS=scalar in the environment forces the reference
 * path. Matrices are dense row-major.
 */
#pragma once

#include <cstddef>
#include <string_view>

namespace smartpaste::nn::kernels {

using Real = double;

enum class Impl { Scalar, Avx2 };

/// Function table for one implementation.
struct KernelTable {
  Impl impl;
  /// sum_i a[i] * b[i]
  Real (*dot)(const Real* a, const Real* b, std::size_t n);
  /// y += alpha * x
  void (*axpy)(Real alpha, const Real* x, Real* y, std::size_t n);
  /// y += W x, W is rows x cols
  void (*gemv)(const Real* w, std::size_t rows, std::size_t cols, const Real* x, Real* y);
  /// y += W^T g, W is rows x cols, g has rows entries, y has cols entries
  void (*gemv_t)(const Real* w, std::size_t rows, std::size_t cols, const Real* g, Real* y);
  /// G += g x^T, G is rows x cols
  void (*ger)(Real* grad_w, std::size_t rows, std::size_t cols, const Real* g, const Real* x);
};

namespace scalar {
Real dot(const Real* a, const Real* b, std::size_t n);
void axpy(Real alpha, const Real* x, Real* y, std::size_t n);
void gemv(const Real* w, std::size_t rows, std::size_t cols, const Real* x, Real* y);
void gemv_t(const Real* w, std::size_t rows, std::size_t cols, const Real* g, Real* y);
void ger(Real* grad_w, std::size_t rows, std::size_t cols, const Real* g, const Real* x);
}  // namespace scalar

#ifndef SMARTPASTE_HAVE_AVX2_KERNELS
#define SMARTPASTE_HAVE_AVX2_KERNELS 0
#endif

#if SMARTPASTE_HAVE_AVX2_KERNELS
namespace avx2 {
Real dot(const Real* a, const Real* b, std::size_t n);
void axpy(Real alpha, const Real* x, Real* y, std::size_t n);
void gemv(const Real* w, std::size_t rows, std::size_t cols, const Real* x, Real* y);
void gemv_t(const Real* w, std::size_t rows, std::size_t cols, const Real* g, Real* y);
void ger(Real* grad_w, std::size_t rows, std::size_t cols, const Real* g, const Real* x);
}  // namespace avx2
#endif

const KernelTable& scalar_table();

/// True when the running CPU supports AVX2 and FMA and the variant was compiled in.
bool avx2_available();

/// Table for an explicit implementation. Falls back to scalar if unavailable.
const KernelTable& table_for(Impl impl);

/// The process-wide table picked at first use.
const KernelTable& active();

std::string_view impl_name(Impl impl);

}  // namespace smartpaste::nn::kernels
