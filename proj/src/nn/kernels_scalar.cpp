// SPDX-License-Identifier: Apache-2.0
#include "smartpaste/nn/kernels.hpp"

namespace smartpaste::nn::kernels::scalar {

Real dot(const Real* a, const Real* b, std::size_t n) {
  Real s = 0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(Real alpha, const Real* x, Real* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv(const Real* w, std::size_t rows, std::size_t cols, const Real* x, Real* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] += dot(w + r * cols, x, cols);
}

void gemv_t(const Real* w, std::size_t rows, std::size_t cols, const Real* g, Real* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (g[r] != 0) axpy(g[r], w + r * cols, y, cols);
  }
}

void ger(Real* grad_w, std::size_t rows, std::size_t cols, const Real* g, const Real* x) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (g[r] != 0) axpy(g[r], x, grad_w + r * cols, cols);
  }
}

}  // namespace smartpaste::nn::kernels::scalar
