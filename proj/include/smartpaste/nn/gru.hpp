// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>
#include <string>

#include "smartpaste/nn/tape.hpp"

namespace smartpaste::nn {

/// Gate weights of one GRU cell. The tensors are owned by a ParamStore.
///
///   z  = sigmoid(Wz x + Uz h + bz)
///   r  = sigmoid(Wr x + Ur h + br)
///   h~ = tanh(Wh x + Uh (r * h) + bh)
///   h' = (1 - z) * h + z * h~
struct GruCell {
  Tensor* wz = nullptr;
  Tensor* uz = nullptr;
  Tensor* bz = nullptr;
  Tensor* wr = nullptr;
  Tensor* ur = nullptr;
  Tensor* br = nullptr;
  Tensor* wh = nullptr;
  Tensor* uh = nullptr;
  Tensor* bh = nullptr;

  std::size_t input_size() const { return wz->cols(); }
  std::size_t hidden_size() const { return wz->rows(); }

  /// Registers "<prefix>.wz" ... "<prefix>.bh" in `store`. Weights Glorot-uniform, biases zero.
  static GruCell create(ParamStore& store, const std::string& prefix, std::size_t input,
                        std::size_t hidden, std::mt19937_64& rng);
  /// Binds to tensors already present in `store` (e.g. after loading a checkpoint).
  static GruCell bind(ParamStore& store, const std::string& prefix);
};

/// One GRU step on the tape. Throws ShapeError on mismatched sizes.
Var gru_step(Tape& tape, const GruCell& cell, Var x, Var h);

}  // namespace smartpaste::nn
