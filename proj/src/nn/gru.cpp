// SPDX-License-Identifier: Apache-2.0
#include "smartpaste/nn/gru.hpp"

namespace smartpaste::nn {

GruCell GruCell::create(ParamStore& store, const std::string& prefix, std::size_t input,
                        std::size_t hidden, std::mt19937_64& rng) {
  for (const char* g : {"z", "r", "h"}) {
    auto& w = store.add(prefix + ".w" + g, {hidden, input});
    glorot_uniform(w, input, hidden, rng);
    auto& u = store.add(prefix + ".u" + g, {hidden, hidden});
    glorot_uniform(u, hidden, hidden, rng);
    store.add(prefix + ".b" + g, {hidden});
  }
  return bind(store, prefix);
}

GruCell GruCell::bind(ParamStore& store, const std::string& prefix) {
  GruCell c;
  c.wz = &store.get(prefix + ".wz");
  c.uz = &store.get(prefix + ".uz");
  c.bz = &store.get(prefix + ".bz");
  c.wr = &store.get(prefix + ".wr");
  c.ur = &store.get(prefix + ".ur");
  c.br = &store.get(prefix + ".br");
  c.wh = &store.get(prefix + ".wh");
  c.uh = &store.get(prefix + ".uh");
  c.bh = &store.get(prefix + ".bh");
  return c;
}

Var gru_step(Tape& tape, const GruCell& cell, Var x, Var h) {
  if (tape.dim(x) != cell.input_size() || tape.dim(h) != cell.hidden_size())
    throw ShapeError("gru_step: input or state size mismatch");
  Var z = tape.sigmoid(tape.affine(*cell.wz, x, cell.uz, h, cell.bz));
  Var r = tape.sigmoid(tape.affine(*cell.wr, x, cell.ur, h, cell.br));
  Var candidate = tape.tanh(tape.affine(*cell.wh, x, cell.uh, tape.mul(r, h), cell.bh));
  return tape.mix(z, h, candidate);
}

}  // namespace smartpaste::nn
