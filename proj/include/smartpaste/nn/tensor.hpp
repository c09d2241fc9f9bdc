// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace smartpaste::nn {

using Real = double;

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A learnable parameter: row-major values plus a gradient buffer of the same shape.
struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<Real> data;
  std::vector<Real> grad;

  Tensor() = default;
  Tensor(std::string n, std::vector<std::size_t> s);

  std::size_t size() const { return data.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  std::span<Real> row(std::size_t r) { return {data.data() + r * cols(), cols()}; }
  std::span<const Real> row(std::size_t r) const { return {data.data() + r * cols(), cols()}; }

  void zero_grad();
};

/// Named parameter collection. Iteration order is registration order.
class ParamStore {
 public:
  Tensor& add(const std::string& name, std::vector<std::size_t> shape);
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  Tensor* find(const std::string& name);
  const Tensor* find(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const { return tensors_.size(); }
  Tensor& at(std::size_t i) { return *tensors_[i]; }
  const Tensor& at(std::size_t i) const { return *tensors_[i]; }

  void zero_grad();
  std::size_t parameter_count() const;

 private:
  std::vector<std::unique_ptr<Tensor>> tensors_;
  std::map<std::string, std::size_t> index_;
};

/// Uniform in [-a, a], a = sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);

/// Uniform double in [0, 1) from 53 random bits; stable across standard libraries.
inline Real uniform01(std::mt19937_64& rng) {
  return static_cast<Real>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace smartpaste::nn
