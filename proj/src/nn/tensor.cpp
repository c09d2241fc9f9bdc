// SPDX-License-Identifier: Apache-2.0
#include "smartpaste/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace smartpaste::nn {

Tensor::Tensor(std::string n, std::vector<std::size_t> s) : name(std::move(n)), shape(std::move(s)) {
  const std::size_t count =
      std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  data.assign(count, 0);
  grad.assign(count, 0);
}

void Tensor::zero_grad() { std::fill(grad.begin(), grad.end(), 0); }

Tensor& ParamStore::add(const std::string& name, std::vector<std::size_t> shape) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter: " + name);
  index_[name] = tensors_.size();
  tensors_.push_back(std::make_unique<Tensor>(name, std::move(shape)));
  return *tensors_.back();
}

Tensor& ParamStore::get(const std::string& name) {
  auto* t = find(name);
  if (t == nullptr) throw std::out_of_range("no parameter named " + name);
  return *t;
}

const Tensor& ParamStore::get(const std::string& name) const {
  const auto* t = find(name);
  if (t == nullptr) throw std::out_of_range("no parameter named " + name);
  return *t;
}

Tensor* ParamStore::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : tensors_[it->second].get();
}

const Tensor* ParamStore::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : tensors_[it->second].get();
}

void ParamStore::zero_grad() {
  for (auto& t : tensors_) t->zero_grad();
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t->size();
  return n;
}

void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const Real a = std::sqrt(6.0 / static_cast<Real>(fan_in + fan_out));
  for (auto& x : t.data) x = (2 * uniform01(rng) - 1) * a;
}

}  // namespace smartpaste::nn
