// SPDX-License-Identifier: Apache-2.0
#include "smartpaste/minilang/types.hpp"

#include <algorithm>
#include <stdexcept>

namespace smartpaste::minilang {

TypeLattice::TypeLattice() {
  add({"UnkType", {}, -1, false});
  add({"int", {}, -1, false});
  add({"bool", {}, -1, false});
  add({"string", {}, -1, false});
  add({"void", {}, -1, false});
}

TypeId TypeLattice::add(Entry e) {
  if (by_name_.count(e.name) != 0) throw std::invalid_argument("type already defined: " + e.name);
  const auto id = static_cast<TypeId>(types_.size());
  by_name_.emplace(e.name, id);
  types_.push_back(std::move(e));
  return id;
}

TypeId TypeLattice::add_nominal(const std::string& name) { return add({name, {}, -1, true}); }

void TypeLattice::add_super(TypeId t, TypeId super) {
  if (!contains(t) || !contains(super)) throw std::out_of_range("add_super: unknown type id");
  if (t == kUnk) throw std::invalid_argument("UnkType cannot have supertypes");
  auto& s = types_[t].supers;
  if (std::find(s.begin(), s.end(), super) == s.end()) s.push_back(super);
}

TypeId TypeLattice::array_of(TypeId elem) {
  const std::string n = name(elem) + "[]";
  if (auto it = by_name_.find(n); it != by_name_.end()) return it->second;
  return add({n, {}, elem, false});
}

std::optional<TypeId> TypeLattice::find(std::string_view n) const {
  auto it = by_name_.find(n);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::optional<TypeId> TypeLattice::element(TypeId t) const {
  if (!contains(t) || types_[t].element < 0) return std::nullopt;
  return types_[t].element;
}

void TypeLattice::validate() const {
  // 0 = unvisited, 1 = on stack, 2 = done
  std::vector<int> state(types_.size(), 0);
  std::vector<std::pair<TypeId, std::size_t>> stack;
  for (TypeId start = 0; start < static_cast<TypeId>(types_.size()); ++start) {
    if (state[start] != 0) continue;
    stack.push_back({start, 0});
    state[start] = 1;
    while (!stack.empty()) {
      auto& [t, next] = stack.back();
      if (next < types_[t].supers.size()) {
        const TypeId s = types_[t].supers[next++];
        if (state[s] == 1) throw CycleError("type hierarchy cycle through " + types_[s].name);
        if (state[s] == 0) {
          state[s] = 1;
          stack.push_back({s, 0});
        }
      } else {
        state[t] = 2;
        stack.pop_back();
      }
    }
  }
}

bool TypeLattice::assignable(TypeId from, TypeId to) const {
  if (from == to) return true;
  const auto c = supertype_closure(*this, from);
  return std::binary_search(c.begin(), c.end(), to);
}

std::vector<TypeId> supertype_closure(const TypeLattice& lattice, TypeId t) {
  if (!lattice.contains(t)) return {TypeLattice::kUnk};
  std::vector<TypeId> out{t};
  std::vector<TypeId> work{t};
  while (!work.empty()) {
    const TypeId cur = work.back();
    work.pop_back();
    for (TypeId s : lattice.supers(cur)) {
      if (std::find(out.begin(), out.end(), s) == out.end()) {
        out.push_back(s);
        work.push_back(s);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace smartpaste::minilang
