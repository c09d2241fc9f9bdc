// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smartpaste/minilang/token.hpp"

namespace smartpaste::minilang {

class CycleError : public SourceError {
 public:
  using SourceError::SourceError;
};

/// Nominal type lattice with primitive, array and declared types. TypeId 0 is
/// UnkType, which stands for anything unknown and has no supertypes.
class TypeLattice {
 public:
  static constexpr TypeId kUnk = 0;
  static constexpr TypeId kInt = 1;
  static constexpr TypeId kBool = 2;
  static constexpr TypeId kString = 3;
  static constexpr TypeId kVoid = 4;

  TypeLattice();

  /// Throws std::invalid_argument if the name is already taken.
  TypeId add_nominal(const std::string& name);
  void add_super(TypeId t, TypeId super);
  /// Get-or-create the array type "elem[]".
  TypeId array_of(TypeId elem);

  std::optional<TypeId> find(std::string_view name) const;
  bool contains(TypeId t) const { return t >= 0 && static_cast<std::size_t>(t) < types_.size(); }
  const std::string& name(TypeId t) const { return types_.at(t).name; }
  std::span<const TypeId> supers(TypeId t) const { return types_.at(t).supers; }
  /// Element type for arrays, nullopt otherwise.
  std::optional<TypeId> element(TypeId t) const;
  bool is_nominal(TypeId t) const { return contains(t) && types_[t].nominal; }
  std::size_t size() const { return types_.size(); }

  /// Throws CycleError if the supers relation has a cycle.
  void validate() const;

  /// True if a value of type `from` may be used where `to` is expected.
  bool assignable(TypeId from, TypeId to) const;

 private:
  struct Entry {
    std::string name;
    std::vector<TypeId> supers;
    TypeId element = -1;
    bool nominal = false;
  };
  TypeId add(Entry e);

  std::vector<Entry> types_;
  std::map<std::string, TypeId, std::less<>> by_name_;
};

/// Reflexive-transitive closure of `t` over supers, sorted ascending. Unknown
/// ids map to {UnkType}.
std::vector<TypeId> supertype_closure(const TypeLattice& lattice, TypeId t);

}  // namespace smartpaste::minilang
