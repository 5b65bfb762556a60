#pragma once

#include <cstddef>
#include <cstdint>
#include <iterator>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "credo/logic/formula.hpp"
#include "credo/logic/registry.hpp"

namespace credo::logic {

inline constexpr std::size_t kDefaultWorldCap = 20;

// Total assignment of truth values to a set of atom ids.
class World {
 public:
  World() = default;
  World(std::initializer_list<std::pair<std::string, bool>> assignment);

  void set(std::string id, bool value);
  std::optional<bool> value(std::string_view id) const;
  bool contains(std::string_view id) const { return value(id).has_value(); }

  // Sorted by atom id.
  const std::vector<std::pair<std::string, bool>>& assignment() const noexcept { return assignment_; }

  friend bool operator==(const World&, const World&) = default;

 private:
  std::vector<std::pair<std::string, bool>> assignment_;
};

// Classical two-valued semantics. Throws MissingAtom if w is not total over
// the atoms of f.
bool evaluate(const Formula& f, const World& w);

// All 2^n worlds of a registry, generated on demand. World k assigns atom j
// (registry order) the bit (n-1-j) of k, so the first atom is the most
// significant digit of a binary count.
class WorldEnumeration {
 public:
  class iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = World;
    using difference_type = std::ptrdiff_t;
    using pointer = void;
    using reference = World;

    iterator() = default;
    iterator(const WorldEnumeration* owner, std::uint64_t index) : owner_(owner), index_(index) {}
    World operator*() const { return (*owner_)[index_]; }
    iterator& operator++() { ++index_; return *this; }
    iterator operator++(int) { auto t = *this; ++index_; return t; }
    friend bool operator==(const iterator& a, const iterator& b) { return a.index_ == b.index_; }

   private:
    const WorldEnumeration* owner_ = nullptr;
    std::uint64_t index_ = 0;
  };

  explicit WorldEnumeration(std::vector<std::string> ids) : ids_(std::move(ids)) {}

  std::uint64_t size() const noexcept { return std::uint64_t{1} << ids_.size(); }
  World operator[](std::uint64_t index) const;
  iterator begin() const { return {this, 0}; }
  iterator end() const { return {this, size()}; }

 private:
  std::vector<std::string> ids_;
};

// Throws CapExceeded when the registry holds more than `cap` atoms.
WorldEnumeration enumerate_worlds(const AtomRegistry& registry, std::size_t cap = kDefaultWorldCap);

// Formula compiled against a registry for evaluation over world indices as
// produced by WorldEnumeration. Used on hot paths that sweep all worlds.
class CompiledFormula {
 public:
  CompiledFormula(const Formula& f, const AtomRegistry& registry);
  bool evaluate(std::uint64_t world_index) const;

 private:
  struct Op {
    Connective connective;
    std::uint32_t a = 0;  // bit index for atoms, child slot otherwise
    std::uint32_t b = 0;
  };
  std::uint32_t emit(const Formula& f, const AtomRegistry& registry);
  std::vector<Op> ops_;  // postorder; last op is the root
};

}  // namespace credo::logic
