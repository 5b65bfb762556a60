#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace credo::logic {

struct AtomEntry {
  std::string id;
  std::string surface;

  friend bool operator==(const AtomEntry&, const AtomEntry&) = default;
};

// True iff `text` matches [a-zA-Z_][a-zA-Z0-9_]*.
bool is_identifier(std::string_view text);

// Ordered, append-only list of atoms. Positions never change once assigned,
// so world enumeration and credence-vector layouts can rely on them.
class AtomRegistry {
 public:
  AtomRegistry() = default;
  explicit AtomRegistry(std::vector<AtomEntry> atoms);

  // Registers `id`. Re-adding the same (id, surface) pair is a no-op; a
  // different surface for an existing id throws DuplicateAtom.
  std::size_t add(std::string id, std::string surface);

  // Finds an atom by surface or, failing that, registers one under an id
  // derived from the surface text.
  std::string intern_surface(const std::string& surface);

  bool contains(std::string_view id) const;
  std::optional<std::size_t> index_of(std::string_view id) const;
  std::optional<std::string> id_for_surface(std::string_view surface) const;
  const std::string& surface(std::string_view id) const;

  const std::vector<AtomEntry>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }

  friend bool operator==(const AtomRegistry& a, const AtomRegistry& b) { return a.atoms_ == b.atoms_; }

 private:
  std::vector<AtomEntry> atoms_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

// Registry file: JSON array of {"id", "surface"}.
AtomRegistry registry_from_json(const nlohmann::json& j);
nlohmann::json registry_to_json(const AtomRegistry& registry);
AtomRegistry load_registry(const std::filesystem::path& path);

}  // namespace credo::logic
