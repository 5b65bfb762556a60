#include "credo/logic/registry.hpp"

#include <cctype>
#include <fstream>

#include "credo/error.hpp"

namespace credo::logic {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string slug(const std::string& surface) {
  std::string out;
  for (char c : surface) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!out.empty() && out.back() != '_') {
      out.push_back('_');
    }
    if (out.size() >= 40) break;
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  if (out.empty() || !is_ident_start(out.front())) out.insert(0, "a_");
  return out;
}

}  // namespace

bool is_identifier(std::string_view text) {
  if (text.empty() || !is_ident_start(text.front())) return false;
  for (char c : text)
    if (!is_ident_char(c)) return false;
  return true;
}

AtomRegistry::AtomRegistry(std::vector<AtomEntry> atoms) {
  for (auto& a : atoms) add(std::move(a.id), std::move(a.surface));
}

std::size_t AtomRegistry::add(std::string id, std::string surface) {
  if (!is_identifier(id)) throw Error(ErrorCode::InvalidArgument, "atom id '" + id + "' is not an identifier");
  if (auto it = by_id_.find(id); it != by_id_.end()) {
    if (atoms_[it->second].surface != surface)
      throw Error(ErrorCode::DuplicateAtom, "atom '" + id + "' already registered with surface '" +
                                                atoms_[it->second].surface + "'");
    return it->second;
  }
  by_id_.emplace(id, atoms_.size());
  atoms_.push_back({std::move(id), std::move(surface)});
  return atoms_.size() - 1;
}

std::string AtomRegistry::intern_surface(const std::string& surface) {
  if (auto id = id_for_surface(surface)) return *id;
  const std::string base = slug(surface);
  std::string id = base;
  for (int n = 2; contains(id); ++n) id = base + "_" + std::to_string(n);
  add(id, surface);
  return id;
}

bool AtomRegistry::contains(std::string_view id) const { return by_id_.find(std::string(id)) != by_id_.end(); }

std::optional<std::size_t> AtomRegistry::index_of(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> AtomRegistry::id_for_surface(std::string_view surface) const {
  for (const auto& a : atoms_)
    if (a.surface == surface) return a.id;
  return std::nullopt;
}

const std::string& AtomRegistry::surface(std::string_view id) const {
  auto idx = index_of(id);
  if (!idx) throw Error(ErrorCode::UnknownAtom, "atom '" + std::string(id) + "' is not registered");
  return atoms_[*idx].surface;
}

AtomRegistry registry_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorCode::Format, "registry must be a JSON array of {id, surface}");
  AtomRegistry registry;
  for (const auto& entry : j) {
    if (!entry.is_object() || !entry.contains("id") || !entry.contains("surface"))
      throw Error(ErrorCode::Format, "registry entry must have 'id' and 'surface'");
    registry.add(entry.at("id").get<std::string>(), entry.at("surface").get<std::string>());
  }
  return registry;
}

nlohmann::json registry_to_json(const AtomRegistry& registry) {
  auto out = nlohmann::json::array();
  for (const auto& a : registry.atoms()) out.push_back({{"id", a.id}, {"surface", a.surface}});
  return out;
}

AtomRegistry load_registry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open registry file " + path.string());
  try {
    return registry_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, path.string() + ": " + e.what());
  }
}

}  // namespace credo::logic
