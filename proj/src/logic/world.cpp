#include "credo/logic/world.hpp"

#include <algorithm>

#include "credo/error.hpp"

namespace credo::logic {

World::World(std::initializer_list<std::pair<std::string, bool>> assignment) {
  for (const auto& [id, value] : assignment) set(id, value);
}

void World::set(std::string id, bool value) {
  auto it = std::lower_bound(assignment_.begin(), assignment_.end(), id,
                             [](const auto& entry, const std::string& key) { return entry.first < key; });
  if (it != assignment_.end() && it->first == id) {
    it->second = value;
  } else {
    assignment_.insert(it, {std::move(id), value});
  }
}

std::optional<bool> World::value(std::string_view id) const {
  auto it = std::lower_bound(assignment_.begin(), assignment_.end(), id,
                             [](const auto& entry, std::string_view key) { return entry.first < key; });
  if (it == assignment_.end() || it->first != id) return std::nullopt;
  return it->second;
}

bool evaluate(const Formula& f, const World& w) {
  switch (f.connective()) {
    case Connective::Atom: {
      auto v = w.value(f.atom_id());
      if (!v) throw Error(ErrorCode::MissingAtom, "world assigns no value to atom '" + f.atom_id() + "'");
      return *v;
    }
    case Connective::Not: return !evaluate(f.operand(), w);
    case Connective::And: return evaluate(f.left(), w) && evaluate(f.right(), w);
    case Connective::Or: return evaluate(f.left(), w) || evaluate(f.right(), w);
    case Connective::Implies: return !evaluate(f.left(), w) || evaluate(f.right(), w);
  }
  return false;
}

World WorldEnumeration::operator[](std::uint64_t index) const {
  World w;
  const std::size_t n = ids_.size();
  for (std::size_t j = 0; j < n; ++j) w.set(ids_[j], ((index >> (n - 1 - j)) & 1U) != 0);
  return w;
}

WorldEnumeration enumerate_worlds(const AtomRegistry& registry, std::size_t cap) {
  if (registry.size() > cap)
    throw Error(ErrorCode::CapExceeded, std::to_string(registry.size()) + " atoms exceed the world-enumeration cap of " +
                                            std::to_string(cap));
  std::vector<std::string> ids;
  ids.reserve(registry.size());
  for (const auto& a : registry.atoms()) ids.push_back(a.id);
  return WorldEnumeration(std::move(ids));
}

CompiledFormula::CompiledFormula(const Formula& f, const AtomRegistry& registry) {
  if (registry.size() > 63) throw Error(ErrorCode::CapExceeded, "compiled evaluation supports at most 63 atoms");
  emit(f, registry);
}

std::uint32_t CompiledFormula::emit(const Formula& f, const AtomRegistry& registry) {
  Op op{f.connective()};
  switch (f.connective()) {
    case Connective::Atom: {
      auto idx = registry.index_of(f.atom_id());
      if (!idx) throw Error(ErrorCode::UnknownAtom, "atom '" + f.atom_id() + "' is not registered");
      op.a = static_cast<std::uint32_t>(registry.size() - 1 - *idx);
      break;
    }
    case Connective::Not:
      op.a = emit(f.operand(), registry);
      break;
    default:
      op.a = emit(f.left(), registry);
      op.b = emit(f.right(), registry);
  }
  ops_.push_back(op);
  return static_cast<std::uint32_t>(ops_.size() - 1);
}

bool CompiledFormula::evaluate(std::uint64_t world_index) const {
  // Postorder guarantees children are computed before parents.
  thread_local std::vector<char> values;
  values.resize(ops_.size());
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    const Op& op = ops_[i];
    switch (op.connective) {
      case Connective::Atom: values[i] = static_cast<char>((world_index >> op.a) & 1U); break;
      case Connective::Not: values[i] = !values[op.a]; break;
      case Connective::And: values[i] = values[op.a] && values[op.b]; break;
      case Connective::Or: values[i] = values[op.a] || values[op.b]; break;
      case Connective::Implies: values[i] = !values[op.a] || values[op.b]; break;
    }
  }
  return values.back() != 0;
}

}  // namespace credo::logic
