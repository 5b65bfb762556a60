#pragma once

#include <compare>
#include <cstddef>
#include <memory>
#include <set>
#include <string>
#include <string_view>

#include "credo/logic/registry.hpp"

namespace credo::logic {

enum class Connective { Atom, Not, And, Or, Implies };

// Immutable propositional formula over registry atoms. Copies share
// structure; equality and ordering are structural.
class Formula {
 public:
  static Formula atom(std::string id);
  static Formula negation(Formula operand);
  static Formula conjunction(Formula left, Formula right);
  static Formula disjunction(Formula left, Formula right);
  static Formula implication(Formula antecedent, Formula consequent);

  Connective connective() const noexcept;
  bool is_atom() const noexcept { return connective() == Connective::Atom; }
  bool is_binary() const noexcept;

  // Preconditions: is_atom() for atom_id(), Not for operand(), binary for
  // left()/right().
  const std::string& atom_id() const;
  const Formula& operand() const;
  const Formula& left() const;
  const Formula& right() const;

  std::size_t size() const noexcept;

  friend bool operator==(const Formula& a, const Formula& b);
  friend std::strong_ordering operator<=>(const Formula& a, const Formula& b);

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

inline Formula atom(std::string id) { return Formula::atom(std::move(id)); }
inline Formula negate(Formula f) { return Formula::negation(std::move(f)); }
inline Formula conjoin(Formula a, Formula b) { return Formula::conjunction(std::move(a), std::move(b)); }
inline Formula disjoin(Formula a, Formula b) { return Formula::disjunction(std::move(a), std::move(b)); }
inline Formula implies(Formula a, Formula b) { return Formula::implication(std::move(a), std::move(b)); }

// Canonical ASCII text with minimal parentheses; parse_formula(to_string(f))
// reproduces f.
std::string to_string(const Formula& f);

// Atom ids occurring in f.
std::set<std::string> atoms_of(const Formula& f);

// Throws Unrenderable naming the first atom of f absent from `registry`.
void require_registered(const Formula& f, const AtomRegistry& registry);

struct ParseOptions {
  // Register unknown identifiers (surface = identifier) and unknown quoted
  // surfaces instead of failing.
  bool auto_register = true;
};

// Grammar: `!` > `&` > `|` > `->`, `&`/`|` left-associative, `->`
// right-associative. Atoms are identifiers or "double-quoted surfaces".
// Throws SyntaxError (with offset) or Error{UnknownAtom}.
Formula parse_formula(std::string_view text, AtomRegistry& registry, ParseOptions options = {});

// Strict variant against a fixed registry: unknown atoms are errors.
Formula parse_formula(std::string_view text, const AtomRegistry& registry);

}  // namespace credo::logic

template <>
struct std::hash<credo::logic::Formula> {
  std::size_t operator()(const credo::logic::Formula& f) const;
};
