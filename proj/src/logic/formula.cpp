#include "credo/logic/formula.hpp"

#include <functional>

#include "credo/error.hpp"

namespace credo::logic {

struct Formula::Node {
  Connective connective;
  std::string id;  // atoms only
  Formula first;   // operand of Not, left of binary
  Formula second;  // right of binary
  std::size_t size;
};

Formula Formula::atom(std::string id) {
  return Formula(std::make_shared<Node>(Node{Connective::Atom, std::move(id), Formula(nullptr), Formula(nullptr), 1}));
}

Formula Formula::negation(Formula operand) {
  const std::size_t size = operand.size() + 1;
  return Formula(std::make_shared<Node>(Node{Connective::Not, {}, std::move(operand), Formula(nullptr), size}));
}

namespace {

template <class NodeT, class F>
std::shared_ptr<const NodeT> binary(Connective c, F left, F right) {
  const std::size_t size = left.size() + right.size() + 1;
  return std::make_shared<NodeT>(NodeT{c, {}, std::move(left), std::move(right), size});
}

}  // namespace

Formula Formula::conjunction(Formula left, Formula right) {
  return Formula(binary<Node>(Connective::And, std::move(left), std::move(right)));
}

Formula Formula::disjunction(Formula left, Formula right) {
  return Formula(binary<Node>(Connective::Or, std::move(left), std::move(right)));
}

Formula Formula::implication(Formula antecedent, Formula consequent) {
  return Formula(binary<Node>(Connective::Implies, std::move(antecedent), std::move(consequent)));
}

Connective Formula::connective() const noexcept { return node_->connective; }

bool Formula::is_binary() const noexcept {
  const auto c = connective();
  return c == Connective::And || c == Connective::Or || c == Connective::Implies;
}

const std::string& Formula::atom_id() const {
  if (!is_atom()) throw Error(ErrorCode::InvalidArgument, "atom_id() on a compound formula");
  return node_->id;
}

const Formula& Formula::operand() const {
  if (connective() != Connective::Not) throw Error(ErrorCode::InvalidArgument, "operand() on a non-negation");
  return node_->first;
}

const Formula& Formula::left() const {
  if (!is_binary()) throw Error(ErrorCode::InvalidArgument, "left() on a non-binary formula");
  return node_->first;
}

const Formula& Formula::right() const {
  if (!is_binary()) throw Error(ErrorCode::InvalidArgument, "right() on a non-binary formula");
  return node_->second;
}

std::size_t Formula::size() const noexcept { return node_->size; }

std::strong_ordering operator<=>(const Formula& x, const Formula& y) {
  if (x.node_ == y.node_) return std::strong_ordering::equal;
  // Smaller formulas first keeps sorted output readable: atoms, then
  // their negations, then compounds.
  if (auto c = x.size() <=> y.size(); c != 0) return c;
  if (auto c = x.connective() <=> y.connective(); c != 0) return c;
  switch (x.connective()) {
    case Connective::Atom:
      return x.atom_id() <=> y.atom_id();
    case Connective::Not:
      return x.operand() <=> y.operand();
    default:
      if (auto c = x.left() <=> y.left(); c != 0) return c;
      return x.right() <=> y.right();
  }
}

bool operator==(const Formula& x, const Formula& y) { return (x <=> y) == 0; }

namespace {

int precedence(Connective c) {
  switch (c) {
    case Connective::Implies: return 1;
    case Connective::Or: return 2;
    case Connective::And: return 3;
    case Connective::Not: return 4;
    case Connective::Atom: return 5;
  }
  return 0;
}

const char* symbol(Connective c) {
  switch (c) {
    case Connective::And: return " & ";
    case Connective::Or: return " | ";
    case Connective::Implies: return " -> ";
    default: return "";
  }
}

void print(const Formula& f, std::string& out) {
  auto child = [&out](const Formula& g, bool parens) {
    if (parens) out.push_back('(');
    print(g, out);
    if (parens) out.push_back(')');
  };
  switch (f.connective()) {
    case Connective::Atom:
      out += f.atom_id();
      return;
    case Connective::Not:
      out.push_back('!');
      child(f.operand(), precedence(f.operand().connective()) < precedence(Connective::Not));
      return;
    default: {
      const int p = precedence(f.connective());
      const bool right_assoc = f.connective() == Connective::Implies;
      const int lp = precedence(f.left().connective());
      const int rp = precedence(f.right().connective());
      child(f.left(), right_assoc ? lp <= p : lp < p);
      out += symbol(f.connective());
      child(f.right(), right_assoc ? rp < p : rp <= p);
    }
  }
}

void collect_atoms(const Formula& f, std::set<std::string>& out) {
  switch (f.connective()) {
    case Connective::Atom: out.insert(f.atom_id()); return;
    case Connective::Not: collect_atoms(f.operand(), out); return;
    default:
      collect_atoms(f.left(), out);
      collect_atoms(f.right(), out);
  }
}

}  // namespace

std::string to_string(const Formula& f) {
  std::string out;
  print(f, out);
  return out;
}

std::set<std::string> atoms_of(const Formula& f) {
  std::set<std::string> out;
  collect_atoms(f, out);
  return out;
}

void require_registered(const Formula& f, const AtomRegistry& registry) {
  for (const auto& id : atoms_of(f))
    if (!registry.contains(id))
      throw Error(ErrorCode::Unrenderable, "atom '" + id + "' in '" + to_string(f) + "' is not registered");
}

}  // namespace credo::logic

std::size_t std::hash<credo::logic::Formula>::operator()(const credo::logic::Formula& f) const {
  return std::hash<std::string>{}(credo::logic::to_string(f));
}
