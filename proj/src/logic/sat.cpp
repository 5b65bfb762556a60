#include "credo/logic/sat.hpp"

#include <cstdint>
#include <map>

#include "credo/error.hpp"

namespace credo::logic {

namespace {

// Negation normal form as a flat node array; roots are the input formulas.
struct Nnf {
  enum class Kind : std::uint8_t { Lit, And, Or };
  struct Node {
    Kind kind;
    std::uint32_t atom = 0;
    bool positive = true;
    std::vector<std::uint32_t> children;
  };
  std::vector<Node> nodes;
  std::vector<std::uint32_t> roots;
  std::vector<std::string> atom_ids;
  std::map<std::string, std::uint32_t> atom_index;

  std::uint32_t atom_of(const std::string& id) {
    auto [it, inserted] = atom_index.emplace(id, static_cast<std::uint32_t>(atom_ids.size()));
    if (inserted) atom_ids.push_back(id);
    return it->second;
  }

  std::uint32_t add(Node n) {
    nodes.push_back(std::move(n));
    return static_cast<std::uint32_t>(nodes.size() - 1);
  }

  std::uint32_t build(const Formula& f, bool positive) {
    switch (f.connective()) {
      case Connective::Atom:
        return add({Kind::Lit, atom_of(f.atom_id()), positive, {}});
      case Connective::Not:
        return build(f.operand(), !positive);
      case Connective::And:
      case Connective::Or: {
        const bool conj = (f.connective() == Connective::And) == positive;
        const auto a = build(f.left(), positive);
        const auto b = build(f.right(), positive);
        return add({conj ? Kind::And : Kind::Or, 0, true, {a, b}});
      }
      case Connective::Implies: {
        // a -> b == !a | b
        const auto a = build(f.left(), !positive);
        const auto b = build(f.right(), positive);
        return add({positive ? Kind::Or : Kind::And, 0, true, {a, b}});
      }
    }
    return 0;
  }
};

enum class Tv : std::int8_t { False = 0, True = 1, Unknown = 2 };

class Dpll {
 public:
  explicit Dpll(const Nnf& nnf) : nnf_(nnf) {}

  std::optional<std::vector<std::int8_t>> solve() {
    std::vector<std::int8_t> assignment(nnf_.atom_ids.size(), -1);
    if (search(assignment)) return assignment;
    return std::nullopt;
  }

 private:
  Tv eval(std::uint32_t n, const std::vector<std::int8_t>& a) const {
    const auto& node = nnf_.nodes[n];
    switch (node.kind) {
      case Nnf::Kind::Lit: {
        const auto v = a[node.atom];
        if (v < 0) return Tv::Unknown;
        return (v == 1) == node.positive ? Tv::True : Tv::False;
      }
      case Nnf::Kind::And: {
        Tv out = Tv::True;
        for (auto c : node.children) {
          const Tv v = eval(c, a);
          if (v == Tv::False) return Tv::False;
          if (v == Tv::Unknown) out = Tv::Unknown;
        }
        return out;
      }
      case Nnf::Kind::Or: {
        Tv out = Tv::False;
        for (auto c : node.children) {
          const Tv v = eval(c, a);
          if (v == Tv::True) return Tv::True;
          if (v == Tv::Unknown) out = Tv::Unknown;
        }
        return out;
      }
    }
    return Tv::Unknown;
  }

  // Collects literals implied by "node n must be true" under a.
  // Precondition: eval(n, a) == Unknown.
  void forced(std::uint32_t n, const std::vector<std::int8_t>& a, std::vector<std::pair<std::uint32_t, bool>>& out) const {
    const auto& node = nnf_.nodes[n];
    switch (node.kind) {
      case Nnf::Kind::Lit:
        out.emplace_back(node.atom, node.positive);
        return;
      case Nnf::Kind::And:
        for (auto c : node.children)
          if (eval(c, a) == Tv::Unknown) forced(c, a, out);
        return;
      case Nnf::Kind::Or: {
        std::optional<std::uint32_t> open;
        for (auto c : node.children) {
          if (eval(c, a) != Tv::Unknown) continue;  // cannot be True: node is Unknown
          if (open) return;
          open = c;
        }
        if (open) forced(*open, a, out);
        return;
      }
    }
  }

  // First unassigned literal below an undecided node.
  std::optional<std::pair<std::uint32_t, bool>> branch_literal(std::uint32_t n, const std::vector<std::int8_t>& a) const {
    const auto& node = nnf_.nodes[n];
    if (node.kind == Nnf::Kind::Lit) {
      if (a[node.atom] < 0) return std::pair{node.atom, node.positive};
      return std::nullopt;
    }
    for (auto c : node.children)
      if (eval(c, a) == Tv::Unknown)
        if (auto lit = branch_literal(c, a)) return lit;
    return std::nullopt;
  }

  bool search(std::vector<std::int8_t>& a) const {
    std::vector<std::pair<std::uint32_t, bool>> units;
    std::optional<std::uint32_t> undecided;
    for (bool changed = true; changed;) {
      changed = false;
      undecided.reset();
      for (auto root : nnf_.roots) {
        const Tv v = eval(root, a);
        if (v == Tv::False) return false;
        if (v == Tv::True) continue;
        if (!undecided) undecided = root;
        units.clear();
        forced(root, a, units);
        for (auto [atom, value] : units) {
          if (a[atom] >= 0) continue;  // a conflicting unit shows up as False next pass
          a[atom] = value ? 1 : 0;
          changed = true;
        }
      }
    }
    if (!undecided) return true;

    auto lit = branch_literal(*undecided, a);
    if (!lit) return false;  // unreachable for an Unknown node
    for (bool value : {lit->second, !lit->second}) {
      std::vector<std::int8_t> next = a;
      next[lit->first] = value ? 1 : 0;
      if (search(next)) {
        a = std::move(next);
        return true;
      }
    }
    return false;
  }

  const Nnf& nnf_;
};

}  // namespace

SatResult is_satisfiable(std::span<const Formula> formulas, SatOptions options) {
  Nnf nnf;
  for (const auto& f : formulas) nnf.roots.push_back(nnf.build(f, true));
  if (nnf.atom_ids.size() > options.max_atoms)
    throw Error(ErrorCode::CapExceeded, std::to_string(nnf.atom_ids.size()) + " atoms exceed the SAT cap of " +
                                            std::to_string(options.max_atoms));
  auto assignment = Dpll(nnf).solve();
  if (!assignment) return {false, std::nullopt};
  World w;
  for (std::size_t i = 0; i < nnf.atom_ids.size(); ++i) w.set(nnf.atom_ids[i], (*assignment)[i] == 1);
  return {true, std::move(w)};
}

SatResult is_satisfiable(std::initializer_list<Formula> formulas, SatOptions options) {
  return is_satisfiable(std::span<const Formula>(formulas.begin(), formulas.size()), options);
}

bool entails(const Formula& premise, const Formula& conclusion, SatOptions options) {
  return !is_satisfiable({premise, negate(conclusion)}, options).satisfiable;
}

bool is_tautology(const Formula& f, SatOptions options) { return !is_satisfiable({negate(f)}, options).satisfiable; }

bool is_contradiction(const Formula& f, SatOptions options) { return !is_satisfiable({f}, options).satisfiable; }

std::vector<Formula> minimal_unsatisfiable_subset(std::span<const Formula> formulas, SatOptions options) {
  std::vector<Formula> core(formulas.begin(), formulas.end());
  for (std::size_t i = 0; i < core.size();) {
    std::vector<Formula> trial;
    trial.reserve(core.size() - 1);
    for (std::size_t j = 0; j < core.size(); ++j)
      if (j != i) trial.push_back(core[j]);
    if (!is_satisfiable(trial, options).satisfiable) {
      core = std::move(trial);
    } else {
      ++i;
    }
  }
  return core;
}

}  // namespace credo::logic
