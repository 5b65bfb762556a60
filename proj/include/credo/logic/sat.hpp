#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "credo/logic/formula.hpp"
#include "credo/logic/world.hpp"

namespace credo::logic {

struct SatOptions {
  // Maximum number of distinct atoms across the input set.
  std::size_t max_atoms = 512;
};

struct SatResult {
  bool satisfiable = false;
  // Total over the atoms of the input when satisfiable.
  std::optional<World> witness;
};

// DPLL with unit propagation over negation normal form. The empty set is
// satisfiable.
SatResult is_satisfiable(std::span<const Formula> formulas, SatOptions options = {});
SatResult is_satisfiable(std::initializer_list<Formula> formulas, SatOptions options = {});

// premise |= conclusion iff {premise, !conclusion} is unsatisfiable.
bool entails(const Formula& premise, const Formula& conclusion, SatOptions options = {});

bool is_tautology(const Formula& f, SatOptions options = {});
bool is_contradiction(const Formula& f, SatOptions options = {});

// Greedy deletion: drops members one at a time (in order) while the rest
// stays unsatisfiable. Precondition: `formulas` is unsatisfiable.
std::vector<Formula> minimal_unsatisfiable_subset(std::span<const Formula> formulas, SatOptions options = {});

}  // namespace credo::logic
