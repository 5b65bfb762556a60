#include <random>

#include "doctest.h"

#include "credo/error.hpp"
#include "credo/logic/formula.hpp"
#include "credo/logic/sat.hpp"
#include "credo/logic/world.hpp"
#include "support/oracles.hpp"

using namespace credo;
using namespace credo::logic;

namespace {

AtomRegistry pq() { return AtomRegistry({{"p", "Paris is in France"}, {"q", "Berlin is in Germany"}}); }

}  // namespace

TEST_CASE("registry rejects conflicting surfaces and keeps insertion order") {
  AtomRegistry r = pq();
  CHECK(r.add("p", "Paris is in France") == 0);
  CHECK_THROWS_AS(r.add("p", "something else"), Error);
  CHECK(r.add("r", "Rome is in Italy") == 2);
  CHECK(r.atoms()[2].id == "r");
  CHECK_THROWS(r.add("1bad", "x"));

  auto round = registry_from_json(registry_to_json(r));
  CHECK(round == r);
}

TEST_CASE("parse_formula builds the expected trees") {
  AtomRegistry r = pq();
  const Formula p = atom("p"), q = atom("q");

  CHECK(parse_formula("p & !p", r) == conjoin(p, negate(p)));
  CHECK(parse_formula("!(p | q)", r) == negate(disjoin(p, q)));
  CHECK(to_string(parse_formula("!(p | q)", r)) == "!(p | q)");

  // precedence and associativity
  CHECK(parse_formula("!p & q | p -> q", r) == implies(disjoin(conjoin(negate(p), q), p), q));
  CHECK(parse_formula("p -> q -> p", r) == implies(p, implies(q, p)));
  CHECK(parse_formula("p & q & p", r) == conjoin(conjoin(p, q), p));
  CHECK(parse_formula("  ( p )  ", r) == p);
}

TEST_CASE("syntax errors carry the offending offset") {
  AtomRegistry r = pq();
  try {
    parse_formula("p &", r);
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.offset() == 3);
    CHECK(e.code() == ErrorCode::Syntax);
  }
  for (const char* bad : {"", "(p", "p q", "p - q", "\"unterminated", "p & & q", ")"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_formula(bad, r), SyntaxError);
  }
}

TEST_CASE("atom resolution and auto-registration") {
  AtomRegistry r = pq();
  CHECK(parse_formula("\"Paris is in France\" & q", r) == conjoin(atom("p"), atom("q")));

  const AtomRegistry& fixed = r;
  try {
    parse_formula("p & zed", fixed);
    FAIL("expected unknown-atom");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownAtom);
  }
  CHECK_THROWS(parse_formula("\"Madrid is in Spain\"", fixed));

  const Formula f = parse_formula("\"Madrid is in Spain\" -> zed", r);
  CHECK(r.size() == 4);
  CHECK(r.surface(f.left().atom_id()) == "Madrid is in Spain");
  CHECK(r.surface("zed") == "zed");
  // auto-registered ids print as identifiers and re-parse to the same tree
  CHECK(parse_formula(to_string(f), fixed) == f);
}

TEST_CASE("print then parse is the identity on random trees") {
  std::mt19937_64 rng(7);
  AtomRegistry r;
  for (int i = 0; i < 6; ++i) r.add("a" + std::to_string(i), "atom " + std::to_string(i));
  for (int i = 0; i < 2000; ++i) {
    const Formula f = testing::random_formula(rng, 6, 5);
    const std::string text = to_string(f);
    CAPTURE(text);
    const Formula g = parse_formula(text, static_cast<const AtomRegistry&>(r));
    REQUIRE(g == f);
    CHECK(to_string(g) == text);
  }
}

TEST_CASE("evaluate follows the classical truth tables") {
  const Formula p = atom("p"), q = atom("q");
  for (bool pv : {false, true}) {
    World w{{"p", pv}, {"q", false}};
    CHECK_FALSE(evaluate(conjoin(p, negate(p)), w));
    CHECK(evaluate(disjoin(p, negate(p)), w));
  }
  CHECK_FALSE(evaluate(implies(p, q), World{{"p", true}, {"q", false}}));
  CHECK(evaluate(implies(p, q), World{{"p", false}, {"q", false}}));
  CHECK(evaluate(implies(p, q), World{{"p", true}, {"q", true}}));

  try {
    evaluate(conjoin(p, q), World{{"p", true}});
    FAIL("expected missing-atom");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingAtom);
  }
}

TEST_CASE("negation flips truth at every world") {
  std::mt19937_64 rng(11);
  AtomRegistry r;
  for (int i = 0; i < 4; ++i) r.add("a" + std::to_string(i), "s");
  for (int i = 0; i < 200; ++i) {
    const Formula f = testing::random_formula(rng, 4, 4);
    for (const World& w : enumerate_worlds(r)) CHECK(evaluate(negate(f), w) == !evaluate(f, w));
  }
}

TEST_CASE("enumerate_worlds counts in binary over registry order") {
  AtomRegistry r({{"p", "P"}, {"q", "Q"}, {"r", "R"}});
  auto worlds = enumerate_worlds(r);
  CHECK(worlds.size() == 8);
  CHECK(worlds[0] == World{{"p", false}, {"q", false}, {"r", false}});
  CHECK(worlds[1] == World{{"p", false}, {"q", false}, {"r", true}});
  CHECK(worlds[4] == World{{"p", true}, {"q", false}, {"r", false}});
  std::set<std::vector<std::pair<std::string, bool>>> distinct;
  for (const World& w : worlds) distinct.insert(w.assignment());
  CHECK(distinct.size() == 8);

  auto empty = enumerate_worlds(AtomRegistry{});
  CHECK(empty.size() == 1);
  CHECK((*empty.begin()).assignment().empty());

  AtomRegistry big;
  for (int i = 0; i < 21; ++i) big.add("x" + std::to_string(i), "s");
  try {
    enumerate_worlds(big, 20);
    FAIL("expected cap-exceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CapExceeded);
  }
}

TEST_CASE("compiled evaluation agrees with tree evaluation") {
  std::mt19937_64 rng(3);
  AtomRegistry r;
  for (int i = 0; i < 5; ++i) r.add("a" + std::to_string(i), "s");
  const auto worlds = enumerate_worlds(r);
  for (int i = 0; i < 100; ++i) {
    const Formula f = testing::random_formula(rng, 5, 4);
    const CompiledFormula c(f, r);
    for (std::uint64_t k = 0; k < worlds.size(); ++k) CHECK(c.evaluate(k) == evaluate(f, worlds[k]));
  }
}

TEST_CASE("is_satisfiable on the worked examples") {
  const Formula p = atom("p"), q = atom("q");

  CHECK_FALSE(is_satisfiable({conjoin(p, negate(p))}).satisfiable);

  // Oracle: truth tables over the 4 worlds of {p, q}.
  const std::vector<Formula> clash{disjoin(p, q), disjoin(negate(p), q), negate(q)};
  REQUIRE_FALSE(testing::truth_table_satisfiable(clash));
  CHECK_FALSE(is_satisfiable(clash).satisfiable);

  const std::vector<Formula> mp{implies(p, q), p};
  const auto models = testing::truth_table_models(mp);
  REQUIRE(models.size() == 1);
  REQUIRE(models[0] == World{{"p", true}, {"q", true}});
  const auto result = is_satisfiable(mp);
  REQUIRE(result.satisfiable);
  CHECK(*result.witness == models[0]);

  CHECK(is_satisfiable(std::vector<Formula>{}).satisfiable);
}

TEST_CASE("DPLL agrees with truth tables on random sets over up to 12 atoms") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> atoms_dist(1, 12), count_dist(1, 4), depth_dist(1, 5);
  int unsat = 0;
  for (int i = 0; i < 300; ++i) {
    const int atoms = atoms_dist(rng);
    std::vector<Formula> fs;
    const int count = count_dist(rng);
    for (int k = 0; k < count; ++k) fs.push_back(testing::random_formula(rng, atoms, depth_dist(rng)));
    const bool expected = testing::truth_table_satisfiable(fs);
    const auto got = is_satisfiable(fs);
    REQUIRE(got.satisfiable == expected);
    if (got.satisfiable) {
      for (const auto& f : fs) CHECK(evaluate(f, *got.witness));
    } else {
      ++unsat;
    }
  }
  CHECK(unsat > 0);
}

TEST_CASE("entails") {
  const Formula p = atom("p"), q = atom("q");
  CHECK(entails(conjoin(p, q), p));
  CHECK(entails(p, disjoin(p, q)));
  CHECK_FALSE(entails(p, q));
  CHECK(is_tautology(disjoin(p, negate(p))));
  CHECK(is_contradiction(conjoin(p, negate(p))));
}

TEST_CASE("entails matches world-by-world inclusion") {
  std::mt19937_64 rng(99);
  AtomRegistry r;
  for (int i = 0; i < 4; ++i) r.add("a" + std::to_string(i), "s");
  const auto worlds = enumerate_worlds(r);
  for (int i = 0; i < 300; ++i) {
    const Formula f = testing::random_formula(rng, 4, 3);
    const Formula g = testing::random_formula(rng, 4, 3);
    bool expected = true;
    for (const World& w : worlds) expected = expected && (!evaluate(f, w) || evaluate(g, w));
    CHECK(entails(f, g) == expected);
  }
}

TEST_CASE("SAT cap is configurable") {
  Formula big = atom("x0");
  for (int i = 1; i < 30; ++i) big = conjoin(big, atom("x" + std::to_string(i)));
  CHECK(is_satisfiable({big}).satisfiable);
  CHECK_THROWS_AS(is_satisfiable({big}, SatOptions{.max_atoms = 20}), Error);
}

TEST_CASE("minimal unsatisfiable subset drops irrelevant members") {
  const Formula p = atom("p"), q = atom("q"), r = atom("r");
  const std::vector<Formula> beliefs{q, p, r, negate(p)};
  const auto core = minimal_unsatisfiable_subset(beliefs);
  CHECK(core == std::vector<Formula>{p, negate(p)});
}
