#include <random>

#include "doctest.h"

#include "credo/backend/mock.hpp"
#include "credo/credence.hpp"

using namespace credo::credence;
using credo::Error;
using credo::ErrorCode;
using credo::Exact;
using credo::to_double;
namespace logic = credo::logic;
namespace backend = credo::backend;
using backend::MockBackend;
using backend::TokenDistribution;
using logic::atom;
using logic::negate;

namespace {

const logic::AtomRegistry reg({{"p", "Paris is in France"}, {"q", "Rome is in Spain"}});

ProbeOptions fixed() {
  ProbeOptions o;
  o.timestamp = "2026-01-01T00:00:00Z";
  return o;
}

void script(MockBackend& mock, const logic::Formula& f, std::map<std::string, double> entries,
            std::optional<double> residual = std::nullopt) {
  mock.script(backend::build_prompt(f, reg).text, {}, TokenDistribution::from_entries(std::move(entries), residual));
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("lexicon validation") {
  CHECK_NOTHROW(validate(default_lexicon()));
  CHECK_NOTHROW(validate(yes_no_lexicon()));
  CHECK(default_lexicon().size() == 48);

  CHECK(code_of([] { validate({"x", {"yes", "I am sure"}, {"no"}}); }) == ErrorCode::InvalidLexicon);
  CHECK(code_of([] { validate({"x", {"yes"}, {"no", " Probably not"}}); }) == ErrorCode::InvalidLexicon);
  CHECK(code_of([] { validate({"x", {"yes", "no"}, {"no"}}); }) == ErrorCode::InvalidLexicon);
  CHECK(code_of([] { validate({"", {"yes"}, {"no"}}); }) == ErrorCode::InvalidLexicon);
  CHECK(code_of([] { validate({"x", {""}, {"no"}}); }) == ErrorCode::InvalidLexicon);
  // "certainly" is plain assent; only "certainly that ..." hedges
  CHECK_NOTHROW(validate({"x", {"certainly"}, {}}));

  // custom marker list
  const std::vector<std::string> markers{"yeah"};
  CHECK(code_of([&] { validate({"x", {"Yeah"}, {}}, markers); }) == ErrorCode::InvalidLexicon);
  CHECK_NOTHROW(validate({"x", {"I think so"}, {}}, markers));
}

TEST_CASE("shipped lexicon files match the built-in ones") {
  CHECK(load_lexicon(CREDO_DATA_DIR "/lexicons/default-v1.json") == default_lexicon());
  CHECK(load_lexicon(CREDO_DATA_DIR "/lexicons/yes-no.json") == yes_no_lexicon());
  CHECK(lexicon_from_json(to_json(default_lexicon())) == default_lexicon());
  // duplicates are folded so mass is not double counted
  CHECK(lexicon_from_json({{"name", "d"}, {"assent", {"yes", "yes"}}, {"dissent", {"no"}}}).assent ==
        std::vector<std::string>{"yes"});
}

TEST_CASE("credence is assent over assent plus dissent") {
  MockBackend mock;
  const auto p = atom("p");
  script(mock, p, {{"yes", 0.6}, {"no", 0.2}, {"maybe", 0.1}}, 0.1);
  const AssentLexicon lex{"t", {"yes"}, {"no"}};

  const auto as = assent_probability(p, reg, lex, mock);
  const auto ds = dissent_probability(p, reg, lex, mock);
  CHECK(as.value == 0.6);
  CHECK(ds.value == 0.2);
  CHECK_FALSE(as.approximate);

  const auto r = credence(p, reg, lex, mock, fixed());
  REQUIRE(r.credence);
  CHECK(*r.credence == 0.75);  // exact, not 0.7499999999999999
  CHECK(r.status == ProbeStatus::Ok);
  CHECK(r.as_value == 0.6);
  CHECK(r.ds_value == 0.2);
  CHECK(r.backend_id == "mock");
  CHECK(r.lexicon_name == "t");
  CHECK(r.digest.head.front() == std::pair<std::string, double>{"yes", 0.6});
  CHECK(r.digest.residual == 0.1);

  // empty dissent side
  const auto all_assent = credence(p, reg, AssentLexicon{"a", {"yes"}, {}}, mock, fixed());
  CHECK(*all_assent.credence == 1.0);
}

TEST_CASE("yes-no credence and non-responsive probes") {
  MockBackend mock;
  const auto p = atom("p"), q = atom("q");
  script(mock, p, {{"yes", 0.5}, {"no", 0.25}, {"maybe", 0.25}});
  script(mock, q, {{"maybe", 1.0}});

  CHECK(*yes_no_credence(p, reg, mock, fixed()).credence == 2.0 / 3.0);

  const auto r = probe(q, reg, default_lexicon(), mock, fixed());
  CHECK(r.status == ProbeStatus::NonResponsive);
  CHECK_FALSE(r.credence);
  CHECK(r.digest.marker_mass == 1.0);
  CHECK(code_of([&] { credence(q, reg, default_lexicon(), mock); }) == ErrorCode::NonResponsive);
  CHECK(code_of([&] { yes_no_credence(q, reg, mock); }) == ErrorCode::NonResponsive);

  // just under the threshold is still non-responsive
  MockBackend tiny;
  script(tiny, p, {{"yes", 4e-7}, {"no", 4e-7}, {"maybe", 1.0 - 8e-7}});
  CHECK(probe(p, reg, yes_no_lexicon(), tiny).status == ProbeStatus::NonResponsive);
}

TEST_CASE("multi-token lexicon entries use the chain rule") {
  MockBackend mock;
  const auto p = atom("p");
  const auto prompt = backend::build_prompt(p, reg).text;
  mock.script(prompt, {}, TokenDistribution::from_entries({{"of", 0.2}, {"no", 0.8}}));
  mock.script(prompt, {"of"}, TokenDistribution::from_entries({{" course", 0.5}, {" what", 0.5}}));
  mock.set_tokenization("of course", {"of", " course"});

  const AssentLexicon lex{"oc", {"of course"}, {"no"}};
  const auto as = assent_probability(p, reg, lex, mock);
  CHECK(as.value == 0.1);
  CHECK(as.exact == Exact(1, 10));
  CHECK(*credence(p, reg, lex, mock).credence == to_double(Exact(1, 9)));
}

TEST_CASE("tokens outside the itemized head are bounded and flagged") {
  MockBackend mock;
  const auto p = atom("p");
  script(mock, p, {{"yes", 0.7}, {"no", 0.25}}, 0.05);
  const auto as = assent_probability(p, reg, AssentLexicon{"s", {"sure"}, {}}, mock);
  CHECK(as.value <= 0.05);
  CHECK(as.approximate);
  CHECK(probe(p, reg, default_lexicon(), mock).approximate);

  // missing variants at one context share its residual: 0.7 + 0.05, not 0.7 + 3 * 0.05
  const auto yes = assent_probability(p, reg, AssentLexicon{"v", {"yes", "Yes", " yes", " Yes"}, {}}, mock);
  CHECK(yes.approximate);
  CHECK(yes.exact == Exact(3, 4));
}

TEST_CASE("assent-dissent symmetry residual") {
  MockBackend mock;
  const auto p = atom("p");
  script(mock, p, {{"yes", 0.6}, {"no", 0.4}});
  script(mock, negate(p), {{"yes", 0.4}, {"no", 0.6}});
  const AssentLexicon lex{"t", {"yes"}, {"no"}};
  CHECK(assent_dissent_symmetry_residual(p, reg, lex, mock) == 0.0);

  MockBackend skew;
  script(skew, p, {{"yes", 0.6}, {"no", 0.4}});
  script(skew, negate(p), {{"yes", 0.7}, {"no", 0.3}});
  CHECK(assent_dissent_symmetry_residual(p, reg, lex, skew) == doctest::Approx(0.3).epsilon(1e-12));

  CHECK(code_of([&] { assent_dissent_symmetry_residual(atom("zz"), reg, lex, mock); }) == ErrorCode::Unrenderable);
}

TEST_CASE("credence properties over random scripted distributions") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  const auto p = atom("p");
  const AssentLexicon lex{"t", {"yes"}, {"no"}};
  const auto restricted = lexicon_from_json({{"name", "restricted"}, {"assent", {"yes"}}, {"dissent", {"no"}}});

  for (int i = 0; i < 200; ++i) {
    double y = u(rng), n = u(rng), other = u(rng);
    const double total = y + n + other;
    y /= total, n /= total, other /= total;

    MockBackend base;
    script(base, p, {{"yes", y}, {"no", n}, {"other", other}}, 0.0);
    const double cr = *credence(p, reg, lex, base).credence;
    CHECK(cr >= 0.0);
    CHECK(cr <= 1.0);

    // more assent, same dissent: credence does not go down
    const double shift = other * u(rng);
    MockBackend more;
    script(more, p, {{"yes", y + shift}, {"no", n}, {"other", other - shift}}, 0.0);
    CHECK(*credence(p, reg, lex, more).credence >= cr);

    // scaling both sides leaves the ratio alone
    MockBackend half;
    script(half, p, {{"yes", y / 2}, {"no", n / 2}, {"other", 1 - y / 2 - n / 2}}, 0.0);
    CHECK(*credence(p, reg, lex, half).credence == doctest::Approx(cr).epsilon(1e-12));

    // restricting to yes/no agrees bit for bit with yes_no_credence
    CHECK(*credence(p, reg, restricted, base).credence == *yes_no_credence(p, reg, base).credence);
  }
}

TEST_CASE("probe records round trip through json") {
  MockBackend mock;
  const auto p = atom("p");
  script(mock, p, {{"yes", 0.6}, {"no", 0.2}, {"maybe", 0.1}}, 0.1);
  auto r = probe(p, reg, AssentLexicon{"t", {"yes"}, {"no"}}, mock, fixed());
  r.config_digest = "abcd";
  r.seed = 7;
  const auto j = to_json(r);
  CHECK(j["credence"] == 0.75);
  CHECK(j["formula"] == "p");
  CHECK(j["prompt"]["id"] == r.prompt.id());
  CHECK(probe_record_from_json(j, reg) == r);
  CHECK(probe_record_from_json(nlohmann::json::parse(j.dump()), reg) == r);

  auto err = r;
  err.status = ProbeStatus::Error;
  err.credence.reset();
  err.error = "network: down";
  err.as_value = err.ds_value = 0;
  const auto ej = to_json(err);
  CHECK(ej["as"].is_null());
  CHECK(probe_record_from_json(ej, reg) == err);

  auto bad = j;
  bad["credence"] = 1.5;
  CHECK(code_of([&] { probe_record_from_json(bad, reg); }) == ErrorCode::Format);
  bad = j;
  bad["formula"] = "zz";
  CHECK(code_of([&] { probe_record_from_json(bad, reg); }) == ErrorCode::UnknownAtom);
}
