#include "credo/audit.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "credo/digest.hpp"
#include "credo/exact.hpp"
#include "credo/logic/sat.hpp"

namespace credo::audit {

using logic::Formula;
using logic::to_string;

namespace {

Exact ex(double v) { return exact_from_double(v); }

double abs_double(const Exact& v) { return to_double(v < 0 ? Exact(-v) : v); }

std::string join(const std::vector<Formula>& fs, std::string_view sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (i) out += sep;
    out += to_string(fs[i]);
  }
  return out;
}

std::vector<std::string> texts(const std::vector<Formula>& fs) {
  std::vector<std::string> out;
  for (const auto& f : fs) out.push_back(to_string(f));
  return out;
}

std::string describe(const logic::World& w) {
  std::string out;
  for (const auto& [id, v] : w.assignment()) {
    if (!out.empty()) out += ", ";
    out += id + "=" + (v ? "1" : "0");
  }
  return "{" + out + "}";
}

NormCheck make(Norm norm, std::vector<Formula> subjects, double residual, double tolerance) {
  return {norm, std::move(subjects), residual, residual <= tolerance, tolerance, {}};
}

}  // namespace

CredenceFunction::CredenceFunction(logic::AtomRegistry registry, std::string lexicon_name, std::string backend_id)
    : registry_(std::move(registry)), lexicon_name_(std::move(lexicon_name)), backend_id_(std::move(backend_id)) {}

void CredenceFunction::add(credence::ProbeRecord record) {
  logic::require_registered(record.formula, registry_);
  if (record.credence && (*record.credence < 0.0 || *record.credence > 1.0))
    throw Error(ErrorCode::InvalidArgument, "credence for '" + to_string(record.formula) + "' is outside [0,1]");
  const Formula f = record.formula;
  if (records_.insert_or_assign(f, std::move(record)).second) order_.push_back(f);
}

void CredenceFunction::set(const Formula& f, double c) {
  credence::ProbeRecord r(f);
  r.as_value = c;
  r.ds_value = to_double(1 - ex(c));
  r.credence = c;
  r.backend_id = backend_id_;
  r.lexicon_name = lexicon_name_;
  add(std::move(r));
}

const credence::ProbeRecord* CredenceFunction::find(const Formula& f) const {
  auto it = records_.find(f);
  return it == records_.end() ? nullptr : &it->second;
}

std::optional<double> CredenceFunction::try_credence(const Formula& f) const {
  const auto* r = find(f);
  return r ? r->credence : std::nullopt;
}

double CredenceFunction::credence(const Formula& f) const {
  const auto* r = find(f);
  if (!r) throw Error(ErrorCode::MissingProbe, "no probe for '" + to_string(f) + "'");
  if (!r->credence)
    throw Error(ErrorCode::UndefinedCredence, "credence for '" + to_string(f) + "' is undefined (" +
                                                  std::string(credence::to_string(r->status)) + ")");
  return *r->credence;
}

std::string CredenceFunction::digest() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [f, r] : records_)
    rows.push_back({to_string(f), r.credence ? nlohmann::json(*r.credence) : nlohmann::json(nullptr), r.as_value,
                    r.ds_value});
  const nlohmann::json j = {{"registry", logic::registry_to_json(registry_)},
                            {"lexicon", lexicon_name_},
                            {"backend", backend_id_},
                            {"rows", rows}};
  return hex_digest(j.dump());
}

std::string_view to_string(Norm norm) {
  switch (norm) {
    case Norm::Negation: return "negation";
    case Norm::Partition: return "partition";
    case Norm::Entailment: return "entailment";
    case Norm::Tautology: return "tautology";
    case Norm::Contradiction: return "contradiction";
    case Norm::FullBeliefConsistency: return "full-belief-consistency";
    case Norm::AssentDissentSymmetry: return "assent-dissent-symmetry";
  }
  return "negation";
}

Norm norm_from_string(std::string_view name) {
  for (int n = 0; n <= static_cast<int>(Norm::AssentDissentSymmetry); ++n)
    if (to_string(static_cast<Norm>(n)) == name) return static_cast<Norm>(n);
  throw Error(ErrorCode::InvalidArgument, "unknown norm '" + std::string(name) + "'");
}

NormCheck negation_check(const CredenceFunction& cf, const Formula& f, double tolerance) {
  const Formula nf = logic::negate(f);
  const Exact sum = ex(cf.credence(f)) + ex(cf.credence(nf));
  return make(Norm::Negation, {f, nf}, abs_double(sum - 1), tolerance);
}

NormCheck partition_check(const CredenceFunction& cf, const std::vector<Formula>& cells, double tolerance) {
  if (cells.empty()) throw Error(ErrorCode::NotAPartition, "partition has no cells");
  for (std::size_t i = 0; i < cells.size(); ++i)
    for (std::size_t j = i + 1; j < cells.size(); ++j) {
      auto overlap = logic::is_satisfiable({cells[i], cells[j]});
      if (overlap.satisfiable)
        throw Error(ErrorCode::NotAPartition, "cells '" + to_string(cells[i]) + "' and '" + to_string(cells[j]) +
                                                  "' overlap in world " + describe(*overlap.witness));
    }
  Formula cover = cells.front();
  for (std::size_t i = 1; i < cells.size(); ++i) cover = logic::disjoin(cover, cells[i]);
  auto gap = logic::is_satisfiable({logic::negate(cover)});
  if (gap.satisfiable)
    throw Error(ErrorCode::NotAPartition, "no cell of {" + join(cells) + "} holds in world " + describe(*gap.witness));

  Exact sum = 0;
  for (const auto& c : cells) sum += ex(cf.credence(c));
  return make(Norm::Partition, cells, abs_double(sum - 1), tolerance);
}

NormCheck entailment_check(const CredenceFunction& cf, const Formula& premise, const Formula& conclusion,
                           double tolerance) {
  if (!logic::entails(premise, conclusion))
    throw Error(ErrorCode::NoEntailment, "'" + to_string(premise) + "' does not entail '" + to_string(conclusion) + "'");
  const Exact diff = ex(cf.credence(premise)) - ex(cf.credence(conclusion));
  return make(Norm::Entailment, {premise, conclusion}, diff > 0 ? to_double(diff) : 0.0, tolerance);
}

std::vector<NormCheck> bound_checks(const CredenceFunction& cf, double tolerance, std::vector<Issue>* skipped) {
  std::vector<NormCheck> out;
  for (const auto& f : cf.formulas()) {
    const bool taut = logic::is_tautology(f);
    const bool contra = !taut && logic::is_contradiction(f);
    if (!taut && !contra) continue;
    const Norm norm = taut ? Norm::Tautology : Norm::Contradiction;
    const auto c = cf.try_credence(f);
    if (!c) {
      if (skipped)
        skipped->push_back({norm, {f}, ErrorCode::UndefinedCredence,
                            "skipped bound check: credence for '" + to_string(f) + "' is undefined"});
      continue;
    }
    out.push_back(make(norm, {f}, taut ? to_double(1 - ex(*c)) : *c, tolerance));
  }
  return out;
}

NormCheck full_belief_consistency(const CredenceFunction& cf, double theta) {
  if (!(theta > 0.5 && theta <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "theta must lie in (0.5, 1], got " + std::to_string(theta));
  std::vector<Formula> beliefs;
  for (const auto& f : cf.formulas())
    if (auto c = cf.try_credence(f); c && *c >= theta) beliefs.push_back(f);
  NormCheck check{Norm::FullBeliefConsistency, beliefs, 0.0, true, 0.0, {}};
  if (!logic::is_satisfiable(beliefs).satisfiable) {
    check.passed = false;
    check.residual = 1.0;
    check.core = logic::minimal_unsatisfiable_subset(beliefs);
  }
  return check;
}

NormCheck symmetry_check(const CredenceFunction& cf, const Formula& f, double tolerance) {
  const Formula nf = logic::negate(f);
  const auto* r = cf.find(f);
  const auto* nr = cf.find(nf);
  auto require = [](const credence::ProbeRecord* rec, const Formula& g) {
    if (!rec) throw Error(ErrorCode::MissingProbe, "no probe for '" + to_string(g) + "'");
    if (rec->status == credence::ProbeStatus::Error)
      throw Error(ErrorCode::UndefinedCredence, "probe for '" + to_string(g) + "' failed");
  };
  require(r, f);
  require(nr, nf);
  return make(Norm::AssentDissentSymmetry, {f, nf}, abs_double(ex(nr->as_value) - ex(r->ds_value)), tolerance);
}

std::size_t AuditReport::failed() const {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const auto& c) { return !c.passed; }));
}

AuditReport run_audit(const CredenceFunction& cf, const AuditConfig& config, std::optional<std::string> created_at) {
  if (cf.empty()) throw Error(ErrorCode::EmptyInput, "credence function has no probed formulas");
  AuditReport report{.registry = cf.registry(),
                     .formulas = cf.formulas(),
                     .lexicon_name = cf.lexicon_name(),
                     .backend_id = cf.backend_id(),
                     .credence_digest = cf.digest(),
                     .theta = config.theta,
                     .tolerance = config.tolerance,
                     .checks = {},
                     .issues = {},
                     .coherent = true,
                     .created_at = created_at ? *created_at : credence::utc_timestamp(),
                     .config_digest = {},
                     .seed = std::nullopt};
  const auto enabled = [&](Norm n) { return config.checks_enabled.count(n) > 0; };
  auto attempt = [&](Norm norm, std::vector<Formula> subjects, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      report.issues.push_back({norm, std::move(subjects), e.code(), e.what()});
    }
  };

  if (enabled(Norm::Negation))
    for (const auto& f : cf.formulas())
      if (cf.contains(logic::negate(f)))
        attempt(Norm::Negation, {f, logic::negate(f)},
                [&] { report.checks.push_back(negation_check(cf, f, config.tolerance)); });

  if (enabled(Norm::Partition))
    for (const auto& cells : config.partitions)
      attempt(Norm::Partition, cells, [&] { report.checks.push_back(partition_check(cf, cells, config.tolerance)); });

  if (enabled(Norm::Entailment)) {
    // Candidates have defined credences and are neither tautologies nor
    // contradictions; those are covered by the bound checks.
    std::vector<Formula> candidates;
    std::vector<std::set<std::string>> atoms;
    attempt(Norm::Entailment, {}, [&] {
      for (const auto& f : cf.formulas()) {
        if (!cf.try_credence(f) || logic::is_tautology(f) || logic::is_contradiction(f)) continue;
        candidates.push_back(f);
        atoms.push_back(logic::atoms_of(f));
      }
    });
    std::size_t calls = 0, unchecked = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i)
      for (std::size_t j = 0; j < candidates.size(); ++j) {
        if (i == j) continue;
        // Without a shared atom a contingent premise cannot entail a
        // contingent conclusion.
        const bool shared = std::any_of(atoms[i].begin(), atoms[i].end(),
                                        [&](const std::string& a) { return atoms[j].count(a) > 0; });
        if (!shared) continue;
        if (calls == config.entailment_budget) {
          ++unchecked;
          continue;
        }
        ++calls;
        attempt(Norm::Entailment, {candidates[i], candidates[j]}, [&] {
          if (logic::entails(candidates[i], candidates[j]))
            report.checks.push_back(entailment_check(cf, candidates[i], candidates[j], config.tolerance));
        });
      }
    if (unchecked)
      report.issues.push_back({Norm::Entailment, {}, ErrorCode::CapExceeded,
                               "entailment budget of " + std::to_string(config.entailment_budget) +
                                   " SAT calls exhausted; " + std::to_string(unchecked) + " pairs unchecked"});
  }

  if (enabled(Norm::Tautology) || enabled(Norm::Contradiction))
    attempt(Norm::Tautology, {}, [&] {
      std::vector<Issue> skipped;
      for (auto& c : bound_checks(cf, config.tolerance, &skipped))
        if (enabled(c.norm)) report.checks.push_back(std::move(c));
      for (auto& s : skipped)
        if (enabled(s.norm)) report.issues.push_back(std::move(s));
    });

  if (enabled(Norm::FullBeliefConsistency))
    attempt(Norm::FullBeliefConsistency, {},
            [&] { report.checks.push_back(full_belief_consistency(cf, config.theta)); });

  if (enabled(Norm::AssentDissentSymmetry))
    for (const auto& f : cf.formulas())
      if (cf.contains(logic::negate(f)))
        attempt(Norm::AssentDissentSymmetry, {f, logic::negate(f)},
                [&] { report.checks.push_back(symmetry_check(cf, f, config.tolerance)); });

  report.coherent = report.failed() == 0;
  return report;
}

AuditConfig audit_config_from_json(const nlohmann::json& j, const logic::AtomRegistry& registry) {
  AuditConfig c;
  try {
    c.theta = j.value("theta", c.theta);
    c.tolerance = j.value("tolerance", c.tolerance);
    c.entailment_budget = j.value("entailment_budget", c.entailment_budget);
    if (j.contains("partitions"))
      for (const auto& cells : j.at("partitions")) {
        std::vector<Formula> p;
        for (const auto& text : cells) p.push_back(logic::parse_formula(text.get<std::string>(), registry));
        c.partitions.push_back(std::move(p));
      }
    if (j.contains("checks_enabled")) {
      c.checks_enabled.clear();
      for (const auto& n : j.at("checks_enabled")) c.checks_enabled.insert(norm_from_string(n.get<std::string>()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("audit config: ") + e.what());
  }
  if (!(c.theta > 0.5 && c.theta <= 1.0)) throw Error(ErrorCode::InvalidArgument, "theta must lie in (0.5, 1]");
  if (!(c.tolerance >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be non-negative");
  return c;
}

nlohmann::json to_json(const AuditConfig& c) {
  nlohmann::json partitions = nlohmann::json::array();
  for (const auto& cells : c.partitions) partitions.push_back(texts(cells));
  nlohmann::json checks = nlohmann::json::array();
  for (Norm n : c.checks_enabled) checks.push_back(to_string(n));
  return {{"theta", c.theta},
          {"tolerance", c.tolerance},
          {"partitions", partitions},
          {"entailment_budget", c.entailment_budget},
          {"checks_enabled", checks}};
}

nlohmann::json to_json(const AuditReport& r) {
  using nlohmann::json;
  json checks = json::array();
  for (const auto& c : r.checks) {
    json row = {{"norm", to_string(c.norm)},
                {"subjects", texts(c.subjects)},
                {"residual", c.residual},
                {"passed", c.passed},
                {"tolerance", c.tolerance}};
    if (c.norm == Norm::FullBeliefConsistency) row["core"] = texts(c.core);
    checks.push_back(std::move(row));
  }
  json issues = json::array();
  for (const auto& i : r.issues)
    issues.push_back({{"norm", to_string(i.norm)},
                      {"subjects", texts(i.subjects)},
                      {"code", to_string(i.code)},
                      {"message", i.message}});
  return {
      {"created_at", r.created_at},
      {"credence_digest", r.credence_digest},
      {"config_digest", r.config_digest},
      {"seed", r.seed ? json(*r.seed) : json(nullptr)},
      {"lexicon", r.lexicon_name},
      {"backend_id", r.backend_id},
      {"registry", logic::registry_to_json(r.registry)},
      {"formulas", texts(r.formulas)},
      {"theta", r.theta},
      {"tolerance", r.tolerance},
      {"coherent", r.coherent},
      {"summary",
       {{"checks", r.checks.size()},
        {"passed", r.checks.size() - r.failed()},
        {"failed", r.failed()},
        {"issues", r.issues.size()}}},
      {"checks", checks},
      {"issues", issues},
  };
}

AuditReport audit_report_from_json(const nlohmann::json& j) {
  try {
    AuditReport r;
    r.registry = logic::registry_from_json(j.at("registry"));
    auto parse_all = [&](const nlohmann::json& arr) {
      std::vector<Formula> out;
      for (const auto& t : arr) out.push_back(logic::parse_formula(t.get<std::string>(), r.registry));
      return out;
    };
    r.formulas = parse_all(j.at("formulas"));
    r.lexicon_name = j.value("lexicon", std::string());
    r.backend_id = j.value("backend_id", std::string());
    r.credence_digest = j.value("credence_digest", std::string());
    r.config_digest = j.value("config_digest", std::string());
    if (j.contains("seed") && !j.at("seed").is_null()) r.seed = j.at("seed").get<std::int64_t>();
    r.created_at = j.value("created_at", std::string());
    r.theta = j.value("theta", kDefaultTheta);
    r.tolerance = j.value("tolerance", kDefaultTolerance);
    for (const auto& c : j.at("checks")) {
      NormCheck check{norm_from_string(c.at("norm").get<std::string>()), parse_all(c.at("subjects")),
                      c.at("residual").get<double>(), c.at("passed").get<bool>(), c.value("tolerance", 0.0), {}};
      if (c.contains("core")) check.core = parse_all(c.at("core"));
      r.checks.push_back(std::move(check));
    }
    for (const auto& i : j.value("issues", nlohmann::json::array()))
      r.issues.push_back({norm_from_string(i.at("norm").get<std::string>()), parse_all(i.at("subjects")),
                          error_code_from_string(i.at("code").get<std::string>()), i.value("message", std::string())});
    r.coherent = r.failed() == 0;
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("audit report: ") + e.what());
  }
}

std::string render_table(const AuditReport& r) {
  std::ostringstream out;
  out << std::left << std::setw(25) << "norm" << std::setw(36) << "subjects" << std::setw(14) << "residual"
      << std::setw(10) << "tolerance"
      << "result\n";
  for (const auto& c : r.checks) {
    std::string subjects = join(c.subjects);
    if (subjects.size() > 34) subjects = subjects.substr(0, 31) + "...";
    std::ostringstream residual;
    residual << std::setprecision(6) << c.residual;
    out << std::left << std::setw(25) << to_string(c.norm) << std::setw(36) << subjects << std::setw(14)
        << residual.str() << std::setw(10) << c.tolerance << (c.passed ? "pass" : "FAIL") << "\n";
    if (!c.core.empty()) out << "  inconsistent core: {" << join(c.core) << "}\n";
  }
  for (const auto& i : r.issues) out << "issue [" << to_string(i.norm) << "] " << i.message << "\n";
  out << "coherent: " << (r.coherent ? "yes" : "no") << " (" << r.failed() << " of " << r.checks.size()
      << " checks failed, " << r.issues.size() << " issues)\n";
  return out.str();
}

std::vector<CheckDelta> ReportDelta::newly_failing() const {
  std::vector<CheckDelta> out;
  std::copy_if(changes.begin(), changes.end(), std::back_inserter(out), [](const auto& c) { return c.newly_failing(); });
  return out;
}

std::vector<CheckDelta> ReportDelta::newly_passing() const {
  std::vector<CheckDelta> out;
  std::copy_if(changes.begin(), changes.end(), std::back_inserter(out), [](const auto& c) { return c.newly_passing(); });
  return out;
}

ReportDelta diff_reports(const AuditReport& before, const AuditReport& after) {
  const auto fb = texts(before.formulas), fa = texts(after.formulas);
  if (std::set(fb.begin(), fb.end()) != std::set(fa.begin(), fa.end()) || !(before.registry == after.registry))
    throw Error(ErrorCode::MismatchedFormulaSets, "reports cover different formulas");
  if (before.lexicon_name != after.lexicon_name)
    throw Error(ErrorCode::MismatchedFormulaSets, "reports use different lexicons ('" + before.lexicon_name +
                                                      "' vs '" + after.lexicon_name + "')");

  using Key = std::pair<Norm, std::vector<std::string>>;
  std::map<Key, const NormCheck*> old;
  for (const auto& c : before.checks) old.emplace(Key{c.norm, texts(c.subjects)}, &c);

  ReportDelta delta;
  std::set<Key> seen;
  for (const auto& c : after.checks) {
    Key key{c.norm, texts(c.subjects)};
    seen.insert(key);
    CheckDelta d{c.norm, key.second, std::nullopt, c.residual, std::nullopt, c.passed};
    if (auto it = old.find(key); it != old.end()) {
      d.residual_before = it->second->residual;
      d.passed_before = it->second->passed;
      if (d.residual_before == d.residual_after && d.passed_before == d.passed_after) continue;
    }
    delta.changes.push_back(std::move(d));
  }
  for (const auto& c : before.checks) {
    Key key{c.norm, texts(c.subjects)};
    if (seen.count(key)) continue;
    delta.changes.push_back({c.norm, key.second, c.residual, std::nullopt, c.passed, std::nullopt});
  }
  return delta;
}

nlohmann::json to_json(const ReportDelta& delta) {
  using nlohmann::json;
  auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
  auto rows = [&](const std::vector<CheckDelta>& ds) {
    json out = json::array();
    for (const auto& d : ds)
      out.push_back({{"norm", to_string(d.norm)},
                     {"subjects", d.subjects},
                     {"residual_before", opt(d.residual_before)},
                     {"residual_after", opt(d.residual_after)},
                     {"delta", to_double(ex(d.residual_after.value_or(0.0)) - ex(d.residual_before.value_or(0.0)))},
                     {"passed_before", opt(d.passed_before)},
                     {"passed_after", opt(d.passed_after)}});
    return out;
  };
  return {{"changes", rows(delta.changes)},
          {"newly_failing", rows(delta.newly_failing())},
          {"newly_passing", rows(delta.newly_passing())}};
}

std::string render_delta(const ReportDelta& delta) {
  if (delta.empty()) return "no changes\n";
  std::ostringstream out;
  auto fmt = [](std::optional<double> v) {
    if (!v) return std::string("-");
    std::ostringstream s;
    s << std::setprecision(6) << *v;
    return s.str();
  };
  for (const auto& d : delta.changes) {
    std::string subjects;
    for (const auto& s : d.subjects) subjects += (subjects.empty() ? "" : ", ") + s;
    out << std::left << std::setw(25) << to_string(d.norm) << std::setw(30) << subjects << fmt(d.residual_before)
        << " -> " << fmt(d.residual_after);
    if (d.newly_failing()) out << "  newly failing";
    if (d.newly_passing()) out << "  newly passing";
    out << "\n";
  }
  out << delta.newly_failing().size() << " newly failing, " << delta.newly_passing().size() << " newly passing\n";
  return out.str();
}

}  // namespace credo::audit
