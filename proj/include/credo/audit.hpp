#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "credo/credence.hpp"
#include "credo/logic/formula.hpp"
#include "credo/logic/registry.hpp"

namespace credo::audit {

inline constexpr double kDefaultTheta = 0.9;
inline constexpr double kDefaultTolerance = 0.05;
inline constexpr std::size_t kDefaultEntailmentBudget = 10000;

// Probed credences over one registry, lexicon and backend. Formulas keep
// the order in which they were added.
class CredenceFunction {
 public:
  CredenceFunction(logic::AtomRegistry registry, std::string lexicon_name, std::string backend_id);

  // Adds or replaces the record for its formula. Throws Unrenderable for
  // atoms outside the registry and InvalidArgument for a credence outside
  // [0,1].
  void add(credence::ProbeRecord record);
  // Synthetic record with as = c, ds = 1 - c. For fixtures and tests.
  void set(const logic::Formula& f, double c);

  const logic::AtomRegistry& registry() const noexcept { return registry_; }
  const std::string& lexicon_name() const noexcept { return lexicon_name_; }
  const std::string& backend_id() const noexcept { return backend_id_; }

  bool empty() const noexcept { return order_.empty(); }
  std::size_t size() const noexcept { return order_.size(); }
  const std::vector<logic::Formula>& formulas() const noexcept { return order_; }
  bool contains(const logic::Formula& f) const { return records_.count(f) > 0; }
  const credence::ProbeRecord* find(const logic::Formula& f) const;

  // Throws MissingProbe when f was not probed and UndefinedCredence when the
  // probe produced no credence.
  double credence(const logic::Formula& f) const;
  std::optional<double> try_credence(const logic::Formula& f) const;

  std::string digest() const;

 private:
  logic::AtomRegistry registry_;
  std::string lexicon_name_;
  std::string backend_id_;
  std::vector<logic::Formula> order_;
  std::map<logic::Formula, credence::ProbeRecord> records_;
};

enum class Norm {
  Negation,
  Partition,
  Entailment,
  Tautology,
  Contradiction,
  FullBeliefConsistency,
  AssentDissentSymmetry,
};

std::string_view to_string(Norm norm);
Norm norm_from_string(std::string_view name);

struct NormCheck {
  Norm norm = Norm::Negation;
  std::vector<logic::Formula> subjects;
  double residual = 0.0;
  bool passed = true;
  double tolerance = 0.0;
  // full-belief consistency: a minimal unsatisfiable subset of the beliefs
  std::vector<logic::Formula> core;
};

// A check that could not be run, or a warning about one that was skipped.
struct Issue {
  Norm norm = Norm::Negation;
  std::vector<logic::Formula> subjects;
  ErrorCode code = ErrorCode::InvalidArgument;
  std::string message;
};

NormCheck negation_check(const CredenceFunction& cf, const logic::Formula& f, double tolerance);
// Throws NotAPartition with the overlapping pair, or the uncovered world,
// in the message.
NormCheck partition_check(const CredenceFunction& cf, const std::vector<logic::Formula>& cells, double tolerance);
NormCheck entailment_check(const CredenceFunction& cf, const logic::Formula& premise,
                           const logic::Formula& conclusion, double tolerance);
// Tautology and contradiction bounds for every probed formula that is one.
// Undefined credences are skipped and reported in `skipped`.
std::vector<NormCheck> bound_checks(const CredenceFunction& cf, double tolerance,
                                    std::vector<Issue>* skipped = nullptr);
// Beliefs are the formulas with cr >= theta; theta must lie in (0.5, 1].
NormCheck full_belief_consistency(const CredenceFunction& cf, double theta);
// |as(!f) - ds(f)| from the stored records of f and !f.
NormCheck symmetry_check(const CredenceFunction& cf, const logic::Formula& f, double tolerance);

struct AuditConfig {
  double theta = kDefaultTheta;
  double tolerance = kDefaultTolerance;
  std::vector<std::vector<logic::Formula>> partitions;
  std::size_t entailment_budget = kDefaultEntailmentBudget;
  std::set<Norm> checks_enabled{Norm::Negation,      Norm::Partition,     Norm::Entailment,
                                Norm::Tautology,     Norm::Contradiction, Norm::FullBeliefConsistency};
};

// {theta, tolerance, partitions: [[formula, ...], ...], entailment_budget,
// checks_enabled: [...]}. Partition formulas are parsed against `registry`.
AuditConfig audit_config_from_json(const nlohmann::json& j, const logic::AtomRegistry& registry);
nlohmann::json to_json(const AuditConfig& config);

struct AuditReport {
  logic::AtomRegistry registry;
  std::vector<logic::Formula> formulas;
  std::string lexicon_name;
  std::string backend_id;
  std::string credence_digest;
  double theta = kDefaultTheta;
  double tolerance = kDefaultTolerance;
  std::vector<NormCheck> checks;
  std::vector<Issue> issues;
  bool coherent = true;
  std::string created_at;
  // Run metadata stamped by the CLI.
  std::string config_digest;
  std::optional<std::int64_t> seed;

  std::size_t failed() const;
};

// Runs every enabled check that applies to cf. Errors from single checks
// become issues; only an empty cf throws (EmptyInput).
AuditReport run_audit(const CredenceFunction& cf, const AuditConfig& config = {},
                      std::optional<std::string> created_at = std::nullopt);

nlohmann::json to_json(const AuditReport& report);
AuditReport audit_report_from_json(const nlohmann::json& j);
std::string render_table(const AuditReport& report);

struct CheckDelta {
  Norm norm = Norm::Negation;
  std::vector<std::string> subjects;
  std::optional<double> residual_before;
  std::optional<double> residual_after;
  std::optional<bool> passed_before;
  std::optional<bool> passed_after;

  double delta() const { return residual_after.value_or(0.0) - residual_before.value_or(0.0); }
  bool newly_failing() const { return passed_after == false && passed_before != false; }
  bool newly_passing() const { return passed_after == true && passed_before == false; }
};

// Only checks whose residual or verdict changed.
struct ReportDelta {
  std::vector<CheckDelta> changes;

  bool empty() const noexcept { return changes.empty(); }
  std::vector<CheckDelta> newly_failing() const;
  std::vector<CheckDelta> newly_passing() const;
};

// Throws MismatchedFormulaSets unless both reports cover the same formulas
// under the same lexicon.
ReportDelta diff_reports(const AuditReport& before, const AuditReport& after);
nlohmann::json to_json(const ReportDelta& delta);
std::string render_delta(const ReportDelta& delta);

}  // namespace credo::audit
