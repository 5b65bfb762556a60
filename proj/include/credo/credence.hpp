#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "credo/backend/backend.hpp"
#include "credo/exact.hpp"
#include "credo/logic/formula.hpp"
#include "credo/logic/registry.hpp"

namespace credo::credence {

// Minimum assent + dissent mass for a credence to be defined.
inline constexpr double kResponsivenessThreshold = 1e-6;

// Surface strings counting as assent (AS) and dissent (DS). Case and
// leading-space variants are separate entries.
struct AssentLexicon {
  std::string name;
  std::vector<std::string> assent;
  std::vector<std::string> dissent;

  std::size_t size() const noexcept { return assent.size() + dissent.size(); }

  friend bool operator==(const AssentLexicon&, const AssentLexicon&) = default;
};

// Phrases that report the speaker's confidence ("I am sure", "probably",
// ...). Lexicon entries containing one, case-insensitively, are rejected.
const std::vector<std::string>& default_epistemic_markers();

// Throws InvalidLexicon: empty name or entry, AS and DS overlapping, or an
// entry carrying an epistemic marker.
void validate(const AssentLexicon& lexicon, std::span<const std::string> markers = default_epistemic_markers());

// {"name", "assent": [...], "dissent": [...]}; validated on load.
AssentLexicon lexicon_from_json(const nlohmann::json& j,
                                std::span<const std::string> markers = default_epistemic_markers());
nlohmann::json to_json(const AssentLexicon& lexicon);
AssentLexicon load_lexicon(const std::filesystem::path& path,
                           std::span<const std::string> markers = default_epistemic_markers());

// yes/yeah/sure/indeed/correct/true/certainly against no/nope/never/
// incorrect/false, each as lower, Capitalized, " lower" and " Capitalized".
AssentLexicon default_lexicon();

// Exactly {"yes"} against {"no"}.
AssentLexicon yes_no_lexicon();

struct ProbeOptions {
  std::string template_id{backend::templates::kDefault};
  double responsiveness_threshold = kResponsivenessThreshold;
  std::size_t digest_size = 10;
  // Timestamp to stamp on records; the current UTC time when unset.
  std::optional<std::string> timestamp;
};

// Summed probability of a lexicon side, kept exact for the credence ratio.
struct Mass {
  Exact exact{0};
  double value = 0.0;
  bool approximate = false;
};

Mass assent_probability(const logic::Formula& f, const logic::AtomRegistry& registry, const AssentLexicon& lexicon,
                        const backend::Backend& backend, const ProbeOptions& options = {});
Mass dissent_probability(const logic::Formula& f, const logic::AtomRegistry& registry, const AssentLexicon& lexicon,
                         const backend::Backend& backend, const ProbeOptions& options = {});

enum class ProbeStatus { Ok, NonResponsive, Error };

std::string_view to_string(ProbeStatus status);

// Head of the first-token distribution observed for a probe.
struct DistributionDigest {
  std::vector<std::pair<std::string, double>> head;
  double residual = 0.0;
  // Itemized first-token mass on tokens that contain an epistemic marker.
  // Excluded from as/ds, kept here for analysis.
  double marker_mass = 0.0;

  friend bool operator==(const DistributionDigest&, const DistributionDigest&) = default;
};

struct ProbeRecord {
  explicit ProbeRecord(logic::Formula f) : formula(std::move(f)) {}

  logic::Formula formula;
  backend::Prompt prompt;
  double as_value = 0.0;
  double ds_value = 0.0;
  // Defined iff as + ds >= threshold; then exactly as / (as + ds), computed
  // on the exact masses and rounded once.
  std::optional<double> credence;
  bool approximate = false;
  DistributionDigest digest;
  std::string timestamp;
  std::string backend_id;
  std::string lexicon_name;
  ProbeStatus status = ProbeStatus::Ok;
  std::string error;  // set when status == Error
  // Run metadata stamped by the CLI.
  std::string config_digest;
  std::optional<std::int64_t> seed;
};

bool operator==(const ProbeRecord& a, const ProbeRecord& b);

// Probes f: as(f), ds(f) and the ratio. A non-responsive probe is returned
// with status NonResponsive and no credence; backend errors propagate.
ProbeRecord probe(const logic::Formula& f, const logic::AtomRegistry& registry, const AssentLexicon& lexicon,
                  const backend::Backend& backend, const ProbeOptions& options = {});

// As probe(), but throws NonResponsive when the credence is undefined.
ProbeRecord credence(const logic::Formula& f, const logic::AtomRegistry& registry, const AssentLexicon& lexicon,
                     const backend::Backend& backend, const ProbeOptions& options = {});

// credence() with yes_no_lexicon().
ProbeRecord yes_no_credence(const logic::Formula& f, const logic::AtomRegistry& registry,
                            const backend::Backend& backend, const ProbeOptions& options = {});

// |as(!f) - ds(f)|. A rationality diagnostic only; never feeds into cr.
double assent_dissent_symmetry_residual(const logic::Formula& f, const logic::AtomRegistry& registry,
                                        const AssentLexicon& lexicon, const backend::Backend& backend,
                                        const ProbeOptions& options = {});

// One JSONL line per record. Formulas are stored as canonical text and
// re-parsed against `registry` on load.
nlohmann::json to_json(const ProbeRecord& record);
ProbeRecord probe_record_from_json(const nlohmann::json& j, const logic::AtomRegistry& registry);

std::string utc_timestamp();

}  // namespace credo::credence
