#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "credo/audit.hpp"
#include "credo/backend/http.hpp"
#include "credo/credence.hpp"
#include "credo/logic/formula.hpp"
#include "credo/logic/registry.hpp"

namespace credo::cli {

// Exit codes shared by every command.
enum Exit : int {
  kOk = 0,
  kViolation = 1,      // audit incoherent, dominated, or newly failing checks
  kError = 2,          // operational error, including total probe failure
  kPartialProbe = 3,   // probe: some formulas failed, the rest were written
};

// {"atoms": [{id, surface}, ...], "formulas": [text, ...],
//  "partitions": [[index, ...], ...], "truth": {text: 0|1},
//  "lexicons": {text: lexicon path}}
struct PropositionFile {
  logic::AtomRegistry registry;
  std::vector<logic::Formula> formulas;
  std::vector<std::vector<logic::Formula>> partitions;
  std::map<logic::Formula, bool> truth;
  std::map<logic::Formula, credence::AssentLexicon> lexicon_overrides;
  nlohmann::json source;  // as read, for the config digest
};

// Rejects formulas over unknown atoms, out-of-range partition indices and
// declared partitions that are not partitions (NotAPartition, with witness).
PropositionFile load_propositions(const std::filesystem::path& path);

// {"backend": {...}, "lexicon": path, "propositions": path, "audit": path,
//  "output": dir, "seed": n, "force_binary": bool}. Relative paths resolve
// against the config file's directory. Everything referenced is loaded here.
struct RunConfig {
  std::filesystem::path path;
  backend::BackendConfig backend;
  credence::AssentLexicon lexicon;
  PropositionFile propositions;
  audit::AuditConfig audit;
  std::filesystem::path output;
  std::int64_t seed = 0;
  bool force_binary = false;
  nlohmann::json source;

  // Digest over the resolved config and every file it references.
  std::string digest() const;
  std::string template_id() const;
};

RunConfig load_run_config(const std::filesystem::path& path);

// Formulas `probe` covers: each listed formula followed by its negation
// when negation checks are enabled, without duplicates.
std::vector<logic::Formula> probe_targets(const RunConfig& config);

// Reads probes.jsonl; a missing file yields no records.
std::vector<credence::ProbeRecord> read_probes(const std::filesystem::path& file, const logic::AtomRegistry& registry);
// Replaces `file` atomically (temp file + rename).
void write_probes(const std::filesystem::path& file, const std::vector<credence::ProbeRecord>& records);

// Entry point shared by the binary and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace credo::cli
