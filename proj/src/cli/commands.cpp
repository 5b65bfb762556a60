#include <algorithm>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <thread>

#include "CLI11.hpp"

#include "credo/accuracy.hpp"
#include "credo/cli.hpp"
#include "credo/logic/sat.hpp"

namespace credo::cli {

namespace fs = std::filesystem;
using credence::ProbeRecord;
using credence::ProbeStatus;

namespace {

constexpr const char* kProbesFile = "probes.jsonl";
constexpr const char* kAuditFile = "audit.json";
constexpr const char* kDominanceFile = "dominance.json";
constexpr const char* kReportFile = "report.json";
constexpr const char* kDiffFile = "diff.json";

void write_json(const fs::path& file, const nlohmann::json& j) {
  fs::create_directories(file.parent_path());
  const fs::path tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out << j.dump(2) << "\n";
    if (!out.flush()) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
  }
  fs::rename(tmp, file);
}

nlohmann::json read_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + file.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Format, file.string() + ": " + e.what());
  }
}

const credence::AssentLexicon& lexicon_for(const RunConfig& cfg, const logic::Formula& f) {
  auto it = cfg.propositions.lexicon_overrides.find(f);
  return it == cfg.propositions.lexicon_overrides.end() ? cfg.lexicon : it->second;
}

// Records are reused across runs when formula, lexicon, backend and prompt
// template all match.
std::string key(const std::string& formula, const std::string& lexicon, const std::string& backend_id,
                const std::string& template_id) {
  return formula + '\x1f' + lexicon + '\x1f' + backend_id + '\x1f' + template_id;
}

std::string key(const ProbeRecord& r) {
  return key(logic::to_string(r.formula), r.lexicon_name, r.backend_id, r.prompt.template_id);
}

std::string key(const RunConfig& cfg, const logic::Formula& f, const std::string& backend_id) {
  return key(logic::to_string(f), lexicon_for(cfg, f).name, backend_id, cfg.template_id());
}

std::string list(const std::vector<logic::Formula>& fs) {
  std::string out;
  for (const auto& f : fs) out += (out.empty() ? "" : ", ") + logic::to_string(f);
  return out;
}

int cmd_probe(const RunConfig& cfg, bool refresh, std::ostream& out, std::ostream& err) {
  const auto backend = backend::make_backend(cfg.backend);
  if (cfg.backend.kind == backend::BackendKind::Http)
    if (auto warning = backend::top_k_warning(cfg.backend, cfg.lexicon.size())) err << "warning: " << *warning << "\n";

  const fs::path file = cfg.output / kProbesFile;
  const auto existing = read_probes(file, cfg.propositions.registry);
  std::set<std::string> done;
  for (const auto& r : existing)
    if (r.status != ProbeStatus::Error) done.insert(key(r));

  std::vector<logic::Formula> pending;
  for (const auto& f : probe_targets(cfg))
    if (refresh || !done.count(key(cfg, f, backend->id()))) pending.push_back(f);

  credence::ProbeOptions options;
  options.template_id = cfg.template_id();
  const std::string digest = cfg.digest();
  std::vector<std::optional<ProbeRecord>> results(pending.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < pending.size();) {
      const auto& f = pending[i];
      const auto& lexicon = lexicon_for(cfg, f);
      try {
        results[i] = credence::probe(f, cfg.propositions.registry, lexicon, *backend, options);
      } catch (const std::exception& e) {
        ProbeRecord r(f);
        r.prompt = backend::build_prompt(f, cfg.propositions.registry, options.template_id);
        r.status = ProbeStatus::Error;
        r.error = e.what();
        r.timestamp = credence::utc_timestamp();
        r.backend_id = backend->id();
        r.lexicon_name = lexicon.name;
        results[i] = std::move(r);
      }
      results[i]->config_digest = digest;
      results[i]->seed = cfg.seed;
    }
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(cfg.backend.max_parallel), pending.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::size_t failed = 0;
  for (const auto& r : results)
    if (r->status == ProbeStatus::Error) {
      ++failed;
      err << "error: " << logic::to_string(r->formula) << ": " << r->error << "\n";
    }
  if (!pending.empty() && failed == pending.size()) {
    err << "error: all " << failed << " probes failed; nothing written\n";
    return kError;
  }

  std::set<std::string> replaced;
  for (const auto& r : results) replaced.insert(key(*r));
  std::vector<ProbeRecord> merged;
  for (const auto& r : existing)
    if (!replaced.count(key(r))) merged.push_back(r);
  for (auto& r : results) merged.push_back(std::move(*r));
  if (!pending.empty() || !fs::exists(file)) write_probes(file, merged);

  out << "probed " << pending.size() << " formulas (" << failed << " failed), "
      << (probe_targets(cfg).size() - pending.size()) << " already recorded -> " << file.string() << "\n";
  return failed ? kPartialProbe : kOk;
}

// Credence function for the configured targets, from the matching records.
// Throws MissingProbe naming every target without a usable record.
audit::CredenceFunction load_credences(const RunConfig& cfg, const std::string& backend_id) {
  const auto records = read_probes(cfg.output / kProbesFile, cfg.propositions.registry);
  std::map<std::string, const ProbeRecord*> by_key;
  for (const auto& r : records) by_key[key(r)] = &r;

  audit::CredenceFunction cf(cfg.propositions.registry, cfg.lexicon.name, backend_id);
  std::vector<logic::Formula> missing;
  for (const auto& f : probe_targets(cfg)) {
    auto it = by_key.find(key(cfg, f, backend_id));
    if (it == by_key.end() || it->second->status == ProbeStatus::Error) {
      missing.push_back(f);
      continue;
    }
    cf.add(*it->second);
  }
  if (!missing.empty())
    throw Error(ErrorCode::MissingProbe, "no usable probe records for: " + list(missing) + "; run `credo probe` first");
  return cf;
}

int cmd_audit(const RunConfig& cfg, std::ostream& out) {
  const auto backend = backend::make_backend(cfg.backend);
  const auto cf = load_credences(cfg, backend->id());
  auto report = audit::run_audit(cf, cfg.audit);
  report.config_digest = cfg.digest();
  report.seed = cfg.seed;
  const fs::path file = cfg.output / kAuditFile;
  write_json(file, audit::to_json(report));
  out << audit::render_table(report) << "report -> " << file.string() << "\n";
  return report.coherent ? kOk : kViolation;
}

int cmd_dominate(const RunConfig& cfg, std::ostream& out) {
  const auto targets = probe_targets(cfg);
  const auto worlds = accuracy::world_vectors(targets, cfg.propositions.registry);
  const auto backend = backend::make_backend(cfg.backend);
  const auto cf = load_credences(cfg, backend->id());
  const auto vec = accuracy::credence_vector(cf);
  accuracy::DominanceCertificate cert;
  try {
    cert = accuracy::dominance_certificate(vec, worlds);
  } catch (const accuracy::NonConvergenceError& e) {
    out << "best iterate: distance " << e.best().distance << ", duality gap " << e.best().gap << "\n";
    throw;
  }
  cert.lexicon_name = cf.lexicon_name();
  cert.backend_id = cf.backend_id();
  cert.config_digest = cfg.digest();
  cert.seed = cfg.seed;
  const fs::path file = cfg.output / kDominanceFile;
  write_json(file, accuracy::to_json(cert));
  out << accuracy::render_table(cert) << "certificate -> " << file.string() << "\n";
  return cert.strictly_dominates ? kViolation : kOk;
}

// Supplied truth values plus those they settle for other probed formulas
// (p=1 fixes !p=0). Inconsistent input is passed through for the scorer to reject.
std::map<logic::Formula, bool> settled_truth(const audit::CredenceFunction& cf,
                                             const std::map<logic::Formula, bool>& truth) {
  std::vector<logic::Formula> literals;
  for (const auto& [f, v] : truth) literals.push_back(v ? f : logic::negate(f));
  if (!logic::is_satisfiable(literals).satisfiable) return truth;
  auto out = truth;
  for (const auto& f : cf.formulas()) {
    if (out.count(f)) continue;
    auto with = literals;
    with.push_back(logic::negate(f));
    if (!logic::is_satisfiable(with).satisfiable) {
      out[f] = true;
      continue;
    }
    with.back() = f;
    if (!logic::is_satisfiable(with).satisfiable) out[f] = false;
  }
  return out;
}

int cmd_report(const RunConfig& cfg, std::ostream& out) {
  const auto backend = backend::make_backend(cfg.backend);
  const auto cf = load_credences(cfg, backend->id());
  nlohmann::json rows = nlohmann::json::array();
  out << std::left << std::setw(36) << "formula" << std::setw(12) << "as" << std::setw(12) << "ds" << std::setw(12)
      << "credence"
      << "status\n";
  for (const auto& f : cf.formulas()) {
    const auto* r = cf.find(f);
    std::string text = logic::to_string(f);
    out << std::left << std::setw(36) << (text.size() > 34 ? text.substr(0, 31) + "..." : text) << std::setw(12)
        << r->as_value << std::setw(12) << r->ds_value << std::setw(12)
        << (r->credence ? std::to_string(*r->credence) : std::string("-")) << credence::to_string(r->status)
        << (r->approximate ? " (approximate)" : "") << "\n";
    rows.push_back({{"formula", text},
                    {"as", r->as_value},
                    {"ds", r->ds_value},
                    {"credence", r->credence ? nlohmann::json(*r->credence) : nlohmann::json(nullptr)},
                    {"status", credence::to_string(r->status)},
                    {"approximate", r->approximate}});
  }
  nlohmann::json j = {{"credences", rows},
                      {"lexicon", cf.lexicon_name()},
                      {"backend_id", cf.backend_id()},
                      {"config_digest", cfg.digest()},
                      {"seed", cfg.seed}};
  if (!cfg.propositions.truth.empty()) {
    const double score = accuracy::score_against_truth(cf, settled_truth(cf, cfg.propositions.truth));
    j["brier_against_truth"] = score;
    out << "Brier score against the supplied truth values: " << score << "\n";
  }
  if (const fs::path audit_file = cfg.output / kAuditFile; fs::exists(audit_file)) {
    const auto report = audit::audit_report_from_json(read_json(audit_file));
    j["audit"] = {{"coherent", report.coherent}, {"checks", report.checks.size()}, {"failed", report.failed()}};
    out << "last audit: " << (report.coherent ? "coherent" : "incoherent") << " (" << report.failed() << " of "
        << report.checks.size() << " checks failed)\n";
  }
  const fs::path file = cfg.output / kReportFile;
  write_json(file, j);
  out << "report -> " << file.string() << "\n";
  return kOk;
}

int cmd_diff(const fs::path& before, const fs::path& after, const std::optional<fs::path>& output,
             std::ostream& out) {
  const auto delta =
      audit::diff_reports(audit::audit_report_from_json(read_json(before)), audit::audit_report_from_json(read_json(after)));
  out << audit::render_delta(delta);
  if (output) write_json(*output / kDiffFile, audit::to_json(delta));
  return delta.newly_failing().empty() ? kOk : kViolation;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Probe, audit and score the credences of a language model.", "credo"};
  app.require_subcommand(1);
  std::string config_path, output;
  bool refresh = false, force_binary = false;
  std::optional<double> theta, tolerance;
  app.add_option("--config", config_path, "run config (JSON)");
  app.add_option("--output", output, "output directory, overriding the config");
  app.add_flag("--refresh", refresh, "probe again even if records exist");
  app.add_flag("--force-binary", force_binary, "append 'Answer yes or no.' to every prompt");
  app.add_option("--theta", theta, "full-belief threshold in (0.5, 1]");
  app.add_option("--tolerance", tolerance, "residual tolerance for audit checks");

  auto* probe = app.add_subcommand("probe", "probe every formula and write probes.jsonl");
  auto* audit = app.add_subcommand("audit", "check probed credences against the coherence norms");
  auto* dominate = app.add_subcommand("dominate", "project credences onto the coherent set and certify dominance");
  auto* report = app.add_subcommand("report", "summarize probed credences");
  auto* diff = app.add_subcommand("diff", "compare two audit reports");
  std::string before, after;
  diff->add_option("before", before, "earlier audit.json")->required();
  diff->add_option("after", after, "later audit.json")->required();
  for (auto* sub : {probe, audit, dominate, report, diff}) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kError;
  }

  try {
    if (diff->parsed())
      return cmd_diff(before, after, output.empty() ? std::nullopt : std::optional<fs::path>(output), out);

    if (config_path.empty()) throw Error(ErrorCode::InvalidArgument, "--config is required");
    RunConfig cfg = load_run_config(config_path);
    if (!output.empty()) cfg.output = output;
    if (force_binary) cfg.force_binary = true;
    if (theta) {
      if (!(*theta > 0.5 && *theta <= 1.0)) throw Error(ErrorCode::InvalidArgument, "--theta must lie in (0.5, 1]");
      cfg.audit.theta = *theta;
    }
    if (tolerance) {
      if (!(*tolerance >= 0.0)) throw Error(ErrorCode::InvalidArgument, "--tolerance must be non-negative");
      cfg.audit.tolerance = *tolerance;
    }
    if (probe->parsed()) return cmd_probe(cfg, refresh, out, err);
    if (audit->parsed()) return cmd_audit(cfg, out);
    if (dominate->parsed()) return cmd_dominate(cfg, out);
    return cmd_report(cfg, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
}

}  // namespace credo::cli
