#include <fstream>
#include <sstream>

#include "credo/cli.hpp"
#include "credo/digest.hpp"

namespace credo::cli {

namespace fs = std::filesystem;

namespace {

nlohmann::json read_json(const fs::path& path, std::string_view what) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + std::string(what) + " " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Format, path.string() + ": " + e.what());
  }
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

PropositionFile load_propositions(const fs::path& path) {
  PropositionFile out;
  out.source = read_json(path, "proposition file");
  const auto& j = out.source;
  try {
    out.registry = logic::registry_from_json(j.at("atoms"));
    for (const auto& text : j.at("formulas"))
      out.formulas.push_back(logic::parse_formula(text.get<std::string>(), out.registry));
    const auto partitions = j.value("partitions", nlohmann::json::array());
    for (const auto& cells : partitions) {
      std::vector<logic::Formula> partition;
      for (const auto& index : cells) {
        const auto i = index.get<std::size_t>();
        if (i >= out.formulas.size())
          throw Error(ErrorCode::Format, "partition index " + std::to_string(i) + " is out of range");
        partition.push_back(out.formulas[i]);
      }
      out.partitions.push_back(std::move(partition));
    }
    const auto truth = j.value("truth", nlohmann::json::object());
    for (const auto& [text, value] : truth.items()) {
      const bool v = value.is_boolean() ? value.get<bool>() : value.get<int>() != 0;
      out.truth[logic::parse_formula(text, out.registry)] = v;
    }
    const auto lexicons = j.value("lexicons", nlohmann::json::object());
    for (const auto& [text, lexicon] : lexicons.items())
      out.lexicon_overrides.emplace(logic::parse_formula(text, out.registry),
                                    credence::load_lexicon(resolve(path.parent_path(), lexicon.get<std::string>())));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, path.string() + ": " + e.what());
  }
  // Declared partitions must be partitions; the check needs no credences.
  audit::CredenceFunction probe_free(out.registry, "", "");
  for (const auto& cells : out.partitions) {
    for (const auto& c : cells)
      if (!probe_free.contains(c)) probe_free.set(c, 0.0);
    try {
      audit::partition_check(probe_free, cells, 0.0);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NotAPartition) throw Error(ErrorCode::NotAPartition, path.string() + ": " + e.what());
      throw;
    }
  }
  return out;
}

RunConfig load_run_config(const fs::path& path) {
  RunConfig c;
  c.path = path;
  c.source = read_json(path, "run config");
  const fs::path base = path.parent_path();
  const auto& j = c.source;
  try {
    c.backend = backend::backend_config_from_json(j.value("backend", nlohmann::json::object()), base);
    if (c.backend.kind == backend::BackendKind::Mock && !fs::exists(c.backend.mock_script))
      throw Error(ErrorCode::Io, "mock script " + c.backend.mock_script.string() + " does not exist");
    c.lexicon = j.contains("lexicon") ? credence::load_lexicon(resolve(base, j.at("lexicon").get<std::string>()))
                                      : credence::default_lexicon();
    if (!j.contains("propositions")) throw Error(ErrorCode::Format, path.string() + ": 'propositions' is required");
    c.propositions = load_propositions(resolve(base, j.at("propositions").get<std::string>()));
    if (j.contains("audit"))
      c.audit = audit::audit_config_from_json(read_json(resolve(base, j.at("audit").get<std::string>()), "audit config"),
                                              c.propositions.registry);
    for (const auto& cells : c.propositions.partitions) c.audit.partitions.push_back(cells);
    c.output = resolve(base, j.value("output", std::string("out")));
    c.seed = j.value("seed", std::int64_t{0});
    c.force_binary = j.value("force_binary", false);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, path.string() + ": " + e.what());
  }
  return c;
}

std::string RunConfig::digest() const {
  nlohmann::json overrides = nlohmann::json::object();
  for (const auto& [f, lex] : propositions.lexicon_overrides) overrides[logic::to_string(f)] = credence::to_json(lex);
  nlohmann::json backend_json = source.value("backend", nlohmann::json::object());
  if (backend.kind == backend::BackendKind::Mock) backend_json["mock_script"] = hex_digest(slurp(backend.mock_script));
  const nlohmann::json j = {
      {"backend", backend_json},
      {"lexicon", credence::to_json(lexicon)},
      {"overrides", overrides},
      {"propositions", propositions.source},
      {"audit", audit::to_json(audit)},
      {"seed", seed},
      {"force_binary", force_binary},
  };
  return hex_digest(j.dump());
}

std::string RunConfig::template_id() const {
  return force_binary ? std::string(backend::templates::kForceBinary) : std::string(backend::templates::kDefault);
}

std::vector<logic::Formula> probe_targets(const RunConfig& config) {
  const auto& listed = config.propositions.formulas;
  const bool negations = config.audit.checks_enabled.count(audit::Norm::Negation) ||
                         config.audit.checks_enabled.count(audit::Norm::AssentDissentSymmetry);
  std::vector<logic::Formula> out;
  std::set<logic::Formula> seen;
  auto push = [&](const logic::Formula& f) {
    if (seen.insert(f).second) out.push_back(f);
  };
  const std::set<logic::Formula> listed_set(listed.begin(), listed.end());
  for (const auto& f : listed) {
    push(f);
    // A listed !g whose g is also listed already forms a pair.
    const bool pairs_with_listed = f.connective() == logic::Connective::Not && listed_set.count(f.operand());
    if (negations && !pairs_with_listed) push(logic::negate(f));
  }
  return out;
}

std::vector<credence::ProbeRecord> read_probes(const fs::path& file, const logic::AtomRegistry& registry) {
  std::vector<credence::ProbeRecord> out;
  if (!fs::exists(file)) return out;
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + file.string());
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    try {
      out.push_back(credence::probe_record_from_json(nlohmann::json::parse(line), registry));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::Format, file.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void write_probes(const fs::path& file, const std::vector<credence::ProbeRecord>& records) {
  std::string body;
  for (const auto& r : records) body += credence::to_json(r).dump() + "\n";
  fs::create_directories(file.parent_path());
  const fs::path tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out << body;
    if (!out.flush()) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
  }
  fs::rename(tmp, file);
}

}  // namespace credo::cli
