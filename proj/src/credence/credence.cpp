#include "credo/credence.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <fstream>
#include <set>

namespace credo::credence {

using backend::Backend;
using backend::CachingBackend;
using logic::Formula;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string capitalized(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::vector<std::string> variants(std::initializer_list<const char*> words) {
  std::vector<std::string> out;
  for (const char* w : words) {
    const std::string word(w);
    out.push_back(word);
    out.push_back(capitalized(word));
    out.push_back(" " + word);
    out.push_back(" " + capitalized(word));
  }
  return out;
}

std::optional<std::string> marker_in(std::string_view entry, std::span<const std::string> markers) {
  const std::string text = lower(entry);
  for (const auto& m : markers)
    if (text.find(lower(m)) != std::string::npos) return m;
  return std::nullopt;
}

Mass lexicon_mass(const Formula& f, const logic::AtomRegistry& registry, const std::vector<std::string>& side,
                  const Backend& backend, const ProbeOptions& options) {
  const auto prompt = backend::build_prompt(f, registry, options.template_id);
  Mass mass;
  std::set<backend::TokenSequence> bounded;
  for (const auto& surface : side) {
    const auto tokens = backend.tokenize(surface);
    const auto p = backend::sequence_probability(backend, prompt, tokens);
    if (p.bounded_at) {
      // P(prefix) * residual covers every missing token at that context.
      mass.approximate = true;
      if (!bounded.insert(*p.bounded_at).second) continue;
    }
    mass.exact += p.exact;
  }
  mass.value = to_double(mass.exact);
  return mass;
}

}  // namespace

const std::vector<std::string>& default_epistemic_markers() {
  static const std::vector<std::string> markers{
      "i am sure", "i'm sure",  "i am certain", "i'm certain", "i am quite", "i'm quite", "i doubt",
      "it seems",  "seems to",  "probably",     "certainly that", "i think", "i believe", "i guess",
      "i suppose", "perhaps",   "maybe",        "likely",         "doubtful", "not sure",
  };
  return markers;
}

void validate(const AssentLexicon& lexicon, std::span<const std::string> markers) {
  if (lexicon.name.empty()) throw Error(ErrorCode::InvalidLexicon, "lexicon name is empty");
  const std::set<std::string> assent(lexicon.assent.begin(), lexicon.assent.end());
  auto check_entry = [&](const std::string& entry, const char* side) {
    if (entry.empty()) throw Error(ErrorCode::InvalidLexicon, std::string("empty ") + side + " entry");
    if (auto m = marker_in(entry, markers))
      throw Error(ErrorCode::InvalidLexicon, std::string(side) + " entry '" + entry + "' contains epistemic marker '" +
                                                 *m + "'");
  };
  for (const auto& a : lexicon.assent) check_entry(a, "assent");
  for (const auto& d : lexicon.dissent) {
    check_entry(d, "dissent");
    if (assent.count(d)) throw Error(ErrorCode::InvalidLexicon, "'" + d + "' is both an assent and a dissent entry");
  }
}

AssentLexicon lexicon_from_json(const nlohmann::json& j, std::span<const std::string> markers) {
  AssentLexicon lexicon;
  try {
    lexicon.name = j.at("name").get<std::string>();
    lexicon.assent = j.value("assent", std::vector<std::string>{});
    lexicon.dissent = j.value("dissent", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("lexicon: ") + e.what());
  }
  // Duplicates would double-count mass.
  auto dedupe = [](std::vector<std::string>& v) {
    std::set<std::string> seen;
    std::erase_if(v, [&](const std::string& s) { return !seen.insert(s).second; });
  };
  dedupe(lexicon.assent);
  dedupe(lexicon.dissent);
  validate(lexicon, markers);
  return lexicon;
}

nlohmann::json to_json(const AssentLexicon& lexicon) {
  return {{"name", lexicon.name}, {"assent", lexicon.assent}, {"dissent", lexicon.dissent}};
}

AssentLexicon load_lexicon(const std::filesystem::path& path, std::span<const std::string> markers) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open lexicon " + path.string());
  try {
    return lexicon_from_json(nlohmann::json::parse(in), markers);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Format, path.string() + ": " + e.what());
  }
}

AssentLexicon default_lexicon() {
  return {"default-v1", variants({"yes", "yeah", "sure", "indeed", "correct", "true", "certainly"}),
          variants({"no", "nope", "never", "incorrect", "false"})};
}

AssentLexicon yes_no_lexicon() { return {"yes-no", {"yes"}, {"no"}}; }

Mass assent_probability(const Formula& f, const logic::AtomRegistry& registry, const AssentLexicon& lexicon,
                        const Backend& backend, const ProbeOptions& options) {
  return lexicon_mass(f, registry, lexicon.assent, backend, options);
}

Mass dissent_probability(const Formula& f, const logic::AtomRegistry& registry, const AssentLexicon& lexicon,
                         const Backend& backend, const ProbeOptions& options) {
  return lexicon_mass(f, registry, lexicon.dissent, backend, options);
}

std::string_view to_string(ProbeStatus status) {
  switch (status) {
    case ProbeStatus::Ok: return "ok";
    case ProbeStatus::NonResponsive: return "non-responsive";
    case ProbeStatus::Error: return "error";
  }
  return "error";
}

bool operator==(const ProbeRecord& a, const ProbeRecord& b) {
  return a.formula == b.formula && a.prompt == b.prompt && a.as_value == b.as_value && a.ds_value == b.ds_value &&
         a.credence == b.credence && a.approximate == b.approximate && a.digest == b.digest &&
         a.timestamp == b.timestamp && a.backend_id == b.backend_id && a.lexicon_name == b.lexicon_name &&
         a.status == b.status && a.error == b.error && a.config_digest == b.config_digest && a.seed == b.seed;
}

ProbeRecord probe(const Formula& f, const logic::AtomRegistry& registry, const AssentLexicon& lexicon,
                  const Backend& backend, const ProbeOptions& options) {
  const CachingBackend cached(backend);
  ProbeRecord r(f);
  r.prompt = backend::build_prompt(f, registry, options.template_id);
  const Mass as = assent_probability(f, registry, lexicon, cached, options);
  const Mass ds = dissent_probability(f, registry, lexicon, cached, options);
  r.as_value = as.value;
  r.ds_value = ds.value;
  r.approximate = as.approximate || ds.approximate;

  const auto first = cached.next_token_distribution(r.prompt, {});
  r.digest.head = first.head(options.digest_size);
  r.digest.residual = first.residual;
  Exact marker_mass = 0;
  for (const auto& [token, p] : first.entries)
    if (marker_in(token, default_epistemic_markers())) marker_mass += exact_from_double(p);
  r.digest.marker_mass = to_double(marker_mass);

  const Exact total = as.exact + ds.exact;
  if (total > 0 && total >= exact_from_double(options.responsiveness_threshold)) {
    r.credence = to_double(as.exact / total);
    r.status = ProbeStatus::Ok;
  } else {
    r.status = ProbeStatus::NonResponsive;
  }
  r.timestamp = options.timestamp ? *options.timestamp : utc_timestamp();
  r.backend_id = backend.id();
  r.lexicon_name = lexicon.name;
  return r;
}

ProbeRecord credence(const Formula& f, const logic::AtomRegistry& registry, const AssentLexicon& lexicon,
                     const Backend& backend, const ProbeOptions& options) {
  ProbeRecord r = probe(f, registry, lexicon, backend, options);
  if (!r.credence)
    throw Error(ErrorCode::NonResponsive, "assent + dissent mass for '" + logic::to_string(f) +
                                              "' is below the responsiveness threshold");
  return r;
}

ProbeRecord yes_no_credence(const Formula& f, const logic::AtomRegistry& registry, const Backend& backend,
                            const ProbeOptions& options) {
  return credence(f, registry, yes_no_lexicon(), backend, options);
}

double assent_dissent_symmetry_residual(const Formula& f, const logic::AtomRegistry& registry,
                                        const AssentLexicon& lexicon, const Backend& backend,
                                        const ProbeOptions& options) {
  const Formula nf = logic::negate(f);
  logic::require_registered(nf, registry);
  const CachingBackend cached(backend);
  const Mass as_neg = assent_probability(nf, registry, lexicon, cached, options);
  const Mass ds = dissent_probability(f, registry, lexicon, cached, options);
  return to_double(boost::multiprecision::abs(as_neg.exact - ds.exact));
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json to_json(const ProbeRecord& r) {
  using nlohmann::json;
  json head = json::array();
  for (const auto& [token, p] : r.digest.head) head.push_back({token, p});
  json j = {
      {"formula", logic::to_string(r.formula)},
      {"prompt", {{"text", r.prompt.text}, {"template_id", r.prompt.template_id}, {"id", r.prompt.id()}}},
      {"status", to_string(r.status)},
      {"as", r.as_value},
      {"ds", r.ds_value},
      {"credence", r.credence ? json(*r.credence) : json(nullptr)},
      {"approximate", r.approximate},
      {"digest", {{"head", head}, {"residual", r.digest.residual}, {"marker_mass", r.digest.marker_mass}}},
      {"timestamp", r.timestamp},
      {"backend_id", r.backend_id},
      {"lexicon", r.lexicon_name},
      {"config_digest", r.config_digest},
      {"seed", r.seed ? json(*r.seed) : json(nullptr)},
  };
  if (r.status == ProbeStatus::Error) {
    j["error"] = r.error;
    j["as"] = nullptr;
    j["ds"] = nullptr;
  }
  return j;
}

ProbeRecord probe_record_from_json(const nlohmann::json& j, const logic::AtomRegistry& registry) {
  try {
    ProbeRecord r(logic::parse_formula(j.at("formula").get<std::string>(), registry));
    const auto& prompt = j.at("prompt");
    r.prompt = {prompt.at("text").get<std::string>(), prompt.at("template_id").get<std::string>()};
    const std::string status = j.value("status", std::string("ok"));
    if (status == "ok") {
      r.status = ProbeStatus::Ok;
    } else if (status == "non-responsive") {
      r.status = ProbeStatus::NonResponsive;
    } else if (status == "error") {
      r.status = ProbeStatus::Error;
    } else {
      throw Error(ErrorCode::Format, "unknown probe status '" + status + "'");
    }
    if (j.contains("as") && !j.at("as").is_null()) r.as_value = j.at("as").get<double>();
    if (j.contains("ds") && !j.at("ds").is_null()) r.ds_value = j.at("ds").get<double>();
    if (j.contains("credence") && !j.at("credence").is_null()) r.credence = j.at("credence").get<double>();
    r.approximate = j.value("approximate", false);
    if (j.contains("digest")) {
      const auto& d = j.at("digest");
      for (const auto& e : d.value("head", nlohmann::json::array()))
        r.digest.head.emplace_back(e.at(0).get<std::string>(), e.at(1).get<double>());
      r.digest.residual = d.value("residual", 0.0);
      r.digest.marker_mass = d.value("marker_mass", 0.0);
    }
    r.timestamp = j.value("timestamp", std::string());
    r.backend_id = j.value("backend_id", std::string());
    r.lexicon_name = j.value("lexicon", std::string());
    r.error = j.value("error", std::string());
    r.config_digest = j.value("config_digest", std::string());
    if (j.contains("seed") && !j.at("seed").is_null()) r.seed = j.at("seed").get<std::int64_t>();
    if (r.credence && (*r.credence < 0.0 || *r.credence > 1.0))
      throw Error(ErrorCode::Format, "credence outside [0,1] for '" + logic::to_string(r.formula) + "'");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("probe record: ") + e.what());
  }
}

}  // namespace credo::credence
