#include "credo/backend/backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>

#include "credo/digest.hpp"

namespace credo::backend {

using logic::Connective;
using logic::Formula;

TokenDistribution TokenDistribution::from_entries(std::map<std::string, double> entries, std::optional<double> residual) {
  TokenDistribution d;
  d.entries = std::move(entries);
  if (residual) {
    d.residual = *residual;
  } else {
    double sum = 0.0;
    for (const auto& [token, p] : d.entries) sum += p;
    d.residual = std::max(0.0, 1.0 - sum);
  }
  d.validate();
  return d;
}

void TokenDistribution::validate() const {
  double sum = 0.0;
  for (const auto& [token, p] : entries) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw Error(ErrorCode::NormalizationViolation, "token '" + token + "' has invalid probability");
    sum += p;
  }
  if (!(residual >= 0.0) || !std::isfinite(residual))
    throw Error(ErrorCode::NormalizationViolation, "residual mass must be non-negative");
  const double total = sum + residual;
  if (total < 1.0 - kNormTolerance || total > 1.0 + kNormTolerance) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", total);
    throw Error(ErrorCode::NormalizationViolation, std::string("itemized mass plus residual is ") + buf);
  }
}

std::optional<double> TokenDistribution::probability(const std::string& token) const {
  auto it = entries.find(token);
  if (it == entries.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<std::string, double>> TokenDistribution::head(std::size_t n) const {
  std::vector<std::pair<std::string, double>> out(entries.begin(), entries.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (out.size() > n) out.resize(n);
  return out;
}

nlohmann::json to_json(const TokenDistribution& d) {
  nlohmann::json entries = nlohmann::json::object();
  for (const auto& [token, p] : d.entries) entries[token] = p;
  return {{"entries", entries}, {"residual", d.residual}};
}

TokenDistribution distribution_from_json(const nlohmann::json& j) {
  // Either {"entries": {...}, "residual": r} or a bare token -> p map.
  const nlohmann::json& table = j.contains("entries") ? j.at("entries") : j;
  std::map<std::string, double> entries;
  for (const auto& [token, p] : table.items()) {
    if (&table == &j && token == "residual") continue;
    entries[token] = p.get<double>();
  }
  std::optional<double> residual;
  if (j.contains("residual")) residual = j.at("residual").get<double>();
  return TokenDistribution::from_entries(std::move(entries), residual);
}

std::string Prompt::id() const { return hex_digest(text); }

namespace {

int precedence(Connective c) {
  switch (c) {
    case Connective::Implies: return 1;
    case Connective::Or: return 2;
    case Connective::And: return 3;
    case Connective::Not: return 4;
    case Connective::Atom: return 5;
  }
  return 0;
}

constexpr std::string_view kOpen = "(";
constexpr std::string_view kClose = ")";

void pieces(const Formula& f, const logic::AtomRegistry& registry, std::vector<std::string>& out) {
  auto child = [&](const Formula& g, bool grouped) {
    if (grouped) out.emplace_back(kOpen);
    pieces(g, registry, out);
    if (grouped) out.emplace_back(kClose);
  };
  switch (f.connective()) {
    case Connective::Atom:
      out.push_back(registry.surface(f.atom_id()));
      return;
    case Connective::Not:
      out.emplace_back("it is not the case that");
      child(f.operand(), f.operand().is_binary());
      return;
    case Connective::And:
    case Connective::Or: {
      const int p = precedence(f.connective());
      child(f.left(), precedence(f.left().connective()) < p);
      out.emplace_back(f.connective() == Connective::And ? "and" : "or");
      child(f.right(), precedence(f.right().connective()) <= p);
      return;
    }
    case Connective::Implies:
      out.emplace_back("if");
      child(f.left(), f.left().connective() == Connective::Implies);
      out.emplace_back("then");
      child(f.right(), false);
      return;
  }
}

// Joins pieces with spaces; each group marker becomes a comma on the
// preceding word when there is text on both sides of it.
std::string join(const std::vector<std::string>& in) {
  std::vector<std::string> words;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const bool marker = in[i] == kOpen || in[i] == kClose;
    if (!marker) {
      words.push_back(in[i]);
      continue;
    }
    bool text_follows = false;
    for (std::size_t k = i + 1; k < in.size() && !text_follows; ++k)
      text_follows = in[k] != kOpen && in[k] != kClose;
    if (!words.empty() && text_follows && words.back().back() != ',') words.back().push_back(',');
  }
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

}  // namespace

std::string render(const Formula& f, const logic::AtomRegistry& registry) {
  logic::require_registered(f, registry);
  std::vector<std::string> out;
  pieces(f, registry, out);
  return join(out);
}

Prompt build_prompt(const Formula& f, const logic::AtomRegistry& registry, std::string_view template_id) {
  logic::require_registered(f, registry);
  std::vector<std::string> out{"Is it the case that"};
  pieces(f, registry, out);
  std::string text = join(out) + "?";
  if (template_id == templates::kForceBinary) {
    text += " Answer yes or no.";
  } else if (template_id != templates::kDefault) {
    throw Error(ErrorCode::InvalidArgument, "unknown prompt template '" + std::string(template_id) + "'");
  }
  return {std::move(text), std::string(template_id)};
}

BackendError::BackendError(ErrorCode code, std::string prompt_id, const std::string& message)
    : Error(code, message + " (prompt " + prompt_id + ")"), prompt_id_(std::move(prompt_id)) {}

SequenceProbability sequence_probability(const Backend& backend, const Prompt& prompt,
                                         std::span<const std::string> tokens) {
  if (tokens.empty()) throw Error(ErrorCode::InvalidArgument, "token sequence must be non-empty");
  SequenceProbability out;
  out.exact = 1;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const TokenDistribution d = backend.next_token_distribution(prompt, tokens.first(i));
    if (auto p = d.probability(tokens[i])) {
      out.exact *= exact_from_double(std::min(*p, 1.0));
      continue;
    }
    const double bound = std::min(d.residual, 1.0);
    out.exact *= exact_from_double(bound);
    out.approximate = bound > 0.0;
    if (out.approximate) out.bounded_at = TokenSequence(tokens.begin(), tokens.begin() + i);
    break;
  }
  out.value = to_double(out.exact);
  return out;
}

TokenDistribution CachingBackend::next_token_distribution(const Prompt& prompt,
                                                          std::span<const std::string> prefix) const {
  auto key = std::pair{prompt.text, TokenSequence(prefix.begin(), prefix.end())};
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  TokenDistribution d = inner_.next_token_distribution(prompt, prefix);
  std::lock_guard lock(mutex_);
  return cache_.emplace(std::move(key), std::move(d)).first->second;
}

}  // namespace credo::backend
