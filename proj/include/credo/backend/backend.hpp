#pragma once

#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "credo/error.hpp"
#include "credo/exact.hpp"
#include "credo/logic/formula.hpp"
#include "credo/logic/registry.hpp"

namespace credo::backend {

// Tolerance on sum(entries) + residual around 1.
inline constexpr double kNormTolerance = 1e-6;

using TokenSequence = std::vector<std::string>;

// Next-token distribution as served: an itemized head plus the mass that was
// not itemized.
struct TokenDistribution {
  std::map<std::string, double> entries;
  double residual = 0.0;

  // residual defaults to 1 - sum(entries), clamped at 0. Validates.
  static TokenDistribution from_entries(std::map<std::string, double> entries,
                                        std::optional<double> residual = std::nullopt);

  // Throws NormalizationViolation on negative mass or a total outside
  // [1 - kNormTolerance, 1 + kNormTolerance].
  void validate() const;

  std::optional<double> probability(const std::string& token) const;

  // Highest-probability entries, ties broken by token.
  std::vector<std::pair<std::string, double>> head(std::size_t n) const;

  friend bool operator==(const TokenDistribution&, const TokenDistribution&) = default;
};

nlohmann::json to_json(const TokenDistribution& d);
TokenDistribution distribution_from_json(const nlohmann::json& j);

namespace templates {
inline constexpr std::string_view kDefault = "default";
// Appends an instruction to answer yes or no.
inline constexpr std::string_view kForceBinary = "force-binary";
}  // namespace templates

struct Prompt {
  std::string text;
  std::string template_id;

  // Stable short digest of the text, used to tag errors and records.
  std::string id() const;

  friend bool operator==(const Prompt&, const Prompt&) = default;
};

// English rendering of a formula: atoms by surface, `!` as "it is not the
// case that", `&`/`|` as "and"/"or", `->` as "if ... then ...", and
// grouping parentheses as comma clauses. Throws Unrenderable.
std::string render(const logic::Formula& f, const logic::AtomRegistry& registry);

// "Is it the case that <render(f)>?" for the default template.
Prompt build_prompt(const logic::Formula& f, const logic::AtomRegistry& registry,
                    std::string_view template_id = templates::kDefault);

// Raised by backends; carries the prompt it was serving.
class BackendError : public Error {
 public:
  BackendError(ErrorCode code, std::string prompt_id, const std::string& message);
  const std::string& prompt_id() const noexcept { return prompt_id_; }

 private:
  std::string prompt_id_;
};

// Source of next-token probabilities. Implementations must be safe to call
// concurrently.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string id() const = 0;

  // Distribution over the token following prompt.text + concat(prefix).
  virtual TokenDistribution next_token_distribution(const Prompt& prompt, std::span<const std::string> prefix) const = 0;

  // Canonical tokenization of a surface string.
  virtual TokenSequence tokenize(std::string_view surface) const = 0;
};

struct SequenceProbability {
  Exact exact{0};
  double value = 0.0;
  // Some token was not itemized and its conditional was bounded by the
  // residual, so `value` is an upper bound.
  bool approximate = false;
  // Prefix whose residual bounded the missing token. Missing tokens sharing a
  // context share its residual, so callers summing several sequences count
  // each bounding context once.
  std::optional<TokenSequence> bounded_at;
};

// Chain rule: product of P(s_i | prompt, s_1..s_{i-1}). Once a token is
// missing from an itemized head, the residual bounds it and the remaining
// factors (each <= 1) are dropped.
SequenceProbability sequence_probability(const Backend& backend, const Prompt& prompt,
                                         std::span<const std::string> tokens);

// Decorator that memoizes next_token_distribution per (prompt, prefix).
class CachingBackend final : public Backend {
 public:
  explicit CachingBackend(const Backend& inner) : inner_(inner) {}

  std::string id() const override { return inner_.id(); }
  TokenDistribution next_token_distribution(const Prompt& prompt, std::span<const std::string> prefix) const override;
  TokenSequence tokenize(std::string_view surface) const override { return inner_.tokenize(surface); }

 private:
  const Backend& inner_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<std::string, TokenSequence>, TokenDistribution> cache_;
};

}  // namespace credo::backend
