#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>

#include "credo/backend/backend.hpp"

namespace credo::backend {

// Deterministic scripted backend. A script maps (prompt text, prefix) to a
// distribution and optionally surfaces to token sequences; surfaces without
// a tokenization are a single token.
//
// Script file:
//   {"backend_id": "...", "strict": true,
//    "tokenizer": {"of course": ["of", " course"]},
//    "contexts": [{"prompt": "...", "prefix": [], "distribution": {...},
//                  "residual": 0.1}]}
class MockBackend final : public Backend {
 public:
  explicit MockBackend(std::string name = "mock", bool strict = true);

  static MockBackend from_json(const nlohmann::json& script);
  static MockBackend load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  void script(const std::string& prompt_text, TokenSequence prefix, TokenDistribution distribution);
  void set_tokenization(std::string surface, TokenSequence tokens);

  std::string id() const override { return id_; }
  TokenDistribution next_token_distribution(const Prompt& prompt, std::span<const std::string> prefix) const override;
  TokenSequence tokenize(std::string_view surface) const override;

 private:
  std::string id_;
  bool strict_;
  std::map<std::pair<std::string, TokenSequence>, TokenDistribution> script_;
  std::map<std::string, TokenSequence, std::less<>> tokenizer_;
};

}  // namespace credo::backend
