#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>

#include "credo/backend/backend.hpp"

namespace credo::backend {

// Field names of the completion endpoint. Defaults describe a request
//   {"prompt": text, "max_tokens": 1, "logprobs": k}
// and a response whose `response_pointer` (a JSON pointer) names either an
// array of [token, logprob] pairs, an array of {token, logprob} objects, or
// an object mapping token to logprob.
struct HttpFields {
  std::string prompt = "prompt";
  std::string max_tokens = "max_tokens";
  std::string logprobs = "logprobs";
  std::string response_pointer = "/top_logprobs";
  std::string token = "token";
  std::string logprob = "logprob";
};

enum class BackendKind { Mock, Http };

struct BackendConfig {
  BackendKind kind = BackendKind::Mock;
  std::string endpoint;  // http: full URL of the completion route
  int top_k = 20;
  std::chrono::milliseconds timeout{30000};
  int max_parallel = 4;
  std::string auth_env;                    // environment variable holding a bearer token
  std::filesystem::path mock_script;       // mock only
  std::optional<std::string> id;           // overrides the derived backend id
  HttpFields fields;
  nlohmann::json extra_body = nlohmann::json::object();  // merged into each request
  std::map<std::string, TokenSequence> tokenizer;          // http: surface -> tokens
};

// Relative paths resolve against `base_dir`.
BackendConfig backend_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const BackendConfig& config);

// Completion-endpoint client. At most max_parallel requests are in flight
// across all callers.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(BackendConfig config);

  std::string id() const override;
  TokenDistribution next_token_distribution(const Prompt& prompt, std::span<const std::string> prefix) const override;
  TokenSequence tokenize(std::string_view surface) const override;

  // Converts a response body to a distribution (exp of logprobs, residual
  // 1 - sum). Exposed for tests.
  TokenDistribution parse_response(const nlohmann::json& body, const Prompt& prompt) const;

 private:
  BackendConfig config_;
  std::string scheme_host_;
  std::string path_;
  std::unique_ptr<std::counting_semaphore<>> slots_;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

// Warning text when top-k cannot itemize every lexicon entry.
std::optional<std::string> top_k_warning(const BackendConfig& config, std::size_t lexicon_entries);

}  // namespace credo::backend
