#include "httplib.h"

#include "credo/backend/http.hpp"

#include <cmath>
#include <cstdlib>
#include <regex>

#include "credo/backend/mock.hpp"

namespace credo::backend {

namespace {

std::chrono::milliseconds ms(long v) { return std::chrono::milliseconds(v); }

}  // namespace

BackendConfig backend_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  BackendConfig c;
  try {
    const std::string kind = j.value("kind", std::string("mock"));
    if (kind == "mock") {
      c.kind = BackendKind::Mock;
    } else if (kind == "http") {
      c.kind = BackendKind::Http;
    } else {
      throw Error(ErrorCode::InvalidArgument, "backend kind must be 'mock' or 'http', got '" + kind + "'");
    }
    c.endpoint = j.value("endpoint", std::string());
    c.top_k = j.value("top_k", c.top_k);
    c.timeout = ms(j.value("timeout_ms", static_cast<long>(c.timeout.count())));
    c.max_parallel = j.value("max_parallel", c.max_parallel);
    c.auth_env = j.value("auth_env", std::string());
    if (j.contains("mock_script")) {
      std::filesystem::path p = j.at("mock_script").get<std::string>();
      c.mock_script = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    }
    if (j.contains("id")) c.id = j.at("id").get<std::string>();
    if (j.contains("fields")) {
      const auto& f = j.at("fields");
      c.fields.prompt = f.value("prompt", c.fields.prompt);
      c.fields.max_tokens = f.value("max_tokens", c.fields.max_tokens);
      c.fields.logprobs = f.value("logprobs", c.fields.logprobs);
      c.fields.response_pointer = f.value("response_pointer", c.fields.response_pointer);
      c.fields.token = f.value("token", c.fields.token);
      c.fields.logprob = f.value("logprob", c.fields.logprob);
    }
    if (j.contains("extra_body")) c.extra_body = j.at("extra_body");
    if (j.contains("tokenizer"))
      for (const auto& [surface, tokens] : j.at("tokenizer").items()) c.tokenizer[surface] = tokens.get<TokenSequence>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("backend config: ") + e.what());
  }
  if (c.top_k < 1) throw Error(ErrorCode::InvalidArgument, "top_k must be positive");
  if (c.max_parallel < 1) throw Error(ErrorCode::InvalidArgument, "max_parallel must be positive");
  if (c.timeout.count() < 1) throw Error(ErrorCode::InvalidArgument, "timeout_ms must be positive");
  return c;
}

nlohmann::json to_json(const BackendConfig& c) {
  nlohmann::json j = {
      {"kind", c.kind == BackendKind::Mock ? "mock" : "http"},
      {"endpoint", c.endpoint},
      {"top_k", c.top_k},
      {"timeout_ms", c.timeout.count()},
      {"max_parallel", c.max_parallel},
      {"auth_env", c.auth_env},
      {"mock_script", c.mock_script.string()},
      {"fields",
       {{"prompt", c.fields.prompt},
        {"max_tokens", c.fields.max_tokens},
        {"logprobs", c.fields.logprobs},
        {"response_pointer", c.fields.response_pointer},
        {"token", c.fields.token},
        {"logprob", c.fields.logprob}}},
      {"extra_body", c.extra_body},
      {"tokenizer", c.tokenizer},
  };
  if (c.id) j["id"] = *c.id;
  return j;
}

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) {
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, url))
    throw Error(ErrorCode::InvalidArgument, "endpoint '" + config_.endpoint + "' is not an http(s) URL");
  scheme_host_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/";
  slots_ = std::make_unique<std::counting_semaphore<>>(config_.max_parallel);
}

std::string HttpBackend::id() const { return config_.id ? *config_.id : "http:" + config_.endpoint; }

TokenSequence HttpBackend::tokenize(std::string_view surface) const {
  if (auto it = config_.tokenizer.find(std::string(surface)); it != config_.tokenizer.end()) return it->second;
  return {std::string(surface)};
}

TokenDistribution HttpBackend::parse_response(const nlohmann::json& body, const Prompt& prompt) const {
  nlohmann::json::json_pointer pointer;
  try {
    pointer = nlohmann::json::json_pointer(config_.fields.response_pointer);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("response_pointer: ") + e.what());
  }
  if (!body.contains(pointer))
    throw BackendError(ErrorCode::Format, prompt.id(), "response has no " + config_.fields.response_pointer);
  const auto& node = body.at(pointer);

  std::map<std::string, double> entries;
  auto add = [&](const std::string& token, double logprob) {
    // Duplicate tokens keep the first occurrence.
    entries.emplace(token, std::exp(logprob));
  };
  try {
    if (node.is_object()) {
      for (const auto& [token, lp] : node.items()) add(token, lp.get<double>());
    } else if (node.is_array()) {
      for (const auto& item : node) {
        if (item.is_array()) {
          add(item.at(0).get<std::string>(), item.at(1).get<double>());
        } else {
          add(item.at(config_.fields.token).get<std::string>(), item.at(config_.fields.logprob).get<double>());
        }
      }
    } else {
      throw BackendError(ErrorCode::Format, prompt.id(), "logprob field is neither an array nor an object");
    }
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(ErrorCode::Format, prompt.id(), std::string("malformed logprobs: ") + e.what());
  }
  return TokenDistribution::from_entries(std::move(entries));
}

TokenDistribution HttpBackend::next_token_distribution(const Prompt& prompt, std::span<const std::string> prefix) const {
  std::string text = prompt.text;
  for (const auto& t : prefix) text += t;

  nlohmann::json request = config_.extra_body.is_object() ? config_.extra_body : nlohmann::json::object();
  request[config_.fields.prompt] = text;
  request[config_.fields.max_tokens] = 1;
  request[config_.fields.logprobs] = config_.top_k;

  httplib::Headers headers;
  if (!config_.auth_env.empty())
    if (const char* token = std::getenv(config_.auth_env.c_str()))
      headers.emplace("Authorization", std::string("Bearer ") + token);

  slots_->acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{*slots_};

  httplib::Client client(scheme_host_);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());

  const auto started = std::chrono::steady_clock::now();
  auto result = client.Post(path_, headers, request.dump(), "application/json");
  if (!result) {
    const auto elapsed = std::chrono::steady_clock::now() - started;
    const auto err = result.error();
    if (err == httplib::Error::ConnectionTimeout || (err == httplib::Error::Read && elapsed >= config_.timeout))
      throw BackendError(ErrorCode::Timeout, prompt.id(),
                         "request to " + config_.endpoint + " timed out after " +
                             std::to_string(config_.timeout.count()) + " ms");
    throw BackendError(ErrorCode::Network, prompt.id(),
                       "request to " + config_.endpoint + " failed: " + httplib::to_string(err));
  }
  if (result->status != 200)
    throw BackendError(ErrorCode::Network, prompt.id(),
                       "endpoint returned HTTP " + std::to_string(result->status));
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(result->body);
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(ErrorCode::Format, prompt.id(), std::string("response is not JSON: ") + e.what());
  }
  return parse_response(body, prompt);
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
  if (config.kind == BackendKind::Http) return std::make_unique<HttpBackend>(config);
  if (config.mock_script.empty()) throw Error(ErrorCode::InvalidArgument, "mock backend requires 'mock_script'");
  return std::make_unique<MockBackend>(MockBackend::load(config.mock_script));
}

std::optional<std::string> top_k_warning(const BackendConfig& config, std::size_t lexicon_entries) {
  if (static_cast<std::size_t>(config.top_k) >= lexicon_entries) return std::nullopt;
  return "top_k=" + std::to_string(config.top_k) + " is smaller than the " + std::to_string(lexicon_entries) +
         " lexicon entries; some assent/dissent mass may only be bounded by the residual";
}

}  // namespace credo::backend
