#include "credo/backend/mock.hpp"

#include <fstream>

namespace credo::backend {

MockBackend::MockBackend(std::string name, bool strict) : id_(std::move(name)), strict_(strict) {}

void MockBackend::script(const std::string& prompt_text, TokenSequence prefix, TokenDistribution distribution) {
  distribution.validate();
  script_.insert_or_assign({prompt_text, std::move(prefix)}, std::move(distribution));
}

void MockBackend::set_tokenization(std::string surface, TokenSequence tokens) {
  if (tokens.empty()) throw Error(ErrorCode::InvalidArgument, "tokenization of '" + surface + "' is empty");
  tokenizer_.insert_or_assign(std::move(surface), std::move(tokens));
}

TokenDistribution MockBackend::next_token_distribution(const Prompt& prompt, std::span<const std::string> prefix) const {
  auto it = script_.find({prompt.text, TokenSequence(prefix.begin(), prefix.end())});
  if (it != script_.end()) return it->second;
  if (strict_) {
    std::string ctx;
    for (const auto& t : prefix) ctx += t;
    throw BackendError(ErrorCode::UnscriptedContext, prompt.id(),
                       "no scripted distribution for \"" + prompt.text + "\" + \"" + ctx + "\"");
  }
  return TokenDistribution{{}, 1.0};
}

TokenSequence MockBackend::tokenize(std::string_view surface) const {
  if (auto it = tokenizer_.find(surface); it != tokenizer_.end()) return it->second;
  return {std::string(surface)};
}

MockBackend MockBackend::from_json(const nlohmann::json& j) {
  try {
    MockBackend mock(j.value("backend_id", std::string("mock")), j.value("strict", true));
    if (j.contains("tokenizer"))
      for (const auto& [surface, tokens] : j.at("tokenizer").items())
        mock.set_tokenization(surface, tokens.get<TokenSequence>());
    for (const auto& ctx : j.value("contexts", nlohmann::json::array())) {
      TokenSequence prefix = ctx.value("prefix", TokenSequence{});
      nlohmann::json dist = {{"entries", ctx.at("distribution")}};
      if (ctx.contains("residual")) dist["residual"] = ctx.at("residual");
      mock.script(ctx.at("prompt").get<std::string>(), std::move(prefix), distribution_from_json(dist));
    }
    return mock;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("mock script: ") + e.what());
  }
}

MockBackend MockBackend::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open mock script " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, path.string() + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json MockBackend::to_json() const {
  nlohmann::json contexts = nlohmann::json::array();
  for (const auto& [key, d] : script_)
    contexts.push_back({{"prompt", key.first}, {"prefix", key.second}, {"distribution", d.entries}, {"residual", d.residual}});
  nlohmann::json tokenizer = nlohmann::json::object();
  for (const auto& [surface, tokens] : tokenizer_) tokenizer[surface] = tokens;
  return {{"backend_id", id_}, {"strict", strict_}, {"tokenizer", tokenizer}, {"contexts", contexts}};
}

}  // namespace credo::backend
