#include "tgqa/http_backend.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "tgqa/error.hpp"

namespace tgqa {
namespace {

using nlohmann::json;

bool retryable(int status) { return status == 429 || status >= 500; }

const json& firstChoice(const json& body) {
  if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty()) {
    throw Error(ErrorCode::kBackendUnavailable, "response has no choices");
  }
  return body["choices"][0];
}

}  // namespace

HttpBackend::HttpBackend(std::string url, BackendSpec spec) : spec_(std::move(spec)) {
  constexpr std::string_view kScheme = "http://";
  if (!std::string_view(url).starts_with(kScheme)) {
    throw Error(ErrorCode::kConfigInvalid, "endpoint must be an http:// url: " + url);
  }
  const std::size_t slash = url.find('/', kScheme.size());
  if (slash == std::string::npos) {
    base_ = url;
    path_ = "/";
  } else {
    base_ = url.substr(0, slash);
    path_ = url.substr(slash);
  }
}

std::string HttpBackend::post(const std::string& body) {
  httplib::Client client(base_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(spec_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(spec_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (const char* key = std::getenv(spec_.auth_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  std::string last_error;
  ErrorCode last_code = ErrorCode::kBackendUnavailable;
  auto backoff = spec_.retry_backoff;
  for (int attempt = 0; attempt <= spec_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      const auto err = res.error();
      last_code = (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout)
                      ? ErrorCode::kTimeout
                      : ErrorCode::kBackendUnavailable;
      last_error = "request to " + base_ + path_ + " failed: " + httplib::to_string(err);
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      throw Error(ErrorCode::kAuthFailure, "endpoint rejected credentials (HTTP " +
                                               std::to_string(res->status) + ")");
    }
    if (res->status >= 200 && res->status < 300) return res->body;
    last_code = ErrorCode::kBackendUnavailable;
    last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
    if (!retryable(res->status)) break;
  }
  throw Error(last_code, last_error);
}

std::string HttpBackend::generate(const std::string& prompt, const GenerateParams& params) {
  json req = {{"model", spec_.model_name.value_or("")},
              {"prompt", prompt},
              {"max_tokens", params.max_tokens},
              {"temperature", params.temperature},
              {"logprobs", nullptr},
              {"echo", false}};
  json res;
  try {
    res = json::parse(post(req.dump()));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBackendUnavailable, std::string("malformed response: ") + e.what());
  }
  const json& choice = firstChoice(res);
  if (!choice.contains("text") || !choice["text"].is_string()) {
    throw Error(ErrorCode::kBackendUnavailable, "response choice has no text");
  }
  return choice["text"].get<std::string>();
}

std::vector<TokenScore> HttpBackend::scoreContinuation(const std::string& prompt,
                                                       const std::string& continuation) {
  json req = {{"model", spec_.model_name.value_or("")},
              {"prompt", prompt + continuation},
              {"max_tokens", 0},
              {"temperature", 0.0},
              {"logprobs", 0},
              {"echo", true}};
  json res;
  try {
    res = json::parse(post(req.dump()));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBackendUnavailable, std::string("malformed response: ") + e.what());
  }
  const json& choice = firstChoice(res);
  const json* lp = choice.contains("logprobs") ? &choice["logprobs"] : nullptr;
  if (!lp || !lp->is_object() || !lp->contains("tokens") || !lp->contains("token_logprobs") ||
      !lp->contains("text_offset")) {
    throw Error(ErrorCode::kNoLogprobSupport, "endpoint did not return echoed token logprobs");
  }
  const json& tokens = (*lp)["tokens"];
  const json& logprobs = (*lp)["token_logprobs"];
  const json& offsets = (*lp)["text_offset"];
  if (tokens.size() != logprobs.size() || tokens.size() != offsets.size()) {
    throw Error(ErrorCode::kBackendUnavailable, "logprob arrays differ in length");
  }
  std::vector<TokenScore> out;
  const std::size_t boundary = prompt.size();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string text = tokens[i].get<std::string>();
    const std::size_t offset = offsets[i].get<std::size_t>();
    if (offset + text.size() <= boundary) continue;
    if (!logprobs[i].is_number()) {
      throw Error(ErrorCode::kNoLogprobSupport, "continuation token without a logprob");
    }
    const std::string part = offset < boundary ? text.substr(boundary - offset) : text;
    out.push_back(TokenScore{part, std::min(0.0, logprobs[i].get<double>())});
  }
  if (out.empty()) throw Error(ErrorCode::kNoLogprobSupport, "no continuation tokens were scored");
  return out;
}

}  // namespace tgqa
