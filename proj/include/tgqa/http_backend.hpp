#pragma once

#include <string>

#include "tgqa/backend.hpp"

namespace tgqa {

// Client for completion-style endpoints that can echo prompt tokens with
// log-probs. Request body: {model, prompt, max_tokens, temperature,
// logprobs, echo}. Failed requests are retried up to max_retries times with
// doubling backoff; 401/403 responses fail at once with AuthFailure.
class HttpBackend : public Backend {
 public:
  // `url` is "http://host[:port][/path]"; the path defaults to "/".
  HttpBackend(std::string url, BackendSpec spec);

  std::string generate(const std::string& prompt, const GenerateParams& params) override;
  std::vector<TokenScore> scoreContinuation(const std::string& prompt,
                                            const std::string& continuation) override;
  std::string name() const override { return "http"; }

 private:
  std::string post(const std::string& body);

  std::string base_;
  std::string path_;
  BackendSpec spec_;
};

}  // namespace tgqa
