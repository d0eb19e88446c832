#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tgqa/backend.hpp"

namespace tgqa {

// Splits text into tokens of leading whitespace followed by a run of
// non-whitespace bytes; trailing whitespace forms its own token. The tokens
// concatenate back to the input.
std::vector<std::string> mockTokenize(std::string_view text);

// The mock's published additive score:
//   u = splitmix64(fnv1a64(token) ^ splitmix64(prefix_length ^ splitmix64(seed))) / 2^64
//   logprob = -5 * u        (top 53 bits used for u)
// prefix_length counts the bytes of prompt plus preceding continuation.
double mockTokenLogprob(std::string_view token, std::uint64_t prefix_length, std::uint64_t seed);

// Deterministic offline backend. Generation asks each responder in turn and
// falls back to hash-derived filler text; scoring uses mockTokenLogprob
// unless a score override claims the request.
class MockBackend : public Backend {
 public:
  using Responder =
      std::function<std::optional<std::string>(const std::string& prompt, const GenerateParams&)>;
  // Returns a per-token log-prob used for every token of the continuation.
  using ScoreOverride =
      std::function<std::optional<double>(const std::string& prompt, const std::string& continuation)>;

  explicit MockBackend(std::uint64_t seed = 0) : seed_(seed) {}

  // Configure before sharing across threads.
  void addResponder(Responder responder) { responders_.push_back(std::move(responder)); }
  void setScoreOverride(ScoreOverride fn) { override_ = std::move(fn); }
  void setLogprobSupport(bool enabled) { logprobs_ = enabled; }

  std::string generate(const std::string& prompt, const GenerateParams& params) override;
  std::vector<TokenScore> scoreContinuation(const std::string& prompt,
                                            const std::string& continuation) override;
  std::string name() const override { return "mock"; }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::vector<Responder> responders_;
  ScoreOverride override_;
  bool logprobs_ = true;
};

}  // namespace tgqa
