#include "tgqa/mock_backend.hpp"

#include <array>
#include <cctype>

#include "tgqa/error.hpp"
#include "tgqa/text.hpp"

namespace tgqa {
namespace {

bool isSpace(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

constexpr std::array<std::string_view, 16> kFiller = {
    "the", "event", "time", "year", "before", "after", "started", "ended",
    "story", "graph", "answer", "during", "while", "then", "later", "early"};

}  // namespace

std::vector<std::string> mockTokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t start = i;
    while (i < text.size() && isSpace(text[i])) ++i;
    while (i < text.size() && !isSpace(text[i])) ++i;
    tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

double mockTokenLogprob(std::string_view token, std::uint64_t prefix_length, std::uint64_t seed) {
  const std::uint64_t h =
      splitmix64(fnv1a64(token) ^ splitmix64(prefix_length ^ splitmix64(seed)));
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  return -5.0 * u;
}

std::string MockBackend::generate(const std::string& prompt, const GenerateParams& params) {
  for (const auto& responder : responders_) {
    if (auto text = responder(prompt, params)) return *text;
  }
  std::uint64_t h = splitmix64(fnv1a64(prompt) ^ splitmix64(seed_ ^ splitmix64(params.seed)));
  const int n = std::min(params.max_tokens, 8 + static_cast<int>(h % 16));
  std::string out;
  for (int i = 0; i < n; ++i) {
    h = splitmix64(h);
    if (i > 0) out += ' ';
    out += kFiller[h % kFiller.size()];
  }
  return out;
}

std::vector<TokenScore> MockBackend::scoreContinuation(const std::string& prompt,
                                                       const std::string& continuation) {
  if (!logprobs_) throw Error(ErrorCode::kNoLogprobSupport, "mock configured without logprobs");
  if (continuation.empty()) throw Error(ErrorCode::kInvalidArgument, "empty continuation");
  std::optional<double> fixed;
  if (override_) fixed = override_(prompt, continuation);
  std::vector<TokenScore> out;
  std::uint64_t prefix = prompt.size();
  for (auto& token : mockTokenize(continuation)) {
    const double lp = fixed ? *fixed : mockTokenLogprob(token, prefix, seed_);
    prefix += token.size();
    out.push_back(TokenScore{std::move(token), lp});
  }
  return out;
}

}  // namespace tgqa
