#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace tgqa {

struct TokenScore {
  std::string token;
  double logprob = 0.0;  // <= 0
};

struct GenerateParams {
  int max_tokens = 512;
  double temperature = 0.0;
  std::uint64_t seed = 0;
};

// Text generation plus forced-continuation scoring. Implementations are safe
// to share across threads.
class Backend {
 public:
  virtual ~Backend() = default;

  // Throws BackendUnavailable, Timeout or AuthFailure.
  virtual std::string generate(const std::string& prompt, const GenerateParams& params) = 0;

  // Per-token log-probs of `continuation` given `prompt`. The tokens
  // concatenate back to `continuation`. Throws NoLogprobSupport when the
  // backend cannot score.
  virtual std::vector<TokenScore> scoreContinuation(const std::string& prompt,
                                                    const std::string& continuation) = 0;

  virtual std::string name() const = 0;
};

struct BackendSpec {
  enum class Kind { kMock, kHttp };
  Kind kind = Kind::kMock;
  std::optional<std::string> endpoint_url;  // falls back to $TG_BACKEND_URL
  std::optional<std::string> model_name;
  std::string auth_env = "TG_BACKEND_KEY";
  int max_inflight = 4;
  std::chrono::milliseconds timeout{30000};
  int max_retries = 3;
  std::chrono::milliseconds retry_backoff{250};
  std::uint64_t mock_seed = 0;
};

// Throws ConfigInvalid for an http spec without any endpoint.
std::unique_ptr<Backend> makeBackend(const BackendSpec& spec);

// Applies fn to every element with at most `max_inflight` calls running at
// once. Results keep input order. If calls throw, the exception of the
// lowest failing index is rethrown after all workers finish.
template <typename T, typename Fn>
auto parallelMap(const std::vector<T>& items, int max_inflight, Fn&& fn)
    -> std::vector<decltype(fn(items.front()))> {
  using R = decltype(fn(items.front()));
  std::vector<std::optional<R>> slots(items.size());
  std::vector<std::exception_ptr> errors(items.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      try {
        slots[i].emplace(fn(items[i]));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads =
      std::min<std::size_t>(items.size(), static_cast<std::size_t>(std::max(1, max_inflight)));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(items.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace tgqa
