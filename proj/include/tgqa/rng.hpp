#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace tgqa {

// Seeded generator with platform-independent derived draws. std::mt19937_64's
// raw stream is fixed by the standard; the <random> distributions are not, so
// shuffles and uniform draws are implemented here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  // Uniform in [lo, hi].
  int between(int lo, int hi);
  // Uniform in [0, 1) with 53 random bits.
  double unit();
  bool bernoulli(double p) { return unit() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Derives a child seed for a named sub-stream, so per-sample randomness does
// not depend on processing order.
std::uint64_t deriveSeed(std::uint64_t seed, std::uint64_t stream);

}  // namespace tgqa
