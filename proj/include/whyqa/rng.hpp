#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace whyqa {

// Seeded generator shared by every stochastic operation (splits, synthesis,
// FN sampling). std::mt19937_64's output sequence is fixed by the standard;
// the bounded draw and the shuffle below are defined here rather than taken
// from <random>'s distributions, whose algorithms vary between libraries.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform integer in [0, bound) by rejection sampling on the top of the
  // 64-bit range. bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  // Fisher-Yates, walking from the back: for i = n-1 .. 1, swap(i, below(i+1)).
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace whyqa
