#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace eegcap {

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Folds a list of words into one seed: h = mix64(h ^ word) for each word,
/// starting from h = 0x9E3779B97F4A7C15.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> words);

/// Seeded generator with distributions implemented here rather than taken
/// from <random>, whose distribution algorithms differ between standard
/// libraries. The engine (mt19937_64) itself is fully specified.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via the Marsaglia polar method.
  double normal();
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace eegcap
