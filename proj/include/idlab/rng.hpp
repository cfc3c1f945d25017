#pragma once

#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <string_view>
#include <utility>

namespace idlab {

/// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Order-sensitive stable hash of a list of words.
std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) noexcept;

/// FNV-1a over bytes, finalized with mix64.
std::uint64_t hash_string(std::string_view text) noexcept;

/// Counter-based random stream. Output n is mix64(key + n * golden), so a
/// stream is fully described by (key, counter) and identical seeds give the
/// same sequence on every platform. `split(tag)` derives the child stream
/// seeded by hash(seed, tag); children do not depend on how far the parent
/// has been consumed.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  /// Uniform on (0, 1).
  double uniform_open() noexcept;
  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept;

  double normal() noexcept;
  /// Standard Laplace (location 0, scale 1).
  double laplace() noexcept;
  /// Gamma(shape, 1), Marsaglia-Tsang with the U^{1/a} boost for shape < 1.
  double gamma(double shape) noexcept;
  double beta(double a, double b) noexcept;

  RngStream split(std::uint64_t tag) const noexcept;

  template <class RandomIt>
  void shuffle(RandomIt first, RandomIt last) noexcept {
    auto n = static_cast<std::uint64_t>(std::distance(first, last));
    for (std::uint64_t i = n; i > 1; --i) {
      std::uint64_t j = below(i);
      using std::swap;
      swap(first[static_cast<std::ptrdiff_t>(i - 1)], first[static_cast<std::ptrdiff_t>(j)]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace idlab
