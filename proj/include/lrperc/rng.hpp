#pragma once

// Counter-based random streams. A stream is identified by a 64-bit key that is
// derived from a master seed and any number of integer stream coordinates
// (distance, edge endpoints, sweep index, replicate index...). Draw n of a
// stream is mix64(key ^ mix64(n * kGolden)), with mix64 the SplitMix64
// finalizer. Output depends only on (key, n), so results are identical on
// every platform and independent of thread scheduling.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace lrperc {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Hash of (seed, coords...) used as a stream key.
constexpr std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) {
  std::uint64_t k = mix64(seed + kGolden);
  std::uint64_t salt = 1;
  for (std::uint64_t c : coords) {
    k = mix64(k ^ mix64(c + salt * kGolden));
    ++salt;
  }
  return k;
}

class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) : key_(key), counter_(counter) {}
  CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> coords)
      : key_(derive_key(seed, coords)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix64(key_ ^ mix64(++counter_ * kGolden)); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1].
  double uniform_pos() { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

  // Exp(1) by inversion.
  double exponential() { return -std::log(uniform_pos()); }

  // Uniform integer in [0, n), Lemire's multiply-and-reject.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) return 0;
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Stream coordinates are unsigned; signed vertices are embedded bijectively.
constexpr std::uint64_t as_coord(std::int64_t v) { return static_cast<std::uint64_t>(v); }

}  // namespace lrperc
