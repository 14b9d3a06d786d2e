#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace eegdec::util {

// splitmix64 step; used to fold several seed components into one stream seed.
std::uint64_t splitmix64(std::uint64_t& state);

// Deterministic combination of seed parts, order-sensitive.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts);

// Deterministic RNG with portable derived distributions. std::mt19937_64 output
// is pinned by the standard; the distribution adaptors in <random> are not,
// so uniforms/normals/bounded ints are implemented here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller, one cached value per pair.
  double normal();

  // Unbiased draw from [0, n) by rejection.
  std::int64_t below(std::int64_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::int64_t i = static_cast<std::int64_t>(v.size()) - 1; i > 0; --i) {
      std::swap(v[static_cast<std::size_t>(i)],
                v[static_cast<std::size_t>(below(i + 1))]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// FNV-1a over raw bytes; used to key forest feature sampling by column content.
std::uint64_t fnv1a64(const void* data, std::size_t n_bytes);

}  // namespace eegdec::util
