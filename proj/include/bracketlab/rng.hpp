#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace bracketlab {

// All randomness in the library flows from a 64-bit master seed through
// named streams.  A stream is a counter-based generator keyed by
// hash(master, role, id0, id1); outputs depend only on the key and the
// counter, so replicas can be generated independently and in parallel
// with bit-identical results.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

inline std::uint64_t derive_key(std::uint64_t master, std::string_view role,
                                std::uint64_t id0 = 0, std::uint64_t id1 = 0) {
  std::uint64_t h = 0xCBF29CE484222325ull ^ master;
  for (char c : role) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  h = mix64(h);
  h = mix64(h ^ (id0 + kGolden));
  h = mix64(h ^ (id1 + 2 * kGolden));
  return h;
}

class Stream {
 public:
  explicit Stream(std::uint64_t key) : key_(key) {}
  Stream(std::uint64_t master, std::string_view role, std::uint64_t id0 = 0,
         std::uint64_t id1 = 0)
      : key_(derive_key(master, role, id0, id1)) {}

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64() { return mix64(key_ + (++ctr_) * kGolden); }

  // uniform on [0,1) with 53 random mantissa bits
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // unbiased uniform integer in [0, bound)
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
    for (;;) {
      std::uint64_t v = next_u64();
      if (v < limit) return v % bound;
    }
  }

  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // polar Box-Muller
    for (;;) {
      double u = 2.0 * next_unit() - 1.0;
      double v = 2.0 * next_unit() - 1.0;
      double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) {
        double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
      }
    }
  }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace bracketlab
