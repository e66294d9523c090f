#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bracketlab/modmath.hpp"
#include "bracketlab/rng.hpp"

using namespace bracketlab;

TEST_CASE("streams are deterministic per key") {
  Stream a(42, "role", 7), b(42, "role", 7);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct roles and ids give distinct streams") {
  Stream a(42, "role", 7), b(42, "role", 8), c(42, "other", 7);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 64; ++i) {
    if (a.next_u64() == b.next_u64()) ++same_ab;
    if (a.next_u64() == c.next_u64()) ++same_ac;
  }
  REQUIRE(same_ab == 0);
  REQUIRE(same_ac == 0);
}

TEST_CASE("uniform mean over 1e5 draws") {
  Stream s(123, "uniformity");
  const long long n = 100000;
  double sum = 0;
  for (long long i = 0; i < n; ++i) sum += s.next_unit();
  const double mean = sum / n;
  const double tol = 3.0 / std::sqrt(12.0 * n);
  REQUIRE(std::abs(mean - 0.5) < tol);
}

TEST_CASE("next_below stays in range and is roughly uniform") {
  Stream s(7, "below");
  const std::uint64_t bound = 10;
  long long counts[10] = {0};
  for (int i = 0; i < 100000; ++i) {
    std::uint64_t v = s.next_below(bound);
    REQUIRE(v < bound);
    ++counts[v];
  }
  for (long long c : counts) REQUIRE(std::abs(c - 10000) < 500);
}

TEST_CASE("gaussian moments") {
  Stream s(99, "gauss");
  const long long n = 100000;
  double sum = 0, sum2 = 0;
  for (long long i = 0; i < n; ++i) {
    double g = s.next_gaussian();
    sum += g;
    sum2 += g * g;
  }
  REQUIRE(std::abs(sum / n) < 4.0 / std::sqrt(double(n)));
  REQUIRE(std::abs(sum2 / n - 1.0) < 4.0 * std::sqrt(2.0 / double(n)));
}

TEST_CASE("prime generation") {
  Stream s(2024, "primes");
  for (int bits : {48, 53, 61}) {
    std::uint64_t q = random_prime(bits, s);
    REQUIRE(is_prime_u64(q));
    REQUIRE(q >= (1ull << (bits - 1)));
    REQUIRE(q < (1ull << bits));
  }
  REQUIRE_FALSE(is_prime_u64(1));
  REQUIRE(is_prime_u64(2));
  REQUIRE(is_prime_u64((1ull << 61) - 1));  // Mersenne
  REQUIRE_FALSE(is_prime_u64((1ull << 62) - 1));
}
