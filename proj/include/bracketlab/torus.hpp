#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bracketlab/errors.hpp"
#include "bracketlab/intpoly.hpp"
#include "bracketlab/modmath.hpp"
#include "bracketlab/rng.hpp"

namespace bracketlab {

struct SpectralClassification {
  bool ergodic = false;
  bool hyperbolic = false;
  int neutral_degree = 0;
  std::vector<long long> char_poly;  // little-endian, monic
};

namespace detail {

inline std::vector<long long> poly_to_i64(const IPoly& p) {
  std::vector<long long> out(p.c.size());
  for (std::size_t i = 0; i < p.c.size(); ++i) {
    if (p.c[i] > std::numeric_limits<long long>::max() || p.c[i] < std::numeric_limits<long long>::min())
      raise(Errc::DomainError, "characteristic polynomial coefficient overflows int64");
    out[i] = p.c[i].convert_to<long long>();
  }
  return out;
}

// strips all factors (x - r) for r in {1, -1}; returns the multiplicity
inline int strip_linear_root(IPoly& p, long long r) {
  int mult = 0;
  IPoly lin({BigInt(-r), BigInt(1)});
  IPoly q;
  while (p.degree() >= 1 && eval_int(p, BigInt(r)) == 0 && divide_exact(p, lin, q)) {
    p = q;
    ++mult;
  }
  return mult;
}

}  // namespace detail

// Spectral classification of an integer unimodular matrix.
//
// ergodic        <=> no cyclotomic polynomial divides the characteristic
//                    polynomial (only k with phi(k) <= d can divide).
// neutral_degree  =  number of eigenvalues of modulus one, counted with
//                    algebraic multiplicity; this bounds the largest
//                    Jordan block on the neutral subspace from above.
// hyperbolic     <=> neutral_degree == 0.
//
// Eigenvalues on the unit circle are detected exactly: any unit-modulus
// root of an integer factor with constant term +-1 forces the factor to be
// self-reciprocal, and for self-reciprocal g the substitution w = z + 1/z
// turns circle roots into real roots of an integer polynomial in (-2, 2),
// countable by Sturm chains.
inline SpectralClassification classify(const std::vector<long long>& matrix, int dim) {
  if (dim < 1 || static_cast<std::size_t>(dim) * dim != matrix.size())
    raise(Errc::DimensionMismatch, "matrix must be d x d");
  IPoly p = char_poly(matrix, dim);
  const BigInt det = ((dim % 2) ? -p.at(0) : p.at(0));
  if (det != 1 && det != -1) raise(Errc::NotUnimodular, "|det| must be 1");

  SpectralClassification cls;
  cls.char_poly = detail::poly_to_i64(p);

  cls.ergodic = true;
  for (int k = 1; k <= 2 * dim * dim + 1; ++k) {
    if (euler_phi(k) > dim) continue;
    IPoly q;
    if (divide_exact(p, cyclotomic(k), q)) {
      cls.ergodic = false;
      break;
    }
  }

  IPoly body = p;
  int neutral = detail::strip_linear_root(body, 1);
  neutral += detail::strip_linear_root(body, -1);
  if (body.degree() >= 1) {
    auto sqf = squarefree_decomposition(body);
    for (std::size_t i = 0; i < sqf.size(); ++i) {
      if (sqf[i].degree() < 1) continue;
      neutral += static_cast<int>(i + 1) * unit_circle_roots(sqf[i]);
    }
  }
  cls.neutral_degree = neutral;
  cls.hyperbolic = (neutral == 0);
  return cls;
}

class TorusAutomorphism {
 public:
  static TorusAutomorphism make(std::vector<long long> matrix, int dim) {
    if (dim < 2) raise(Errc::DomainError, "torus dimension must be >= 2");
    TorusAutomorphism t;
    t.dim_ = dim;
    t.cls_ = classify(matrix, dim);  // raises NotUnimodular when |det| != 1
    t.matrix_ = std::move(matrix);
    const long long c0 = t.cls_.char_poly.front();
    t.det_sign_ = static_cast<int>((dim % 2) ? -c0 : c0);
    return t;
  }

  int dim() const { return dim_; }
  int det_sign() const { return det_sign_; }
  long long entry(int i, int j) const { return matrix_[static_cast<std::size_t>(i) * dim_ + j]; }
  const std::vector<long long>& matrix() const { return matrix_; }
  const SpectralClassification& classification() const { return cls_; }

 private:
  int dim_ = 0;
  int det_sign_ = 1;
  std::vector<long long> matrix_;
  SpectralClassification cls_;
};

struct RationalTorusPoint {
  std::vector<std::uint64_t> num;  // 0 <= num[i] < den
  std::uint64_t den = 1;

  int dim() const { return static_cast<int>(num.size()); }
};

// long double keeps 64-bit integers exact, so the quotient lands within
// one double ulp of the true rational
inline double rational_to_double(std::uint64_t num, std::uint64_t den) {
  return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

inline std::vector<double> to_doubles(const RationalTorusPoint& x) {
  std::vector<double> out(x.num.size());
  for (std::size_t i = 0; i < x.num.size(); ++i) out[i] = rational_to_double(x.num[i], x.den);
  return out;
}

namespace detail {

// matrix entries reduced into [0, q); keeps the hot loop in u64/u128
inline std::vector<std::uint64_t> matrix_mod(const TorusAutomorphism& t, std::uint64_t q) {
  const int d = t.dim();
  std::vector<std::uint64_t> m(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d * d; ++i) {
    long long e = t.matrix()[i] % static_cast<long long>(q);
    if (e < 0) e += static_cast<long long>(q);
    m[i] = static_cast<std::uint64_t>(e);
  }
  return m;
}

inline void step_inplace(std::span<const std::uint64_t> amod, int d, std::uint64_t q,
                         std::span<const std::uint64_t> in, std::span<std::uint64_t> out) {
  for (int i = 0; i < d; ++i) {
    u128 acc = 0;
    const std::uint64_t* row = amod.data() + static_cast<std::size_t>(i) * d;
    for (int j = 0; j < d; ++j) acc += u128(row[j]) * in[j];
    out[i] = static_cast<std::uint64_t>(acc % q);
  }
}

}  // namespace detail

// one exact application of x -> Ax mod 1; the denominator never changes
inline RationalTorusPoint step(const TorusAutomorphism& t, const RationalTorusPoint& x) {
  if (x.dim() != t.dim()) raise(Errc::DimensionMismatch, "point dimension != matrix dimension");
  auto amod = detail::matrix_mod(t, x.den);
  RationalTorusPoint y;
  y.den = x.den;
  y.num.resize(x.num.size());
  detail::step_inplace(amod, t.dim(), x.den, x.num, y.num);
  return y;
}

// positions x0, Tx0, ..., T^{n-1}x0 as doubles, row-major n x d.
// The dynamics run on exact rationals; floats are produced only on output.
inline std::vector<double> orbit(const TorusAutomorphism& t, const RationalTorusPoint& x0, long long n) {
  if (n < 1) raise(Errc::DomainError, "orbit length must be >= 1");
  if (x0.dim() != t.dim()) raise(Errc::DimensionMismatch, "point dimension != matrix dimension");
  const int d = t.dim();
  const std::uint64_t q = x0.den;
  auto amod = detail::matrix_mod(t, q);
  std::vector<double> out(static_cast<std::size_t>(n) * d);
  std::vector<std::uint64_t> cur = x0.num, nxt(d);
  for (long long k = 0; k < n; ++k) {
    for (int i = 0; i < d; ++i)
      out[static_cast<std::size_t>(k) * d + i] = rational_to_double(cur[i], q);
    if (k + 1 < n) {
      detail::step_inplace(amod, d, q, cur, nxt);
      std::swap(cur, nxt);
    }
  }
  return out;
}

struct OrbitConfig {
  long long length = 1;
  long long replicas = 1;
  int denominator_bits = 61;
  std::uint64_t master_seed = 0;
};

inline std::uint64_t orbit_denominator(const OrbitConfig& cfg) {
  if (cfg.denominator_bits < 48) raise(Errc::DomainError, "denominator_bits must be >= 48");
  Stream s(cfg.master_seed, "torus-denominator");
  return random_prime(cfg.denominator_bits, s);
}

// Lebesgue-like initial point: numerators uniform in [0, q), reproducible
// per (master_seed, replica_id)
inline RationalTorusPoint sample_initial(const OrbitConfig& cfg, int dim, long long replica_id) {
  if (cfg.length < 1 || cfg.replicas < 1) raise(Errc::DomainError, "length and replicas must be >= 1");
  if (replica_id < 0 || replica_id >= cfg.replicas) raise(Errc::DomainError, "replica_id out of range");
  RationalTorusPoint x;
  x.den = orbit_denominator(cfg);
  x.num.resize(dim);
  Stream s(cfg.master_seed, "torus-initial", static_cast<std::uint64_t>(replica_id));
  for (int i = 0; i < dim; ++i) x.num[i] = s.next_below(x.den);
  return x;
}

// i.i.d. uniform points on [0,1]^d, the reference case for diagnostics
inline std::vector<double> iid_baseline(int dim, long long n, std::uint64_t seed) {
  if (n < 1) raise(Errc::DomainError, "n must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(n) * dim);
  Stream s(seed, "iid-baseline");
  for (auto& v : out) v = s.next_unit();
  return out;
}

}  // namespace bracketlab
