#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "bracketlab/errors.hpp"

namespace bracketlab {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

// Dense integer polynomials, little-endian coefficients.  Everything here
// is exact; sizes stay tiny (degree <= matrix dimension), so cpp_int
// performance is irrelevant.
struct IPoly {
  std::vector<BigInt> c;

  IPoly() = default;
  explicit IPoly(std::vector<BigInt> coeffs) : c(std::move(coeffs)) { trim(); }
  static IPoly constant(long long v) { return IPoly({BigInt(v)}); }
  static IPoly x() { return IPoly({BigInt(0), BigInt(1)}); }

  void trim() {
    while (!c.empty() && c.back() == 0) c.pop_back();
  }
  bool is_zero() const { return c.empty(); }
  int degree() const { return static_cast<int>(c.size()) - 1; }
  const BigInt& lead() const { return c.back(); }
  BigInt at(int i) const { return (i >= 0 && i < static_cast<int>(c.size())) ? c[i] : BigInt(0); }

  bool operator==(const IPoly& o) const { return c == o.c; }
};

inline IPoly add(const IPoly& a, const IPoly& b) {
  std::vector<BigInt> r(std::max(a.c.size(), b.c.size()), BigInt(0));
  for (std::size_t i = 0; i < a.c.size(); ++i) r[i] += a.c[i];
  for (std::size_t i = 0; i < b.c.size(); ++i) r[i] += b.c[i];
  return IPoly(std::move(r));
}

inline IPoly sub(const IPoly& a, const IPoly& b) {
  std::vector<BigInt> r(std::max(a.c.size(), b.c.size()), BigInt(0));
  for (std::size_t i = 0; i < a.c.size(); ++i) r[i] += a.c[i];
  for (std::size_t i = 0; i < b.c.size(); ++i) r[i] -= b.c[i];
  return IPoly(std::move(r));
}

inline IPoly mul(const IPoly& a, const IPoly& b) {
  if (a.is_zero() || b.is_zero()) return IPoly{};
  std::vector<BigInt> r(a.c.size() + b.c.size() - 1, BigInt(0));
  for (std::size_t i = 0; i < a.c.size(); ++i)
    for (std::size_t j = 0; j < b.c.size(); ++j) r[i + j] += a.c[i] * b.c[j];
  return IPoly(std::move(r));
}

inline IPoly scale(const IPoly& a, const BigInt& k) {
  IPoly r = a;
  for (auto& v : r.c) v *= k;
  r.trim();
  return r;
}

// quotient of an exact division; returns false if the division has a remainder
inline bool divide_exact(const IPoly& num, const IPoly& den, IPoly& quot) {
  if (den.is_zero()) return false;
  std::vector<BigInt> rem = num.c;
  const int dd = den.degree();
  if (num.degree() < dd) { quot = IPoly{}; return num.is_zero(); }
  std::vector<BigInt> q(num.degree() - dd + 1, BigInt(0));
  for (int i = num.degree(); i >= dd; --i) {
    BigInt& top = rem[i];
    if (top == 0) continue;
    if (top % den.lead() != 0) return false;
    BigInt f = top / den.lead();
    q[i - dd] = f;
    for (int j = 0; j <= dd; ++j) rem[i - dd + j] -= f * den.c[j];
  }
  for (const auto& v : rem)
    if (v != 0) return false;
  quot = IPoly(std::move(q));
  return true;
}

inline IPoly derivative(const IPoly& a) {
  if (a.degree() < 1) return IPoly{};
  std::vector<BigInt> r(a.c.size() - 1);
  for (std::size_t i = 1; i < a.c.size(); ++i) r[i - 1] = a.c[i] * BigInt(i);
  return IPoly(std::move(r));
}

inline BigInt content(const IPoly& a) {
  BigInt g = 0;
  for (const auto& v : a.c) g = boost::multiprecision::gcd(g, v);
  return g;
}

// primitive part with positive leading coefficient
inline IPoly primitive(const IPoly& a) {
  if (a.is_zero()) return a;
  BigInt g = content(a);
  if (a.lead() < 0) g = -g;
  IPoly r = a;
  for (auto& v : r.c) v /= g;
  return r;
}

inline BigRat eval_rat(const IPoly& a, const BigRat& x) {
  BigRat r = 0;
  for (int i = a.degree(); i >= 0; --i) r = r * x + BigRat(a.c[i]);
  return r;
}

inline BigInt eval_int(const IPoly& a, const BigInt& x) {
  BigInt r = 0;
  for (int i = a.degree(); i >= 0; --i) r = r * x + a.c[i];
  return r;
}

// x^deg * p(1/x)
inline IPoly reversal(const IPoly& a) {
  IPoly r = a;
  std::reverse(r.c.begin(), r.c.end());
  r.trim();
  return r;
}

namespace detail {

using RPoly = std::vector<BigRat>;

inline void rtrim(RPoly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

inline RPoly rmod(RPoly a, const RPoly& b) {
  while (a.size() >= b.size() && !a.empty()) {
    BigRat f = a.back() / b.back();
    std::size_t off = a.size() - b.size();
    for (std::size_t i = 0; i < b.size(); ++i) a[off + i] -= f * b[i];
    a.pop_back();
    rtrim(a);
  }
  return a;
}

inline RPoly to_rat(const IPoly& p) {
  RPoly r(p.c.size());
  for (std::size_t i = 0; i < p.c.size(); ++i) r[i] = BigRat(p.c[i]);
  return r;
}

inline BigRat reval(const RPoly& p, const BigRat& x) {
  BigRat r = 0;
  for (std::size_t i = p.size(); i-- > 0;) r = r * x + p[i];
  return r;
}

}  // namespace detail

// primitive gcd with positive leading coefficient
inline IPoly poly_gcd(const IPoly& a, const IPoly& b) {
  detail::RPoly x = detail::to_rat(a), y = detail::to_rat(b);
  while (!y.empty()) {
    detail::RPoly r = detail::rmod(x, y);
    x = std::move(y);
    y = std::move(r);
  }
  if (x.empty()) return IPoly{};
  // clear denominators
  BigInt lcm = 1;
  for (const auto& v : x) lcm = boost::multiprecision::lcm(lcm, boost::multiprecision::denominator(v));
  std::vector<BigInt> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    z[i] = boost::multiprecision::numerator(x[i]) * (lcm / boost::multiprecision::denominator(x[i]));
  return primitive(IPoly(std::move(z)));
}

// Yun's algorithm: p = prod_i out[i-1]^i with each factor squarefree
inline std::vector<IPoly> squarefree_decomposition(const IPoly& p_in) {
  std::vector<IPoly> out;
  IPoly p = primitive(p_in);
  if (p.degree() < 1) return out;
  IPoly dp = derivative(p);
  IPoly a = poly_gcd(p, dp);
  IPoly b, c, d;
  divide_exact(p, a, b);
  divide_exact(dp, a, c);
  d = sub(c, derivative(b));
  for (;;) {
    IPoly g = poly_gcd(b, d);
    out.push_back(g.degree() >= 1 ? primitive(g) : IPoly::constant(1));
    IPoly nb, nc;
    divide_exact(b, g, nb);
    if (nb.degree() < 1) break;
    divide_exact(d, g, nc);
    b = nb;
    d = sub(nc, derivative(b));
  }
  return out;
}

inline int euler_phi(int n) {
  int r = n;
  for (int p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      while (n % p == 0) n /= p;
      r -= r / p;
    }
  }
  if (n > 1) r -= r / n;
  return r;
}

// k-th cyclotomic polynomial via (x^k - 1) / prod_{d|k, d<k} cyclotomic(d)
inline IPoly cyclotomic(int k) {
  std::vector<BigInt> xk(k + 1, BigInt(0));
  xk[0] = -1;
  xk[k] = 1;
  IPoly num(std::move(xk));
  for (int d = 1; d < k; ++d) {
    if (k % d) continue;
    IPoly q;
    if (!divide_exact(num, cyclotomic(d), q)) raise(Errc::DomainError, "cyclotomic division failed");
    num = q;
  }
  return num;
}

// exact characteristic polynomial det(xI - A), Faddeev-LeVerrier
inline IPoly char_poly(const std::vector<long long>& a, int d) {
  std::vector<BigInt> M(static_cast<std::size_t>(d) * d, BigInt(0));
  std::vector<BigInt> A(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d * d; ++i) A[i] = a[i];
  for (int i = 0; i < d; ++i) M[i * d + i] = 1;
  std::vector<BigInt> coef(d + 1, BigInt(0));
  coef[d] = 1;
  for (int k = 1; k <= d; ++k) {
    std::vector<BigInt> AM(static_cast<std::size_t>(d) * d, BigInt(0));
    for (int i = 0; i < d; ++i)
      for (int l = 0; l < d; ++l)
        for (int j = 0; j < d; ++j) AM[i * d + j] += A[i * d + l] * M[l * d + j];
    BigInt tr = 0;
    for (int i = 0; i < d; ++i) tr += AM[i * d + i];
    coef[d - k] = -tr / k;
    M = AM;
    for (int i = 0; i < d; ++i) M[i * d + i] += coef[d - k];
  }
  return IPoly(std::move(coef));
}

// Sign-change count of the Sturm chain of a squarefree polynomial at x,
// used to count distinct real roots in an interval.
namespace detail {

inline int sign_of(const BigRat& v) { return v == 0 ? 0 : (v > 0 ? 1 : -1); }

inline int sturm_changes(const std::vector<RPoly>& chain, const BigRat& x) {
  int changes = 0, prev = 0;
  for (const auto& p : chain) {
    int s = sign_of(reval(p, x));
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++changes;
    prev = s;
  }
  return changes;
}

}  // namespace detail

// distinct real roots of squarefree p in the open interval (a, b);
// both endpoints must be non-roots
inline int count_real_roots_open(const IPoly& p, const BigRat& a, const BigRat& b) {
  if (p.degree() < 1) return 0;
  if (eval_rat(p, a) == 0 || eval_rat(p, b) == 0)
    raise(Errc::DomainError, "root-counting interval endpoint is a root");
  std::vector<detail::RPoly> chain;
  chain.push_back(detail::to_rat(p));
  chain.push_back(detail::to_rat(derivative(p)));
  while (!chain.back().empty()) {
    detail::RPoly r = detail::rmod(chain[chain.size() - 2], chain.back());
    for (auto& v : r) v = -v;
    detail::rtrim(r);
    if (r.empty()) break;
    chain.push_back(std::move(r));
  }
  return detail::sturm_changes(chain, a) - detail::sturm_changes(chain, b);
}

// For self-reciprocal g of even degree 2k, returns G with
// g(z) = z^k * G(z + 1/z).  Uses z^j + z^-j = C_j(w), C_0 = 2, C_1 = w,
// C_j = w C_{j-1} - C_{j-2}.
inline IPoly circle_transform(const IPoly& g) {
  const int deg = g.degree();
  if (deg % 2 != 0) raise(Errc::DomainError, "circle transform needs even degree");
  const int k = deg / 2;
  if (g != reversal(g)) raise(Errc::DomainError, "circle transform needs a self-reciprocal polynomial");
  IPoly G = IPoly::constant(0);
  IPoly c_prev = IPoly::constant(2);  // C_0
  IPoly c_cur = IPoly::x();           // C_1
  G = add(G, scale(IPoly::constant(1), g.at(k)));
  for (int j = 1; j <= k; ++j) {
    G = add(G, scale(c_cur, g.at(k + j)));
    if (j < k) {
      IPoly c_next = sub(mul(IPoly::x(), c_cur), c_prev);
      c_prev = c_cur;
      c_cur = c_next;
    }
  }
  return G;
}

// number of roots of squarefree q (no roots at +-1, constant term +-1)
// lying on the complex unit circle
inline int unit_circle_roots(const IPoly& q) {
  if (q.degree() < 1) return 0;
  IPoly g = poly_gcd(q, reversal(q));
  if (g.degree() < 1) return 0;
  if (g != reversal(g)) {
    // roots of the gcd are inversion-closed, so this only triggers on a
    // sign flip, which would force a root at 1
    raise(Errc::DomainError, "unexpected non-self-reciprocal gcd");
  }
  IPoly G = circle_transform(g);
  // roots of G in (-2, 2) correspond to conjugate pairs e^{+-i t}
  return 2 * count_real_roots_open(G, BigRat(-2), BigRat(2));
}

}  // namespace bracketlab
