#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bracketlab/errors.hpp"
#include "bracketlab/rng.hpp"

namespace bracketlab {

// Pseudo-inverse F^{-1}(t) = sup{ x in [lo,hi] : F(x) <= t } by monotone
// bisection; returns lo when F(lo) > t.  Handles infinite domain ends by
// exponential bracket expansion.
inline double pseudo_inverse(const std::function<double(double)>& cdf, double t, double lo,
                             double hi, double tol = 1e-12) {
  if (std::isnan(t)) raise(Errc::QuantileFailure, "quantile level is NaN");
  double a = lo, b = hi;
  if (a == -kInf) {
    a = -1;
    while (cdf(a) > t) {
      a *= 2;
      if (a < -1e300) return -kInf;
    }
  }
  if (cdf(a) > t) return -kInf;  // sup of the empty set
  if (b == kInf) {
    b = 1;
    while (cdf(b) <= t) {
      b *= 2;
      if (b > 1e300) return kInf;
    }
  } else if (cdf(b) <= t) {
    return b;
  }
  // invariant: cdf(a) <= t < cdf(b)
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    if (mid == a || mid == b) break;
    (cdf(mid) <= t ? a : b) = mid;
    if (b - a <= tol * std::max(1.0, std::abs(a))) break;
  }
  return a;
}

inline double gaussian_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

// Declared probability measure on R^d with marginal CDF access, a joint
// sampler, and the optional certificates the bracket constructions consume:
// a density bound B, tail parameters (b, beta) with mu(|x|>t) <= b t^{-1/beta},
// and modulus-of-continuity parameters (s, gamma, c) giving
// omega_F(x) <= c |log x|^{-s*gamma}.
struct DistributionHandle {
  enum class Kind { UniformCube, GaussianProduct };

  struct Modulus {
    double s = 1, gamma = 2, c = 1;
  };

  Kind kind = Kind::UniformCube;
  int dim = 1;
  double lo = 0, hi = 1;    // uniform cube bounds
  double mean = 0, sd = 1;  // gaussian product parameters
  std::optional<double> density_bound;
  std::optional<std::pair<double, double>> tail;  // (b, beta)
  std::optional<Modulus> modulus;

  static DistributionHandle uniform_cube(int dim, double lo = 0, double hi = 1) {
    DistributionHandle h;
    h.kind = Kind::UniformCube;
    h.dim = dim;
    h.lo = lo;
    h.hi = hi;
    h.density_bound = std::pow(1.0 / (hi - lo), dim);
    // omega_F(x) <= d * x / (hi-lo) <= c |log x|^{-2}; max of x log^2 x is 4/e^2
    DistributionHandle::Modulus m;
    m.s = 1;
    m.gamma = 2;
    m.c = dim * (4.0 * std::exp(-2.0)) / (hi - lo) * 1.01;
    h.modulus = m;
    h.tail = {std::max(std::abs(lo), std::abs(hi)) * std::sqrt(double(dim)) + 1.0, 1.0};
    return h;
  }

  static DistributionHandle gaussian_product(int dim, double mean = 0, double sd = 1) {
    DistributionHandle h;
    h.kind = Kind::GaussianProduct;
    h.dim = dim;
    h.mean = mean;
    h.sd = sd;
    const double b1 = 1.0 / (sd * std::sqrt(2.0 * M_PI));
    h.density_bound = std::pow(b1, dim);
    DistributionHandle::Modulus m;
    m.s = 1;
    m.gamma = 2;
    m.c = dim * b1 * (4.0 * std::exp(-2.0)) * 1.01;
    h.modulus = m;
    // beta = 1/2: sup_t t^2 P(|X| > t) is finite; scan a grid once
    double b = 1.0;
    for (double t = 0.5; t < 40 * sd + std::abs(mean); t *= 1.1) {
      const double z = (t - std::abs(mean)) / (sd * std::sqrt(double(dim)));
      const double tailp = std::min(1.0, 2.0 * dim * gaussian_cdf(-std::max(0.0, z)));
      b = std::max(b, t * t * tailp);
    }
    h.tail = {b * 1.05, 0.5};
    return h;
  }

  double marginal_cdf(int /*axis*/, double x) const {
    switch (kind) {
      case Kind::UniformCube: {
        if (x <= lo) return 0;
        if (x >= hi) return 1;
        return (x - lo) / (hi - lo);
      }
      case Kind::GaussianProduct:
        return gaussian_cdf((x - mean) / sd);
    }
    return 0;
  }

  double domain_lo() const { return kind == Kind::UniformCube ? lo : -kInf; }
  double domain_hi() const { return kind == Kind::UniformCube ? hi : kInf; }

  double marginal_quantile(int axis, double t) const {
    return pseudo_inverse([this, axis](double x) { return marginal_cdf(axis, x); }, t,
                          domain_lo(), domain_hi());
  }

  void sample(Stream& rng, std::span<double> out) const {
    switch (kind) {
      case Kind::UniformCube:
        for (auto& v : out) v = lo + (hi - lo) * rng.next_unit();
        return;
      case Kind::GaussianProduct:
        for (auto& v : out) v = mean + sd * rng.next_gaussian();
        return;
    }
  }

  std::vector<double> sample_vec(Stream& rng) const {
    std::vector<double> out(dim);
    sample(rng, out);
    return out;
  }

  // mu([-t, t]^d), used for the tail truncation levels
  double box_cdf(double t) const {
    double p = 1;
    for (int i = 0; i < dim; ++i) p *= std::max(0.0, marginal_cdf(i, t) - marginal_cdf(i, -t));
    return p;
  }

  static DistributionHandle from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("type"))
      raise(Errc::ConfigError, "mu: expected an object with a \"type\" field");
    const std::string type = j.at("type").get<std::string>();
    const int dim = j.value("dim", 1);
    DistributionHandle h;
    if (type == "uniform") {
      h = uniform_cube(dim, j.value("lo", 0.0), j.value("hi", 1.0));
    } else if (type == "gaussian") {
      h = gaussian_product(dim, j.value("mean", 0.0), j.value("sd", 1.0));
    } else {
      raise(Errc::ConfigError, "mu.type must be \"uniform\" or \"gaussian\"");
    }
    if (j.contains("density_bound")) h.density_bound = j.at("density_bound").get<double>();
    if (j.contains("tail_b") && j.contains("tail_beta"))
      h.tail = {j.at("tail_b").get<double>(), j.at("tail_beta").get<double>()};
    return h;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["type"] = kind == Kind::UniformCube ? "uniform" : "gaussian";
    j["dim"] = dim;
    if (kind == Kind::UniformCube) {
      j["lo"] = lo;
      j["hi"] = hi;
    } else {
      j["mean"] = mean;
      j["sd"] = sd;
    }
    if (density_bound) j["density_bound"] = *density_bound;
    if (tail) {
      j["tail_b"] = tail->first;
      j["tail_beta"] = tail->second;
    }
    return j;
  }
};

// one-sided Kolmogorov-Smirnov self check of the sampler against the
// declared marginal CDFs; returns the max discrepancy over all axes
inline double ks_self_test(const DistributionHandle& h, long long n, std::uint64_t seed) {
  Stream rng(seed, "ks-self-test");
  std::vector<std::vector<double>> cols(h.dim, std::vector<double>(n));
  std::vector<double> pt(h.dim);
  for (long long i = 0; i < n; ++i) {
    h.sample(rng, pt);
    for (int k = 0; k < h.dim; ++k) cols[k][i] = pt[k];
  }
  double worst = 0;
  for (int k = 0; k < h.dim; ++k) {
    auto& c = cols[k];
    std::sort(c.begin(), c.end());
    for (long long i = 0; i < n; ++i) {
      const double F = h.marginal_cdf(k, c[i]);
      worst = std::max(worst, std::abs(F - double(i + 1) / n));
      worst = std::max(worst, std::abs(F - double(i) / n));
    }
  }
  return worst;
}

}  // namespace bracketlab
