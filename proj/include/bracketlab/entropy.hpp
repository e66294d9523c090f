#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "bracketlab/errors.hpp"

namespace bracketlab {

struct EntropyPoint {
  double delta = 0;
  double count = 1;  // construction bracket count at this delta (upper bound on N)
  double cap = 1;    // certified norm cap at this delta
};

struct EntropyCurve {
  std::vector<EntropyPoint> pts;  // deltas strictly decreasing
  std::optional<double> declared_rprime;
};

// evaluates the family construction along the delta grid
inline EntropyCurve entropy_curve(
    const std::function<std::pair<double, double>(double)>& count_and_cap,
    std::span<const double> delta_grid) {
  EntropyCurve curve;
  for (double d : delta_grid) {
    if (!(d > 0)) raise(Errc::DomainError, "delta grid must be positive");
    if (!curve.pts.empty() && d >= curve.pts.back().delta)
      raise(Errc::DomainError, "delta grid must be strictly decreasing");
    auto [count, cap] = count_and_cap(d);
    curve.pts.push_back({d, count, cap});
  }
  return curve;
}

inline double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0) raise(Errc::InsufficientCurve, "degenerate grid for slope fit");
  return (n * sxy - sx * sy) / denom;
}

struct IntegralCondition {
  bool converges = false;
  double numeric_integral_tail = 0;  // trapezoid value of the tail integral, informational
  double fitted_rprime = 0;
  double criterion_r_min = 0;  // condition holds for all r > criterion_r_min
  bool used_declared_rprime = false;
};

// Decides the finiteness of  int_0^1 eps^r sup_{eps<=delta<=1} N^2(delta) deps
// for the constructed covering.  The running supremum flattens any
// non-monotonicity; convergence is decided by the polynomial order of N.
inline IntegralCondition integral_condition(const EntropyCurve& curve, double r, double gamma) {
  if (curve.pts.size() < 4) raise(Errc::InsufficientCurve, "need at least 4 grid points");
  if (!(r > -1)) raise(Errc::DomainError, "need r > -1");
  if (!(gamma > 1)) raise(Errc::DomainError, "need gamma > 1");

  // running supremum over delta in [eps, 1] (grid is sorted decreasing)
  std::vector<double> sup_n(curve.pts.size());
  double run = 1.0;
  for (std::size_t i = 0; i < curve.pts.size(); ++i) {
    run = std::max(run, curve.pts[i].count);
    sup_n[i] = run;
  }

  IntegralCondition out;
  if (curve.declared_rprime) {
    out.fitted_rprime = *curve.declared_rprime;
    out.used_declared_rprime = true;
  } else {
    // tail exponent over the smallest decade of delta
    const double dmin = curve.pts.back().delta;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < curve.pts.size(); ++i) {
      if (curve.pts[i].delta <= 10.0 * dmin) {
        xs.push_back(curve.pts[i].delta);
        ys.push_back(sup_n[i]);
      }
    }
    if (xs.size() < 2) {
      for (std::size_t i = 0; i < curve.pts.size(); ++i) {
        xs.push_back(curve.pts[i].delta);
        ys.push_back(sup_n[i]);
      }
    }
    out.fitted_rprime = -fit_loglog_slope(xs, ys);
  }
  out.criterion_r_min = 2.0 * out.fitted_rprime - 1.0;
  out.converges = r > out.criterion_r_min;

  // trapezoid on [delta_min, 1] of eps^r sup_N^2, using the grid plus the
  // endpoint eps = 1 where the supremum equals its largest-delta value
  std::vector<double> eps_nodes, vals;
  eps_nodes.push_back(1.0);
  vals.push_back(std::pow(1.0, r) * sup_n.front() * sup_n.front());
  for (std::size_t i = 0; i < curve.pts.size(); ++i) {
    eps_nodes.push_back(curve.pts[i].delta);
    vals.push_back(std::pow(curve.pts[i].delta, r) * sup_n[i] * sup_n[i]);
  }
  double integral = 0;
  for (std::size_t i = 0; i + 1 < eps_nodes.size(); ++i)
    integral += 0.5 * (vals[i] + vals[i + 1]) * (eps_nodes[i] - eps_nodes[i + 1]);
  out.numeric_integral_tail = integral;
  return out;
}

// smallest integer p with p > (r+1) gamma / (gamma - max{2+a, 1})
inline int min_moment_order(double r, double gamma, double a) {
  const double cut = std::max(2.0 + a, 1.0);
  if (!(gamma > cut)) raise(Errc::GammaTooSmall, "need gamma > max{2+a, 1}");
  const double bound = (r + 1.0) * gamma / (gamma - cut);
  double p = std::floor(bound) + 1.0;
  if (p <= bound) p += 1.0;  // guard the strict inequality at integers
  return static_cast<int>(p);
}

// K with eps/4 <= 2^{-(q+K)} sqrt(n) <= eps/2:   floor(log2(4 sqrt(n) / (2^q eps)))
inline long long chaining_depth(double n, long long q, double eps) {
  if (!(n > 0) || !(eps > 0)) raise(Errc::DomainError, "need n > 0 and eps > 0");
  const double x = 4.0 * std::sqrt(n) / (std::ldexp(1.0, static_cast<int>(q)) * eps);
  if (!(x > 1.0)) raise(Errc::DomainError, "chaining depth undefined: 4 sqrt(n) <= 2^q eps");
  const double l = std::log2(x);
  long long K = static_cast<long long>(std::floor(l + 1e-12));
  // exactness guard around integer powers
  while (std::ldexp(1.0, static_cast<int>(K + 1)) <= x) ++K;
  while (K > 0 && std::ldexp(1.0, static_cast<int>(K)) > x) --K;
  return K;
}

}  // namespace bracketlab
