#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "bracketlab/errors.hpp"

namespace bracketlab {

enum class Metric { Euclidean, Torus };

// Geometric index sets for bracket constructions.  Regions are immutable
// after construction; all queries are pure.
//
// ClampEllipsoidUnion(cell, r)        = union of Ellip(x, r) over x in cell
//   (membership: sum_k clampdist(y_k, cell_k)^2 / r_k^2 <= 1)
// ClampEllipsoidIntersection(cell, r) = intersection of the same family
//   (membership: sum_k fardist(y_k, cell_k)^2 / r_k^2 <= 1)
// SublevelBall(center, t)             = { x : dist(center, x) <= t }
struct SetRegion {
  enum class Kind {
    Empty,
    Full,
    Rectangle,
    Ball,
    Ellipsoid,
    ClampEllipsoidUnion,
    ClampEllipsoidIntersection,
    SublevelBall,
    Complement,
  };

  Kind kind = Kind::Empty;
  Metric metric = Metric::Euclidean;
  int dim = 0;
  std::vector<double> lo, hi;      // Rectangle bounds / clamp cell
  std::vector<double> center;      // Ball / Ellipsoid / SublevelBall
  std::vector<double> semi;        // semi-axes; Ball and SublevelBall use semi[0]
  std::shared_ptr<const SetRegion> inner;  // Complement payload

  static SetRegion empty(int dim, Metric m = Metric::Euclidean) {
    SetRegion r;
    r.kind = Kind::Empty;
    r.dim = dim;
    r.metric = m;
    return r;
  }

  static SetRegion full(int dim, Metric m = Metric::Euclidean) {
    SetRegion r;
    r.kind = Kind::Full;
    r.dim = dim;
    r.metric = m;
    return r;
  }

  static SetRegion rectangle(std::vector<double> lo, std::vector<double> hi,
                             Metric m = Metric::Euclidean) {
    const int d = static_cast<int>(lo.size());
    bool unbounded = true;
    for (int k = 0; k < d; ++k) {
      if (!(lo[k] <= hi[k])) return empty(d, m);
      if (lo[k] != -kInf || hi[k] != kInf) unbounded = false;
    }
    if (unbounded) return full(d, m);
    SetRegion r;
    r.kind = Kind::Rectangle;
    r.dim = d;
    r.metric = m;
    r.lo = std::move(lo);
    r.hi = std::move(hi);
    return r;
  }

  static SetRegion ball(std::vector<double> center, double radius, Metric m = Metric::Euclidean) {
    const int d = static_cast<int>(center.size());
    if (radius < 0) return empty(d, m);
    SetRegion r;
    r.kind = Kind::Ball;
    r.dim = d;
    r.metric = m;
    r.center = std::move(center);
    r.semi = {radius};
    return r;
  }

  // any negative semi-axis means the empty set
  static SetRegion ellipsoid(std::vector<double> center, std::vector<double> semi,
                             Metric m = Metric::Euclidean) {
    const int d = static_cast<int>(center.size());
    for (double s : semi)
      if (s < 0) return empty(d, m);
    SetRegion r;
    r.kind = Kind::Ellipsoid;
    r.dim = d;
    r.metric = m;
    r.center = std::move(center);
    r.semi = std::move(semi);
    return r;
  }

  static SetRegion clamp_union(std::vector<double> cell_lo, std::vector<double> cell_hi,
                               std::vector<double> semi, Metric m = Metric::Euclidean) {
    const int d = static_cast<int>(cell_lo.size());
    for (double s : semi)
      if (s < 0) return empty(d, m);
    for (int k = 0; k < d; ++k)
      if (!(cell_lo[k] <= cell_hi[k])) return empty(d, m);
    SetRegion r;
    r.kind = Kind::ClampEllipsoidUnion;
    r.dim = d;
    r.metric = m;
    r.lo = std::move(cell_lo);
    r.hi = std::move(cell_hi);
    r.semi = std::move(semi);
    return r;
  }

  static SetRegion clamp_intersection(std::vector<double> cell_lo, std::vector<double> cell_hi,
                                      std::vector<double> semi, Metric m = Metric::Euclidean) {
    const int d = static_cast<int>(cell_lo.size());
    for (double s : semi)
      if (s < 0) return empty(d, m);
    double feas = 0;
    for (int k = 0; k < d; ++k) {
      if (!(cell_lo[k] <= cell_hi[k])) return empty(d, m);
      const double hw = 0.5 * (cell_hi[k] - cell_lo[k]);
      if (semi[k] == 0) {
        if (hw > 0) return empty(d, m);
      } else {
        feas += (hw / semi[k]) * (hw / semi[k]);
      }
    }
    if (feas > 1) return empty(d, m);
    SetRegion r;
    r.kind = Kind::ClampEllipsoidIntersection;
    r.dim = d;
    r.metric = m;
    r.lo = std::move(cell_lo);
    r.hi = std::move(cell_hi);
    r.semi = std::move(semi);
    return r;
  }

  static SetRegion sublevel_ball(std::vector<double> center, double t, Metric m = Metric::Euclidean) {
    const int d = static_cast<int>(center.size());
    if (t < 0) return empty(d, m);
    if (t == kInf) return full(d, m);
    SetRegion r;
    r.kind = Kind::SublevelBall;
    r.dim = d;
    r.metric = m;
    r.center = std::move(center);
    r.semi = {t};
    return r;
  }

  static SetRegion complement(SetRegion r) {
    if (r.kind == Kind::Empty) return full(r.dim, r.metric);
    if (r.kind == Kind::Full) return empty(r.dim, r.metric);
    if (r.kind == Kind::Complement) return *r.inner;
    SetRegion c;
    c.kind = Kind::Complement;
    c.dim = r.dim;
    c.metric = r.metric;
    c.inner = std::make_shared<const SetRegion>(std::move(r));
    return c;
  }

  bool is_empty() const { return kind == Kind::Empty; }
};

namespace geo {

// ---- scalar ellipsoid projection machinery (axis-aligned, centered) ----

// squared level of w relative to {sum (y_k/r_k)^2 <= 1}; +inf if a flat
// axis is violated
inline double ellipsoid_level(std::span<const double> w, std::span<const double> r) {
  double s = 0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (r[k] == 0) {
      if (w[k] != 0) return kInf;
    } else {
      const double t = w[k] / r[k];
      s += t * t;
    }
  }
  return s;
}

// Euclidean distance from w to the solid ellipsoid; optionally returns the
// projected point.  Exact up to the scalar root tolerance.
inline double ellipsoid_outer_distance(std::span<const double> w, std::span<const double> r,
                                       double* proj = nullptr) {
  const std::size_t d = w.size();
  double fixed = 0;
  double level = 0;
  bool any_active = false;
  for (std::size_t k = 0; k < d; ++k) {
    if (r[k] == 0) {
      fixed += w[k] * w[k];
    } else {
      any_active = true;
      const double t = w[k] / r[k];
      level += t * t;
    }
  }
  if (!any_active || level <= 1.0) {
    if (proj)
      for (std::size_t k = 0; k < d; ++k) proj[k] = (r[k] == 0) ? 0.0 : w[k];
    return std::sqrt(fixed);
  }
  // solve F(t) = sum w^2 r^2 / (r^2+t)^2 = 1 on t > 0 (F is decreasing)
  auto F = [&](double t) {
    double s = 0;
    for (std::size_t k = 0; k < d; ++k) {
      if (r[k] == 0) continue;
      const double den = r[k] * r[k] + t;
      const double q = w[k] * r[k] / den;
      s += q * q;
    }
    return s;
  };
  double t_lo = 0, t_hi = 1e-30;
  double wmax = 0, rmax = 0;
  for (std::size_t k = 0; k < d; ++k) {
    wmax = std::max(wmax, std::abs(w[k]));
    rmax = std::max(rmax, r[k]);
  }
  t_hi = std::max(wmax * rmax, rmax * rmax) + 1e-300;
  while (F(t_hi) > 1.0) t_hi *= 2;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (t_lo + t_hi);
    if (mid == t_lo || mid == t_hi) break;
    (F(mid) > 1.0 ? t_lo : t_hi) = mid;
    if (t_hi - t_lo <= 1e-15 * (1.0 + t_hi)) break;
  }
  const double t = 0.5 * (t_lo + t_hi);
  double dist2 = fixed;
  for (std::size_t k = 0; k < d; ++k) {
    if (r[k] == 0) {
      if (proj) proj[k] = 0.0;
      continue;
    }
    const double den = r[k] * r[k] + t;
    const double gap = w[k] * t / den;
    dist2 += gap * gap;
    if (proj) proj[k] = w[k] * r[k] * r[k] / den;
  }
  return std::sqrt(dist2);
}

// distance from an interior point w to the ellipsoid surface
inline double ellipsoid_inner_distance(std::span<const double> w_in, std::span<const double> r) {
  const std::size_t d = w_in.size();
  for (std::size_t k = 0; k < d; ++k)
    if (r[k] == 0) return 0.0;  // flat ellipsoid: no interior
  // The map w -> distance is 1-Lipschitz, so snapping negligible components
  // to zero is harmless and keeps the scalar root away from its poles.
  double scale = 0;
  for (std::size_t k = 0; k < d; ++k) scale = std::max(scale, std::max(std::abs(w_in[k]), r[k]));
  std::vector<double> w(w_in.begin(), w_in.end());
  for (auto& v : w)
    if (std::abs(v) < 1e-13 * scale) v = 0.0;
  double rmin = kInf;
  bool w_zero = true;
  for (std::size_t k = 0; k < d; ++k) {
    rmin = std::min(rmin, r[k]);
    if (w[k] != 0) w_zero = false;
  }
  if (w_zero) return rmin;

  auto F = [&](double t) {
    double s = 0;
    for (std::size_t k = 0; k < d; ++k) {
      const double den = r[k] * r[k] + t;
      const double q = w[k] * r[k] / den;
      s += q * q;
    }
    return s;
  };
  // smooth KKT branch: unique root of F(t)=1 in (t_lo, 0]
  double t_lo = kInf;
  for (std::size_t k = 0; k < d; ++k)
    if (w[k] != 0) t_lo = std::min(t_lo, r[k] * r[k]);
  t_lo = -t_lo;
  double a = t_lo, b = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    if (mid == a || mid == b) break;
    (F(mid) > 1.0 ? a : b) = mid;
    if (b - a <= 1e-15 * (1.0 - t_lo)) break;
  }
  const double t = 0.5 * (a + b);
  double best = kInf;
  {
    // accept the smooth branch only if its projected point verifies the
    // surface equation; near-pole roots lose all precision
    double dist2 = 0, level = 0;
    bool valid = true;
    for (std::size_t k = 0; k < d; ++k) {
      const double den = r[k] * r[k] + t;
      if (den <= 0) {
        if (w[k] != 0) valid = false;
        continue;
      }
      const double yk = w[k] * r[k] * r[k] / den;
      const double gap = w[k] * t / den;
      dist2 += gap * gap;
      level += (yk / r[k]) * (yk / r[k]);
    }
    if (valid && std::abs(level - 1.0) < 1e-6) best = std::sqrt(dist2);
  }

  // degenerate branches: axes with w_k = 0 allow surface points with
  // y_k != 0 at t = -r_k^2
  for (std::size_t k = 0; k < d; ++k) {
    if (w[k] != 0) continue;
    const double tk = -r[k] * r[k];
    bool ok = true;
    double S = 0, dist2 = 0;
    for (std::size_t j = 0; j < d; ++j) {
      if (j == k) continue;
      if (w[j] == 0) continue;
      const double den = r[j] * r[j] + tk;
      if (den <= 0) { ok = false; break; }
      const double yj = w[j] * r[j] * r[j] / den;
      S += (yj / r[j]) * (yj / r[j]);
      const double gj = w[j] - yj;
      dist2 += gj * gj;
    }
    if (!ok || S > 1.0) continue;
    dist2 += r[k] * r[k] * (1.0 - S);
    best = std::min(best, std::sqrt(dist2));
  }
  if (best == kInf) {
    // all branches rejected (corner configuration): fall back to the radial
    // and axis-aligned surface crossings, both attained distances
    double lvl = 0, norm = 0;
    for (std::size_t k = 0; k < d; ++k) {
      lvl += (w[k] / r[k]) * (w[k] / r[k]);
      norm += w[k] * w[k];
    }
    norm = std::sqrt(norm);
    if (lvl > 0) best = (1.0 / std::sqrt(lvl) - 1.0) * norm;
    for (std::size_t k = 0; k < d; ++k) best = std::min(best, r[k] - std::abs(w[k]));
    best = std::max(0.0, best);
  }
  return best;
}

inline double clamp_residual(double x, double lo, double hi) {
  if (x < lo) return x - lo;
  if (x > hi) return x - hi;
  return 0.0;
}

inline double far_residual(double x, double lo, double hi) {
  return std::max(std::abs(x - lo), std::abs(x - hi));
}

// support-function minimization for the inner boundary distance of a
// Minkowski sum cell (+) ellipsoid:  d(x, boundary) = min_{|u|=1} h(u) - x.u
struct UnionInnerProblem {
  std::span<const double> lo, hi, semi, x;

  double eval(std::span<const double> u) const {
    double lin = 0, quad = 0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double c = 0.5 * (lo[k] + hi[k]);
      const double hw = 0.5 * (hi[k] - lo[k]);
      lin += (c - x[k]) * u[k] + hw * std::abs(u[k]);
      quad += semi[k] * semi[k] * u[k] * u[k];
    }
    return lin + std::sqrt(quad);
  }
};

inline double golden_min(const std::function<double(double)>& f, double a, double b, int iters = 80) {
  const double gr = 0.6180339887498949;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - gr * (b - a); f1 = f(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + gr * (b - a); f2 = f(x2);
    }
  }
  return std::min(f1, f2);
}

inline double union_inner_distance(std::span<const double> lo, std::span<const double> hi,
                                   std::span<const double> semi, std::span<const double> x) {
  const std::size_t d = x.size();
  if (d == 1) return std::min(x[0] - (lo[0] - semi[0]), (hi[0] + semi[0]) - x[0]);
  UnionInnerProblem prob{lo, hi, semi, x};
  if (d == 2) {
    auto fang = [&](double th) {
      const double u[2] = {std::cos(th), std::sin(th)};
      return prob.eval(std::span<const double>(u, 2));
    };
    const int n = 512;
    double best = kInf, best_th = 0;
    const double two_pi = 2.0 * M_PI;
    for (int i = 0; i < n; ++i) {
      const double th = two_pi * i / n;
      const double v = fang(th);
      if (v < best) { best = v; best_th = th; }
    }
    const double h = two_pi / n;
    return golden_min(fang, best_th - h, best_th + h);
  }
  // d >= 3: coarse sphere scan plus local coordinate refinement in angles
  auto fsph = [&](const std::vector<double>& ang) {
    std::vector<double> u(d);
    double s = 1.0;
    for (std::size_t k = 0; k + 1 < d; ++k) {
      u[k] = s * std::cos(ang[k]);
      s *= std::sin(ang[k]);
    }
    u[d - 1] = s;
    return prob.eval(u);
  };
  const int steps = 24;
  std::vector<double> ang(d - 1, 0.0), best_ang(d - 1, 0.0);
  double best = kInf;
  std::vector<int> idx(d - 1, 0);
  for (;;) {
    for (std::size_t k = 0; k + 1 < d; ++k)
      ang[k] = (k + 2 == d ? 2.0 * M_PI : M_PI) * idx[k] / steps;
    const double v = fsph(ang);
    if (v < best) { best = v; best_ang = ang; }
    std::size_t k = 0;
    for (; k + 1 < d; ++k) {
      if (++idx[k] < steps) break;
      idx[k] = 0;
    }
    if (k + 1 == d) break;
  }
  // cyclic golden refinement
  double width = M_PI / steps;
  for (int round = 0; round < 6; ++round) {
    for (std::size_t k = 0; k + 1 < d; ++k) {
      auto f1 = [&](double a) {
        std::vector<double> t = best_ang;
        t[k] = a;
        return fsph(t);
      };
      const double a0 = best_ang[k];
      double lo_a = a0 - width, hi_a = a0 + width;
      const double gr = 0.6180339887498949;
      double x1 = hi_a - gr * (hi_a - lo_a), x2 = lo_a + gr * (hi_a - lo_a);
      double v1 = f1(x1), v2 = f1(x2);
      for (int it = 0; it < 40; ++it) {
        if (v1 < v2) { hi_a = x2; x2 = x1; v2 = v1; x1 = hi_a - gr * (hi_a - lo_a); v1 = f1(x1); }
        else { lo_a = x1; x1 = x2; v1 = v2; x2 = lo_a + gr * (hi_a - lo_a); v2 = f1(x2); }
      }
      best_ang[k] = (v1 < v2) ? x1 : x2;
      best = std::min(best, std::min(v1, v2));
    }
    width *= 0.5;
  }
  return best;
}

}  // namespace geo

namespace detail_region {

inline bool member_euclid(std::span<const double> x, const SetRegion& r);
inline double outer_euclid(std::span<const double> x, const SetRegion& r);
inline double inner_euclid(std::span<const double> x, const SetRegion& r);

inline bool member_euclid(std::span<const double> x, const SetRegion& r) {
  switch (r.kind) {
    case SetRegion::Kind::Empty: return false;
    case SetRegion::Kind::Full: return true;
    case SetRegion::Kind::Rectangle:
      for (int k = 0; k < r.dim; ++k)
        if (x[k] < r.lo[k] || x[k] > r.hi[k]) return false;
      return true;
    case SetRegion::Kind::Ball: {
      double s = 0;
      for (int k = 0; k < r.dim; ++k) {
        const double t = x[k] - r.center[k];
        s += t * t;
      }
      return s <= r.semi[0] * r.semi[0];
    }
    case SetRegion::Kind::Ellipsoid: {
      std::vector<double> w(r.dim);
      for (int k = 0; k < r.dim; ++k) w[k] = x[k] - r.center[k];
      return geo::ellipsoid_level(w, r.semi) <= 1.0;
    }
    case SetRegion::Kind::ClampEllipsoidUnion: {
      double s = 0;
      for (int k = 0; k < r.dim; ++k) {
        const double cdk = geo::clamp_residual(x[k], r.lo[k], r.hi[k]);
        if (r.semi[k] == 0) {
          if (cdk != 0) return false;
        } else {
          const double t = cdk / r.semi[k];
          s += t * t;
        }
      }
      return s <= 1.0;
    }
    case SetRegion::Kind::ClampEllipsoidIntersection: {
      double s = 0;
      for (int k = 0; k < r.dim; ++k) {
        const double fd = geo::far_residual(x[k], r.lo[k], r.hi[k]);
        if (r.semi[k] == 0) {
          if (fd != 0) return false;
        } else {
          const double t = fd / r.semi[k];
          s += t * t;
        }
      }
      return s <= 1.0;
    }
    case SetRegion::Kind::SublevelBall: {
      double s = 0;
      for (int k = 0; k < r.dim; ++k) {
        const double t = x[k] - r.center[k];
        s += t * t;
      }
      return std::sqrt(s) <= r.semi[0];
    }
    case SetRegion::Kind::Complement:
      return !member_euclid(x, *r.inner) || inner_euclid(x, *r.inner) == 0.0;
  }
  return false;
}

inline double outer_euclid(std::span<const double> x, const SetRegion& r) {
  switch (r.kind) {
    case SetRegion::Kind::Empty: return kInf;
    case SetRegion::Kind::Full: return 0.0;
    case SetRegion::Kind::Rectangle: {
      double s = 0;
      for (int k = 0; k < r.dim; ++k) {
        double t = 0;
        if (x[k] < r.lo[k]) t = r.lo[k] - x[k];
        else if (x[k] > r.hi[k]) t = x[k] - r.hi[k];
        s += t * t;
      }
      return std::sqrt(s);
    }
    case SetRegion::Kind::Ball: {
      double s = 0;
      for (int k = 0; k < r.dim; ++k) {
        const double t = x[k] - r.center[k];
        s += t * t;
      }
      return std::max(0.0, std::sqrt(s) - r.semi[0]);
    }
    case SetRegion::Kind::Ellipsoid: {
      std::vector<double> w(r.dim);
      for (int k = 0; k < r.dim; ++k) w[k] = x[k] - r.center[k];
      return geo::ellipsoid_outer_distance(w, r.semi);
    }
    case SetRegion::Kind::ClampEllipsoidUnion: {
      // clamp first: the union is the Minkowski sum cell + ellipsoid, and
      // the ellipsoid distance is coordinatewise monotone in |w|
      std::vector<double> w(r.dim);
      for (int k = 0; k < r.dim; ++k) w[k] = geo::clamp_residual(x[k], r.lo[k], r.hi[k]);
      return geo::ellipsoid_outer_distance(w, r.semi);
    }
    case SetRegion::Kind::ClampEllipsoidIntersection: {
      // candidate projections onto the corner ellipsoids; fall back to
      // Dykstra alternating projections when no candidate verifies
      const int d = r.dim;
      std::vector<double> w(d), proj(d), y(d);
      double best = kInf;
      const unsigned corners = 1u << d;
      for (unsigned mask = 0; mask < corners; ++mask) {
        for (int k = 0; k < d; ++k) {
          const double corner = (mask >> k & 1) ? r.hi[k] : r.lo[k];
          w[k] = x[k] - corner;
        }
        const double dist = geo::ellipsoid_outer_distance(w, r.semi, proj.data());
        if (dist >= best) continue;
        for (int k = 0; k < d; ++k) {
          const double corner = (mask >> k & 1) ? r.hi[k] : r.lo[k];
          y[k] = corner + proj[k];
        }
        // verify against the far-corner membership form with a small slack
        double lvl = 0;
        for (int k = 0; k < d; ++k) {
          const double fd = geo::far_residual(y[k], r.lo[k], r.hi[k]);
          if (r.semi[k] == 0) { lvl = fd == 0 ? lvl : kInf; continue; }
          lvl += (fd / r.semi[k]) * (fd / r.semi[k]);
        }
        if (lvl <= 1.0 + 1e-9) best = dist;
      }
      if (best < kInf) return best;
      // Dykstra over the corner ellipsoids
      std::vector<double> p(x.begin(), x.end());
      std::vector<std::vector<double>> incr(corners, std::vector<double>(d, 0.0));
      for (int round = 0; round < 400; ++round) {
        double moved = 0;
        for (unsigned mask = 0; mask < corners; ++mask) {
          for (int k = 0; k < d; ++k) {
            const double corner = (mask >> k & 1) ? r.hi[k] : r.lo[k];
            w[k] = p[k] + incr[mask][k] - corner;
          }
          geo::ellipsoid_outer_distance(w, r.semi, proj.data());
          for (int k = 0; k < d; ++k) {
            const double corner = (mask >> k & 1) ? r.hi[k] : r.lo[k];
            const double np = corner + proj[k];
            incr[mask][k] = p[k] + incr[mask][k] - np;
            moved += std::abs(np - p[k]);
            p[k] = np;
          }
        }
        if (moved < 1e-13) break;
      }
      double s = 0;
      for (int k = 0; k < d; ++k) {
        const double t = p[k] - x[k];
        s += t * t;
      }
      return std::sqrt(s);
    }
    case SetRegion::Kind::SublevelBall: {
      double s = 0;
      for (int k = 0; k < r.dim; ++k) {
        const double t = x[k] - r.center[k];
        s += t * t;
      }
      return std::max(0.0, std::sqrt(s) - r.semi[0]);
    }
    case SetRegion::Kind::Complement:
      return member_euclid(x, *r.inner) ? inner_euclid(x, *r.inner) : 0.0;
  }
  return kInf;
}

// distance from a member point to the region boundary
inline double inner_euclid(std::span<const double> x, const SetRegion& r) {
  switch (r.kind) {
    case SetRegion::Kind::Empty: return 0.0;
    case SetRegion::Kind::Full: return kInf;
    case SetRegion::Kind::Rectangle: {
      double m = kInf;
      for (int k = 0; k < r.dim; ++k)
        m = std::min(m, std::min(x[k] - r.lo[k], r.hi[k] - x[k]));
      return std::max(0.0, m);
    }
    case SetRegion::Kind::Ball: {
      double s = 0;
      for (int k = 0; k < r.dim; ++k) {
        const double t = x[k] - r.center[k];
        s += t * t;
      }
      return std::max(0.0, r.semi[0] - std::sqrt(s));
    }
    case SetRegion::Kind::Ellipsoid: {
      std::vector<double> w(r.dim);
      for (int k = 0; k < r.dim; ++k) w[k] = x[k] - r.center[k];
      return geo::ellipsoid_inner_distance(w, r.semi);
    }
    case SetRegion::Kind::ClampEllipsoidUnion:
      return std::max(0.0, geo::union_inner_distance(r.lo, r.hi, r.semi, x));
    case SetRegion::Kind::ClampEllipsoidIntersection: {
      // complement of an intersection is a union: exact via corner ellipsoids
      const int d = r.dim;
      std::vector<double> w(d);
      double best = kInf;
      for (unsigned mask = 0; mask < (1u << d); ++mask) {
        for (int k = 0; k < d; ++k) {
          const double corner = (mask >> k & 1) ? r.hi[k] : r.lo[k];
          w[k] = x[k] - corner;
        }
        best = std::min(best, geo::ellipsoid_inner_distance(w, r.semi));
      }
      return best;
    }
    case SetRegion::Kind::SublevelBall: {
      double s = 0;
      for (int k = 0; k < r.dim; ++k) {
        const double t = x[k] - r.center[k];
        s += t * t;
      }
      return std::max(0.0, r.semi[0] - std::sqrt(s));
    }
    case SetRegion::Kind::Complement:
      return outer_euclid(x, *r.inner);
  }
  return 0.0;
}

// enumerate lattice shifts x + s, s in {-1,0,1}^d
template <typename Fn>
inline void for_each_shift(std::span<const double> x, int dim, Fn&& fn) {
  std::vector<double> y(x.begin(), x.end());
  std::vector<int> s(dim, -1);
  for (;;) {
    for (int k = 0; k < dim; ++k) y[k] = x[k] + s[k];
    fn(std::span<const double>(y.data(), y.size()));
    int k = 0;
    for (; k < dim; ++k) {
      if (++s[k] <= 1) break;
      s[k] = -1;
    }
    if (k == dim) return;
  }
}

}  // namespace detail_region

inline void check_finite(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) raise(Errc::NonFiniteInput, "point has a non-finite coordinate");
}

inline bool member(std::span<const double> x, const SetRegion& r) {
  if (r.kind == SetRegion::Kind::Empty) return false;
  if (r.kind == SetRegion::Kind::Full) return true;
  if (r.metric == Metric::Euclidean) return detail_region::member_euclid(x, r);
  if (r.kind == SetRegion::Kind::Complement) {
    // on the torus the complement region is everything outside the single
    // covering translate of the inner body (diameters stay below 1/2)
    bool interior = false;
    detail_region::for_each_shift(x, r.dim, [&](std::span<const double> y) {
      if (!interior && detail_region::member_euclid(y, *r.inner) &&
          detail_region::inner_euclid(y, *r.inner) > 0)
        interior = true;
    });
    return !interior;
  }
  bool any = false;
  detail_region::for_each_shift(x, r.dim, [&](std::span<const double> y) {
    if (!any && detail_region::member_euclid(y, r)) any = true;
  });
  return any;
}

// d_R(x) = inf over the region of the point distance; 0 iff x lies in the
// closure; +inf for the empty set
inline double dist_to_set(std::span<const double> x, const SetRegion& r) {
  check_finite(x);
  if (r.kind == SetRegion::Kind::Empty) return kInf;
  if (r.kind == SetRegion::Kind::Full) return 0.0;
  if (r.metric == Metric::Euclidean) {
    if (r.kind == SetRegion::Kind::Complement)
      return detail_region::member_euclid(x, *r.inner) ? detail_region::inner_euclid(x, *r.inner) : 0.0;
    return detail_region::member_euclid(x, r) ? 0.0 : detail_region::outer_euclid(x, r);
  }
  // torus: wrap the query point; valid for region diameter < 1/2
  if (r.kind == SetRegion::Kind::Complement) {
    // the lattice translates of the inner body never merge, so the nearest
    // complement point sits at the inner boundary of the covering translate
    double inner_best = kInf;
    bool interior = false;
    detail_region::for_each_shift(x, r.dim, [&](std::span<const double> y) {
      if (detail_region::member_euclid(y, *r.inner)) {
        const double v = detail_region::inner_euclid(y, *r.inner);
        if (v > 0) {
          interior = true;
          inner_best = std::min(inner_best, v);
        }
      }
    });
    return interior ? inner_best : 0.0;
  }
  double best = kInf;
  detail_region::for_each_shift(x, r.dim, [&](std::span<const double> y) {
    const double v =
        detail_region::member_euclid(y, r) ? 0.0 : detail_region::outer_euclid(y, r);
    best = std::min(best, v);
  });
  return best;
}

inline double point_dist(std::span<const double> a, std::span<const double> b, Metric m) {
  double s = 0;
  if (m == Metric::Euclidean) {
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double t = a[k] - b[k];
      s += t * t;
    }
    return std::sqrt(s);
  }
  for (std::size_t k = 0; k < a.size(); ++k) {
    double t = std::abs(a[k] - b[k]);
    t -= std::floor(t);
    t = std::min(t, 1.0 - t);
    s += t * t;
  }
  return std::sqrt(s);
}

namespace detail_region {

inline double gap_concentric(std::span<const double> r_small, std::span<const double> r_big) {
  // distance between an ellipsoid-type set with semi-axes r_small and the
  // complement of the enlarged set with semi-axes r_big (same center/cell):
  // at least min_k r_big_k * (1 - max_k r_small_k / r_big_k)
  double rb_min = kInf, ratio_max = 0;
  for (std::size_t k = 0; k < r_small.size(); ++k) {
    if (r_big[k] < r_small[k]) return 0.0;
    rb_min = std::min(rb_min, r_big[k]);
    if (r_big[k] == 0) continue;
    ratio_max = std::max(ratio_max, r_small[k] / r_big[k]);
  }
  if (ratio_max > 1) return 0.0;
  return rb_min * (1.0 - ratio_max);
}

inline bool same_vec(const std::vector<double>& a, const std::vector<double>& b) { return a == b; }

// nested rectangles: d([b,b'], comp [a,a']) with [b,b'] inside [a,a']
inline double gap_nested_rect(const SetRegion& inner_rect, const SetRegion& outer_rect) {
  double g = kInf;
  for (int k = 0; k < inner_rect.dim; ++k) {
    const double a = outer_rect.lo[k], a2 = outer_rect.hi[k];
    const double b = inner_rect.lo[k], b2 = inner_rect.hi[k];
    if (b < a || b2 > a2) return 0.0;
    if (a != -kInf) g = std::min(g, b - a);
    if (a2 != kInf) g = std::min(g, a2 - b2);
  }
  return g;
}

}  // namespace detail_region

// Certified lower bound on d(A,B) = inf_{a in A, b in B} d(a,b).
// Exact for the nested same-center pairs used by the bracket families;
// returns 0 when no certificate applies.
inline double set_gap(const SetRegion& A, const SetRegion& B) {
  using K = SetRegion::Kind;
  if (A.is_empty() || B.is_empty()) return kInf;
  if (A.kind == K::Full || B.kind == K::Full) return 0.0;

  // orient so that `plain` is the set and `comp` the complement, if any
  const SetRegion* plain = &A;
  const SetRegion* comp = nullptr;
  if (A.kind == K::Complement && B.kind != K::Complement) {
    plain = &B;
    comp = A.inner.get();
  } else if (B.kind == K::Complement && A.kind != K::Complement) {
    comp = B.inner.get();
  }

  if (comp != nullptr) {
    const SetRegion& P = *plain;
    const SetRegion& C = *comp;
    if (P.kind == K::Ball && C.kind == K::Ball && detail_region::same_vec(P.center, C.center))
      return std::max(0.0, C.semi[0] - P.semi[0]);
    if (P.kind == K::SublevelBall && C.kind == K::SublevelBall &&
        detail_region::same_vec(P.center, C.center))
      return std::max(0.0, C.semi[0] - P.semi[0]);
    if (P.kind == K::Ellipsoid && C.kind == K::Ellipsoid && detail_region::same_vec(P.center, C.center))
      return detail_region::gap_concentric(P.semi, C.semi);
    if ((P.kind == K::ClampEllipsoidUnion && C.kind == K::ClampEllipsoidUnion) ||
        (P.kind == K::ClampEllipsoidIntersection && C.kind == K::ClampEllipsoidIntersection)) {
      if (detail_region::same_vec(P.lo, C.lo) && detail_region::same_vec(P.hi, C.hi))
        return detail_region::gap_concentric(P.semi, C.semi);
    }
    if (P.kind == K::Rectangle && C.kind == K::Rectangle)
      return detail_region::gap_nested_rect(P, C);
    return 0.0;
  }

  if (A.kind == K::Complement && B.kind == K::Complement) return 0.0;

  // disjoint plain pairs
  if (A.kind == K::Ball && B.kind == K::Ball)
    return std::max(0.0, point_dist(A.center, B.center, A.metric) - A.semi[0] - B.semi[0]);
  if (A.kind == K::Rectangle && B.kind == K::Rectangle) {
    double s = 0;
    for (int k = 0; k < A.dim; ++k) {
      double t = 0;
      if (A.hi[k] < B.lo[k]) t = B.lo[k] - A.hi[k];
      else if (B.hi[k] < A.lo[k]) t = A.lo[k] - B.hi[k];
      s += t * t;
    }
    return std::sqrt(s);
  }
  if (A.kind == K::Ball && B.kind == K::Rectangle)
    return std::max(0.0, dist_to_set(A.center, B) - A.semi[0]);
  if (A.kind == K::Rectangle && B.kind == K::Ball)
    return std::max(0.0, dist_to_set(B.center, A) - B.semi[0]);
  return 0.0;
}

}  // namespace bracketlab
