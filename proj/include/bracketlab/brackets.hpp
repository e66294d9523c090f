#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bracketlab/distribution.hpp"
#include "bracketlab/geometry.hpp"
#include "bracketlab/parallel.hpp"
#include "bracketlab/rng.hpp"
#include "bracketlab/transition.hpp"

namespace bracketlab {

enum class FamilyKind {
  Rectangles,
  BallsUnitCube,
  EllipsoidsUnitCube,
  EllipsoidsExtended,
  CenteredBalls,
  Monotone,
};

inline const char* family_name(FamilyKind k) {
  switch (k) {
    case FamilyKind::Rectangles: return "rectangles";
    case FamilyKind::BallsUnitCube: return "balls";
    case FamilyKind::EllipsoidsUnitCube: return "ellipsoids";
    case FamilyKind::EllipsoidsExtended: return "ellipsoids-ext";
    case FamilyKind::CenteredBalls: return "centered-balls";
    case FamilyKind::Monotone: return "monotone";
  }
  return "?";
}

inline FamilyKind family_from_name(const std::string& s) {
  for (FamilyKind k : {FamilyKind::Rectangles, FamilyKind::BallsUnitCube, FamilyKind::EllipsoidsUnitCube,
                       FamilyKind::EllipsoidsExtended, FamilyKind::CenteredBalls, FamilyKind::Monotone})
    if (s == family_name(k)) return k;
  raise(Errc::ConfigError, "unknown family: " + s);
}

// index parameters of the covered function classes
struct RectangleIndex {
  std::vector<double> t, u;  // 1_{(t,u]}, corners in [-inf, inf]^d
};
struct BallIndex {
  std::vector<double> center;
  double radius = 0;
};
struct EllipsoidIndex {
  std::vector<double> center, semi;
};
struct CenteredBallIndex {
  double t = 0;
};
struct MonotoneIndex {
  double t = 0;
};
using IndexParams =
    std::variant<RectangleIndex, BallIndex, EllipsoidIndex, CenteredBallIndex, MonotoneIndex>;

struct Bracket {
  std::function<double(std::span<const double>)> lower, upper;
  double claimed_eps = 1;  // certified L^s gap
  double claimed_A = 1;    // certified Hoelder-norm cap
  FamilyKind family = FamilyKind::Rectangles;
  std::vector<long long> index;
};

namespace detail_family {

inline double unit_ball_volume_const(int d) {  // pi^{d/2} / Gamma(d/2+1)
  return std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

inline Bracket from_transitions(TransitionFunction lt, TransitionFunction ut, double claimed_eps,
                                double claimed_A, FamilyKind fam, std::vector<long long> index) {
  Bracket b;
  b.claimed_eps = claimed_eps;
  b.claimed_A = claimed_A;
  b.family = fam;
  b.index = std::move(index);
  b.lower = [t = std::move(lt)](std::span<const double> x) { return transition_eval(t, x); };
  b.upper = [t = std::move(ut)](std::span<const double> x) { return transition_eval(t, x); };
  return b;
}

inline double cap_of(const TransitionFunction& t) {
  if (t.A.is_empty() || t.B.is_empty()) return 1.0;
  if (t.gap_lower_bound <= 0) return kInf;
  return 1.0 + std::pow(3.0 / t.gap_lower_bound, t.alpha);
}

}  // namespace detail_family

// A lazily enumerable covering of one of the six index classes by
// transition-function brackets.  Counts follow the construction exactly;
// brackets materialize from their index tuple on demand.
class BracketFamily {
 public:
  FamilyKind kind = FamilyKind::Rectangles;
  double eps = 0.5, s = 1, alpha = 1;
  int dim = 1;
  long long m = 1;
  Metric metric = Metric::Euclidean;
  DistributionHandle mu;      // the measure used for L^s gaps and sampling
  long long D = 1;            // ellipsoid semi-axis bound
  double lambda = 1;          // Lipschitz constant of t -> mu f_t
  bool trivial = false;       // eps >= 1: the single bracket [0,1]
  double claim_scale = 1.0;   // test fixture: deliberately corrupt certificates

  // rectangles: quantile grid per axis, indices 0..m
  std::vector<std::vector<double>> qgrid;

  // balls / ellipsoids
  long long j_cells = 0;     // ball radius indices 0..j_cells-1 / per-axis ellipsoid indices
  double grid_lo = 0;        // centers box lower corner (per axis)
  long long center_cells = 0;  // cells per axis

  // extended ellipsoids
  double ext_K1 = 0, ext_K2 = 0;  // tail transition box levels
  double ext_capture = 0;          // sets outside [-capture, capture]^d go to the tail bracket

  // centered balls
  std::vector<double> cb_center;
  std::vector<double> cb_radii;  // r_1..r_m at positions 1..m
  std::function<double(double)> cb_G;
  double cb_dom_lo = 0, cb_dom_hi = 1;
  std::optional<DistributionHandle::Modulus> cb_modulus;  // modulus of G, not of F

  // monotone class
  std::vector<double> mono_x;  // knots x_0..x_m, x_0 = -inf, x_m = +inf
  std::function<double(double, double)> mono_f;  // f(t, x)

  std::uint64_t count() const {
    if (trivial) return 1;
    switch (kind) {
      case FamilyKind::Rectangles: {
        const std::uint64_t per_axis =
            static_cast<std::uint64_t>(m + 1) * static_cast<std::uint64_t>(m + 2) / 2;
        std::uint64_t c = 1;
        for (int k = 0; k < dim; ++k) c *= per_axis;
        return c;
      }
      case FamilyKind::BallsUnitCube: {
        std::uint64_t c = static_cast<std::uint64_t>(j_cells);
        for (int k = 0; k < dim; ++k) c *= static_cast<std::uint64_t>(center_cells);
        return c;
      }
      case FamilyKind::EllipsoidsUnitCube:
      case FamilyKind::EllipsoidsExtended: {
        std::uint64_t c = 1;
        for (int k = 0; k < dim; ++k)
          c *= static_cast<std::uint64_t>(center_cells) * static_cast<std::uint64_t>(j_cells);
        return c + (kind == FamilyKind::EllipsoidsExtended ? 1 : 0);
      }
      case FamilyKind::CenteredBalls:
      case FamilyKind::Monotone:
        return static_cast<std::uint64_t>(m);
    }
    return 0;
  }

  Bracket bracket_at(std::uint64_t flat) const { return scale_claims(bracket_at_impl(flat)); }
  Bracket locate(const IndexParams& p) const { return scale_claims(locate_impl(p)); }
  IndexParams sample_index(Stream& rng) const;
  double index_function(const IndexParams& p, std::span<const double> x) const;
  void sample_point(Stream& rng, std::vector<double>& out) const {
    out.resize(dim);
    mu.sample(rng, out);
  }

  // family-level cap in the shape the construction quotes
  double family_cap() const {
    if (trivial) return 1.0;
    switch (kind) {
      case FamilyKind::Rectangles:
        return modulus_cap(3.0);
      case FamilyKind::BallsUnitCube:
        return 1.0 + 3.0 * std::pow(eps, -s * alpha);
      case FamilyKind::EllipsoidsUnitCube:
      case FamilyKind::EllipsoidsExtended:
        return 1.0 + 3.0 * double(D) * std::pow(eps, -2.0 * s * alpha);
      case FamilyKind::CenteredBalls:
        return modulus_cap(3.0);
      case FamilyKind::Monotone:
        return modulus_cap(1.0);
    }
    return kInf;
  }

  nlohmann::json params_json() const {
    nlohmann::json j;
    j["family"] = family_name(kind);
    j["eps"] = eps;
    j["s"] = s;
    j["alpha"] = alpha;
    j["dim"] = dim;
    j["m"] = m;
    j["metric"] = metric == Metric::Euclidean ? "euclidean" : "torus";
    j["count"] = count();
    j["family_cap"] = family_cap();
    if (kind == FamilyKind::EllipsoidsUnitCube || kind == FamilyKind::EllipsoidsExtended) j["D"] = D;
    if (kind == FamilyKind::Monotone) j["lambda"] = lambda;
    if (kind == FamilyKind::EllipsoidsExtended) {
      j["K1"] = ext_K1;
      j["K2"] = ext_K2;
      j["capture"] = ext_capture;
    }
    return j;
  }

 private:
  Bracket bracket_at_impl(std::uint64_t flat) const;
  Bracket locate_impl(const IndexParams& p) const;

  Bracket scale_claims(Bracket b) const {
    if (claim_scale != 1.0) {
      b.claimed_eps *= claim_scale;
      b.claimed_A *= claim_scale;
    }
    return b;
  }

  double modulus_cap(double factor) const {
    // 1 + factor^alpha * exp(alpha (c m)^{1/(s gamma)}) from the declared
    // modulus of continuity; falls back to +inf when not declared
    const auto& src = kind == FamilyKind::CenteredBalls ? cb_modulus : mu.modulus;
    if (!src || src->s != s) return kInf;
    return 1.0 + std::pow(factor, alpha) *
                     std::exp(alpha * std::pow(src->c * double(m), 1.0 / (s * src->gamma)));
  }

  double q(int axis, long long j) const {  // boundary index conventions
    if (j < 0) j = 0;
    if (j > m) j = m;
    return qgrid[axis][static_cast<std::size_t>(j)];
  }

  Bracket rect_bracket(std::span<const long long> k, std::span<const long long> j) const;
  Bracket ball_bracket(std::span<const long long> i, long long j) const;
  Bracket ellipsoid_bracket(std::span<const long long> i, std::span<const long long> j) const;
  Bracket tail_bracket() const;
  Bracket centered_bracket(long long i) const;
  Bracket monotone_bracket(long long j) const;
  Bracket trivial_bracket() const;

  SetRegion cell_region(std::span<const long long> i) const {
    std::vector<double> lo(dim), hi(dim);
    for (int k = 0; k < dim; ++k) {
      lo[k] = grid_lo + double(i[k] - 1) / double(m);
      hi[k] = lo[k] + 1.0 / double(m);
    }
    return SetRegion::rectangle(std::move(lo), std::move(hi), metric);
  }

};

// ---------------------------------------------------------------------------
// builders

// brackets [l_{k,j}, u_{k,j}] over the quantile grid t_{i,j} = F_i^{-1}(j/m),
// m = floor(6 d eps^{-s} + 1), covering indicators of rectangles (t, u].
// On the torus the grid is circular (Lebesgue quantiles j/m with index
// arithmetic mod m) and the covered class consists of arcs of per-axis
// width at most 1/2; there is no privileged cut, so every bracket stays
// Hoelder in the torus metric.
inline BracketFamily build_rectangle_family(const DistributionHandle& mu, double eps, double s,
                                            double alpha, Metric metric = Metric::Euclidean) {
  BracketFamily f;
  f.kind = FamilyKind::Rectangles;
  f.eps = eps;
  f.s = s;
  f.alpha = alpha;
  f.dim = mu.dim;
  f.metric = metric;
  f.mu = mu;
  if (eps >= 1) {
    f.trivial = true;
    return f;
  }
  if (!(eps > 0) || !(s >= 1)) raise(Errc::DomainError, "need eps in (0,1) and s >= 1");
  f.m = static_cast<long long>(std::floor(6.0 * mu.dim * std::pow(eps, -s) + 1.0));
  if (metric == Metric::Torus) {
    if (mu.kind != DistributionHandle::Kind::UniformCube || mu.lo != 0 || mu.hi != 1)
      raise(Errc::DomainError, "torus rectangle family needs Lebesgue on [0,1)^d");
    if (f.m < 4) raise(Errc::DomainError, "torus rectangle family needs m >= 4");
    f.j_cells = f.m / 2;  // largest arc width in grid cells
    return f;
  }
  f.qgrid.resize(mu.dim);
  for (int i = 0; i < mu.dim; ++i) {
    f.qgrid[i].resize(static_cast<std::size_t>(f.m) + 1);
    for (long long j = 0; j <= f.m; ++j)
      f.qgrid[i][static_cast<std::size_t>(j)] = mu.marginal_quantile(i, double(j) / double(f.m));
  }
  return f;
}

// brackets over the m-grid of cell centers and radius grid j sqrt(d)/m,
// m = floor(eps^{-s}), covering indicators of balls in the unit cube
inline BracketFamily build_ball_family(double eps, double s, double alpha, double density_bound,
                                       int dim, Metric metric = Metric::Euclidean) {
  BracketFamily f;
  f.kind = FamilyKind::BallsUnitCube;
  f.eps = eps;
  f.s = s;
  f.alpha = alpha;
  f.dim = dim;
  f.metric = metric;
  f.mu = DistributionHandle::uniform_cube(dim);
  f.mu.density_bound = density_bound;
  if (eps >= 1) {
    f.trivial = true;
    return f;
  }
  if (!(eps > 0) || !(s >= 1)) raise(Errc::DomainError, "need eps in (0,1) and s >= 1");
  f.m = static_cast<long long>(std::floor(std::pow(eps, -s)));
  f.center_cells = f.m;
  f.grid_lo = 0;
  if (metric == Metric::Torus) {
    if (f.m < 4) raise(Errc::DomainError, "torus ball family needs m >= 4");
    // keep every set diameter below 1/2: radius index j with 2(j+3)sqrt(d)/m < 1/2
    const long long jmax =
        static_cast<long long>(std::floor(double(f.m) / (4.0 * std::sqrt(double(dim))))) - 3;
    if (jmax < 0) raise(Errc::DomainError, "torus ball family needs a finer grid");
    f.j_cells = jmax + 1;
  } else {
    f.j_cells = f.m + 1;
  }
  return f;
}

// brackets from clamp-ellipsoid unions/intersections over the cell grid,
// m = floor(eps^{-s}), semi-axis grid j/m with j in {0,..,Dm-1}^d
inline BracketFamily build_ellipsoid_family(double eps, double s, double alpha, long long D,
                                            double density_bound, int dim,
                                            Metric metric = Metric::Euclidean,
                                            double centers_lo = 0, long long centers_cells = -1) {
  if (D < 1) raise(Errc::DomainError, "D must be a positive integer");
  BracketFamily f;
  f.kind = FamilyKind::EllipsoidsUnitCube;
  f.eps = eps;
  f.s = s;
  f.alpha = alpha;
  f.dim = dim;
  f.metric = metric;
  f.D = D;
  f.mu = DistributionHandle::uniform_cube(dim);
  f.mu.density_bound = density_bound;
  if (eps >= 1) {
    f.trivial = true;
    return f;
  }
  if (!(eps > 0) || !(s >= 1)) raise(Errc::DomainError, "need eps in (0,1) and s >= 1");
  f.m = static_cast<long long>(std::floor(std::pow(eps, -s)));
  f.grid_lo = centers_lo;
  f.center_cells = centers_cells > 0 ? centers_cells : f.m;
  if (metric == Metric::Torus) {
    // per-axis extent of the largest set is (1 + 2(j+2))/m; keep it below 1/2
    const long long jcap = (f.m - 2) / 4 - 2;
    if (jcap < 0) raise(Errc::DomainError, "torus ellipsoid family needs a finer grid");
    f.j_cells = std::min(jcap + 1, D * f.m);
  } else {
    f.j_cells = D * f.m;
  }
  return f;
}

// the single tail bracket [0, U_eps] truncating everything outside a large
// box; requires declared tail parameters (b, beta)
inline Bracket extension_tail_bracket(const DistributionHandle& mu, double eps, double s,
                                      double alpha, int dim) {
  if (!mu.tail) raise(Errc::TailUnbounded, "tail parameters (b, beta) are required");
  if (!(eps > 0) || eps >= 1) raise(Errc::DomainError, "need eps in (0,1)");
  const double level = std::pow(eps, s);
  auto boxcdf = [&mu](double t) { return mu.box_cdf(t); };
  const double K1 = pseudo_inverse(boxcdf, 1.0 - level / 2.0, 0.0, kInf);
  const double K2 = pseudo_inverse(boxcdf, 1.0 - level, 0.0, kInf);
  std::vector<double> k1lo(dim, -K1), k1hi(dim, K1), k2lo(dim, -K2), k2hi(dim, K2);
  SetRegion A = SetRegion::complement(SetRegion::rectangle(std::move(k1lo), std::move(k1hi)));
  SetRegion B = SetRegion::rectangle(std::move(k2lo), std::move(k2hi));
  TransitionFunction ut = make_transition(std::move(A), std::move(B), alpha);
  TransitionFunction lt;  // identically zero: empty A
  lt.A = SetRegion::empty(dim);
  lt.B = SetRegion::full(dim);
  lt.alpha = alpha;
  const double b1 = mu.kind == DistributionHandle::Kind::UniformCube
                        ? 1.0 / (mu.hi - mu.lo)
                        : 1.0 / (mu.sd * std::sqrt(2.0 * M_PI));
  const double omega_inv = std::pow(2.0, -(dim + 1)) * level / (dim * b1);
  const double cap =
      1.0 + std::pow(3.0 * std::sqrt(double(dim)), alpha) * std::pow(omega_inv, -alpha);
  return detail_family::from_transitions(std::move(lt), std::move(ut), eps, cap,
                                         FamilyKind::EllipsoidsExtended, {-1});
}

// ellipsoid family with centers over [-K, K]^d, K = K_{eps^s/2} + 2D, plus
// the tail bracket
inline BracketFamily build_extended_ellipsoid_family(const DistributionHandle& mu, double eps,
                                                     double s, double alpha, long long D, int dim) {
  if (!mu.tail) raise(Errc::TailUnbounded, "tail parameters (b, beta) are required");
  if (!mu.density_bound) raise(Errc::DomainError, "density bound is required");
  BracketFamily f;
  f.kind = FamilyKind::EllipsoidsExtended;
  f.eps = eps;
  f.s = s;
  f.alpha = alpha;
  f.dim = dim;
  f.metric = Metric::Euclidean;
  f.D = D;
  f.mu = mu;
  if (eps >= 1) {
    f.trivial = true;
    return f;
  }
  if (!(eps > 0) || !(s >= 1)) raise(Errc::DomainError, "need eps in (0,1) and s >= 1");
  f.m = static_cast<long long>(std::floor(std::pow(eps, -s)));
  const double level = std::pow(eps, s);
  auto boxcdf = [&mu](double t) { return mu.box_cdf(t); };
  f.ext_K1 = pseudo_inverse(boxcdf, 1.0 - level / 2.0, 0.0, kInf);
  f.ext_K2 = pseudo_inverse(boxcdf, 1.0 - level, 0.0, kInf);
  f.ext_capture = f.ext_K1 + 2.0 * double(D);  // sets of diameter <= 2D escape past K1
  f.grid_lo = -f.ext_capture;
  f.center_cells = static_cast<long long>(std::ceil(2.0 * f.ext_capture * double(f.m)));
  f.j_cells = D * f.m;
  return f;
}

// brackets from nested sublevel balls B_i = {x : d(x0, x) <= G^{-1}(i/m)},
// m = floor(3 eps^{-s} + 1)
inline BracketFamily build_centered_ball_family(std::function<double(double)> G, double dom_lo,
                                                double dom_hi, std::vector<double> center,
                                                const DistributionHandle& space_mu, double eps,
                                                double s, double alpha,
                                                Metric metric = Metric::Euclidean) {
  BracketFamily f;
  f.kind = FamilyKind::CenteredBalls;
  f.eps = eps;
  f.s = s;
  f.alpha = alpha;
  f.dim = static_cast<int>(center.size());
  f.metric = metric;
  f.mu = space_mu;
  f.cb_center = std::move(center);
  f.cb_G = std::move(G);
  f.cb_dom_lo = dom_lo;
  f.cb_dom_hi = dom_hi;
  if (eps >= 1) {
    f.trivial = true;
    return f;
  }
  if (!(eps > 0) || !(s >= 1)) raise(Errc::DomainError, "need eps in (0,1) and s >= 1");
  f.m = static_cast<long long>(std::floor(3.0 * std::pow(eps, -s) + 1.0));
  f.cb_radii.resize(static_cast<std::size_t>(f.m) + 1, 0.0);
  for (long long i = 1; i <= f.m; ++i)
    f.cb_radii[static_cast<std::size_t>(i)] =
        pseudo_inverse(f.cb_G, double(i) / double(f.m), dom_lo, dom_hi);
  return f;
}

// piecewise-linear brackets for a one-parameter monotone class f_t,
// m = floor((lambda+4) eps^{-s} + 1); f must be [0,1]-valued, nondecreasing
// in t and in x (spot-checked)
inline BracketFamily build_monotone_family(std::function<double(double, double)> f_t,
                                           const DistributionHandle& mu, double lambda, double eps,
                                           double s, double alpha) {
  if (mu.dim != 1) raise(Errc::DimensionMismatch, "monotone class needs a 1-d measure");
  BracketFamily f;
  f.kind = FamilyKind::Monotone;
  f.eps = eps;
  f.s = s;
  f.alpha = alpha;
  f.dim = 1;
  f.metric = Metric::Euclidean;
  f.mu = mu;
  f.lambda = lambda;
  f.mono_f = std::move(f_t);

  // spot checks of the class conditions
  {
    Stream rng(0x5bf03e11u, "monotone-spot-check");
    double prev_tv = -1;
    for (int i = 0; i < 64; ++i) {
      const double t1 = rng.next_unit(), t2 = rng.next_unit();
      const double x1 = mu.marginal_quantile(0, rng.next_unit());
      const double x2 = mu.marginal_quantile(0, rng.next_unit());
      const double v = f.mono_f(t1, x1);
      if (!(v >= 0.0 && v <= 1.0)) raise(Errc::MonotonicityViolation, "f_t must take values in [0,1]");
      if (f.mono_f(std::min(t1, t2), x1) > f.mono_f(std::max(t1, t2), x1) + 1e-12)
        raise(Errc::MonotonicityViolation, "f_t must be nondecreasing in t");
      if (f.mono_f(t1, std::min(x1, x2)) > f.mono_f(t1, std::max(x1, x2)) + 1e-12)
        raise(Errc::MonotonicityViolation, "f_t must be nondecreasing in x");
      (void)prev_tv;
    }
  }

  if (eps >= 1) {
    f.trivial = true;
    return f;
  }
  if (!(eps > 0) || !(s >= 1)) raise(Errc::DomainError, "need eps in (0,1) and s >= 1");
  f.m = static_cast<long long>(std::floor((lambda + 4.0) * std::pow(eps, -s) + 1.0));
  f.mono_x.resize(static_cast<std::size_t>(f.m) + 1);
  for (long long k = 0; k <= f.m; ++k)
    f.mono_x[static_cast<std::size_t>(k)] = mu.marginal_quantile(0, double(k) / double(f.m));
  f.mono_x.front() = -kInf;
  f.mono_x.back() = kInf;
  return f;
}

// ---------------------------------------------------------------------------
// per-kind bracket materialization

inline Bracket BracketFamily::trivial_bracket() const {
  Bracket b;
  b.family = kind;
  b.index = {0};
  b.claimed_eps = eps;
  b.claimed_A = 1.0;
  b.lower = [](std::span<const double>) { return 0.0; };
  b.upper = [](std::span<const double>) { return 1.0; };
  return b;
}

inline Bracket BracketFamily::rect_bracket(std::span<const long long> k,
                                           std::span<const long long> j) const {
  auto rect = [&](long long dk, std::span<const long long> base, long long dj,
                  std::span<const long long> top) {
    std::vector<double> lo(dim), hi(dim);
    for (int i = 0; i < dim; ++i) {
      lo[i] = q(i, base[i] + dk);
      hi[i] = q(i, top[i] + dj);
      if (metric == Metric::Torus && base[i] + dk <= 0 && top[i] + dj >= m) {
        // the axis wraps all the way around: on the torus this side of the
        // rectangle imposes no constraint at all
        lo[i] = -kInf;
        hi[i] = kInf;
      }
    }
    return SetRegion::rectangle(std::move(lo), std::move(hi), metric);
  };
  // l = T[[t_{k+1}, t_{j-2}], comp [t_k, t_{j-1}]],
  // u = T[[t_{k-1}, t_j],     comp [t_{k-2}, t_{j+1}]]
  TransitionFunction lt = make_transition(rect(+1, k, -2, j),
                                          SetRegion::complement(rect(0, k, -1, j)), alpha);
  TransitionFunction ut = make_transition(rect(-1, k, 0, j),
                                          SetRegion::complement(rect(-2, k, +1, j)), alpha);
  double cap = family_cap();
  if (cap == kInf) cap = std::max(detail_family::cap_of(lt), detail_family::cap_of(ut));
  std::vector<long long> idx(k.begin(), k.end());
  idx.insert(idx.end(), j.begin(), j.end());
  return detail_family::from_transitions(std::move(lt), std::move(ut), eps, cap, kind,
                                         std::move(idx));
}

inline Bracket BracketFamily::ball_bracket(std::span<const long long> i, long long j) const {
  std::vector<double> c(dim);
  for (int k = 0; k < dim; ++k) c[k] = grid_lo + (double(i[k]) - 0.5) / double(m);
  const double step = std::sqrt(double(dim)) / double(m);
  auto ball = [&](long long jj) { return SetRegion::ball(c, double(jj) * step, metric); };
  TransitionFunction lt =
      make_transition(ball(j - 2), SetRegion::complement(ball(j - 1)), alpha);
  TransitionFunction ut =
      make_transition(ball(j + 2), SetRegion::complement(ball(j + 3)), alpha);
  const double cap = std::max(detail_family::cap_of(lt), detail_family::cap_of(ut));
  // ||u - l||_s^s <= B * c_d * (R_out^d - R_in^d), annulus volume bound
  const double cd = detail_family::unit_ball_volume_const(dim);
  const double r_out = double(j + 3) * step;
  const double r_in = std::max(0.0, double(j - 2)) * step;
  const double vol = cd * (std::pow(r_out, dim) - std::pow(r_in, dim));
  const double ceps = std::pow(mu.density_bound.value_or(1.0) * vol, 1.0 / s);
  std::vector<long long> idx(i.begin(), i.end());
  idx.push_back(j);
  return detail_family::from_transitions(std::move(lt), std::move(ut), ceps, cap, kind,
                                         std::move(idx));
}

inline Bracket BracketFamily::ellipsoid_bracket(std::span<const long long> i,
                                                std::span<const long long> j) const {
  SetRegion cell = cell_region(i);
  auto semis = [&](long long dj) {
    std::vector<double> r(dim);
    for (int k = 0; k < dim; ++k) r[k] = double(j[k] + dj) / double(m);
    return r;
  };
  auto clampI = [&](long long dj) {
    auto r = semis(dj);
    for (double v : r)
      if (v < 0) return SetRegion::empty(dim, metric);
    return SetRegion::clamp_intersection(cell.lo, cell.hi, std::move(r), metric);
  };
  auto clampU = [&](long long dj) {
    auto r = semis(dj);
    for (double v : r)
      if (v < 0) return SetRegion::empty(dim, metric);
    return SetRegion::clamp_union(cell.lo, cell.hi, std::move(r), metric);
  };
  TransitionFunction lt = make_transition(clampI(-1), SetRegion::complement(clampI(0)), alpha);
  TransitionFunction ut = make_transition(clampU(+1), SetRegion::complement(clampU(+2)), alpha);
  const double cap = std::max(detail_family::cap_of(lt), detail_family::cap_of(ut));

  // volume sandwich: lambda(U) <= c_d prod r_k + sum_k (1/m) prod_{l != k}(2 r_l + 1/m)
  //                  lambda(L) >= c_d prod r_k - same correction
  const double cd = detail_family::unit_ball_volume_const(dim);
  auto vol_correction = [&](const std::vector<double>& r) {
    double sum = 0;
    for (int k = 0; k < dim; ++k) {
      double p = 1.0 / double(m);
      for (int l = 0; l < dim; ++l)
        if (l != k) p *= 2.0 * r[l] + 1.0 / double(m);
      sum += p;
    }
    return sum;
  };
  auto prod_of = [&](const std::vector<double>& r) {
    double p = 1;
    for (double v : r) p *= v;
    return p;
  };
  const auto r_up = semis(+2);
  const double vol_u = cd * prod_of(r_up) + vol_correction(r_up);
  double vol_l = 0;
  bool l_nonneg = true;
  for (int k = 0; k < dim; ++k)
    if (j[k] - 1 < 0) l_nonneg = false;
  if (l_nonneg) {
    const auto r_lo = semis(-1);
    vol_l = std::max(0.0, cd * prod_of(r_lo) - vol_correction(r_lo));
  }
  const double ceps =
      std::pow(mu.density_bound.value_or(1.0) * std::max(0.0, vol_u - vol_l), 1.0 / s);
  std::vector<long long> idx(i.begin(), i.end());
  idx.insert(idx.end(), j.begin(), j.end());
  return detail_family::from_transitions(std::move(lt), std::move(ut), ceps, cap, kind,
                                         std::move(idx));
}

inline Bracket BracketFamily::tail_bracket() const {
  Bracket b = extension_tail_bracket(mu, eps, s, alpha, dim);
  b.index = {static_cast<long long>(count() - 1)};
  return b;
}

inline Bracket BracketFamily::centered_bracket(long long i) const {
  auto B_idx = [&](long long ii) {
    if (ii <= 0) return SetRegion::empty(dim, metric);
    if (ii >= m + 1) return SetRegion::full(dim, metric);
    return SetRegion::sublevel_ball(cb_center, cb_radii[static_cast<std::size_t>(ii)], metric);
  };
  TransitionFunction lt = make_transition(B_idx(i - 2), SetRegion::complement(B_idx(i - 1)), alpha);
  TransitionFunction ut = make_transition(B_idx(i), SetRegion::complement(B_idx(i + 1)), alpha);
  double cap = family_cap();
  if (cap == kInf) cap = std::max(detail_family::cap_of(lt), detail_family::cap_of(ut));
  return detail_family::from_transitions(std::move(lt), std::move(ut), eps, cap, kind, {i});
}

inline Bracket BracketFamily::monotone_bracket(long long j) const {
  const long long mm = m;
  // knot values at x_1..x_{m-1}; constant extension outside
  auto lo_vals = std::make_shared<std::vector<double>>();
  auto hi_vals = std::make_shared<std::vector<double>>();
  lo_vals->resize(static_cast<std::size_t>(mm));  // position k in 1..m-1
  hi_vals->resize(static_cast<std::size_t>(mm));
  const double t_lo = double(j - 1) / double(mm), t_hi = double(j) / double(mm);
  for (long long k = 1; k <= mm - 1; ++k) {
    (*lo_vals)[static_cast<std::size_t>(k)] = mono_f(t_lo, mono_x[static_cast<std::size_t>(k - 1)]);
    (*hi_vals)[static_cast<std::size_t>(k)] = mono_f(t_hi, mono_x[static_cast<std::size_t>(k + 1)]);
  }
  auto knots = std::make_shared<std::vector<double>>(mono_x.begin() + 1, mono_x.end() - 1);

  auto piecewise = [knots](const std::shared_ptr<std::vector<double>>& vals,
                           std::span<const double> pt) {
    const double x = pt[0];
    const auto& xs = *knots;  // x_1..x_{m-1}
    const std::size_t n = xs.size();
    if (n == 0) return (*vals)[1];
    if (x <= xs.front()) return (*vals)[1];
    if (x >= xs.back()) return (*vals)[n];
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t kk = static_cast<std::size_t>(it - xs.begin());  // x in [xs[kk-1], xs[kk])
    const double x0 = xs[kk - 1], x1 = xs[kk];
    const double v0 = (*vals)[kk], v1 = (*vals)[kk + 1];
    if (x1 <= x0) return v0;
    return v0 + (x - x0) * (v1 - v0) / (x1 - x0);
  };

  Bracket b;
  b.family = kind;
  b.index = {j};
  b.claimed_eps = eps;
  double cap = family_cap();
  if (cap == kInf) {
    // piecewise-affine cap: 1 + max_k |delta value| / |delta x|^alpha
    double worst = 0;
    for (long long k = 2; k <= mm - 1; ++k) {
      const double dx = (*knots)[static_cast<std::size_t>(k - 1)] - (*knots)[static_cast<std::size_t>(k - 2)];
      if (dx <= 0) {
        worst = kInf;
        break;
      }
      worst = std::max(worst, std::abs((*lo_vals)[static_cast<std::size_t>(k)] -
                                       (*lo_vals)[static_cast<std::size_t>(k - 1)]) /
                                  std::pow(dx, alpha));
      worst = std::max(worst, std::abs((*hi_vals)[static_cast<std::size_t>(k)] -
                                       (*hi_vals)[static_cast<std::size_t>(k - 1)]) /
                                  std::pow(dx, alpha));
    }
    cap = 1.0 + worst;
  }
  b.claimed_A = cap;
  b.lower = [piecewise, lo_vals](std::span<const double> x) { return piecewise(lo_vals, x); };
  b.upper = [piecewise, hi_vals](std::span<const double> x) { return piecewise(hi_vals, x); };
  return b;
}

// ---------------------------------------------------------------------------
// enumeration, location, sampling

inline Bracket BracketFamily::bracket_at_impl(std::uint64_t flat) const {
  if (flat >= count()) raise(Errc::OutOfDomain, "bracket index out of range");
  if (trivial) return trivial_bracket();
  switch (kind) {
    case FamilyKind::Rectangles: {
      const std::uint64_t per_axis =
          static_cast<std::uint64_t>(m + 1) * static_cast<std::uint64_t>(m + 2) / 2;
      std::vector<long long> k(dim), j(dim);
      for (int a = 0; a < dim; ++a) {
        const std::uint64_t p = flat % per_axis;
        flat /= per_axis;
        const long long b = static_cast<long long>((std::sqrt(8.0 * double(p) + 1.0) - 1.0) / 2.0);
        long long bb = b;
        while (static_cast<std::uint64_t>(bb) * (bb + 1) / 2 > p) --bb;
        while (static_cast<std::uint64_t>(bb + 1) * (bb + 2) / 2 <= p) ++bb;
        k[a] = static_cast<long long>(p - static_cast<std::uint64_t>(bb) * (bb + 1) / 2);
        j[a] = bb;
      }
      return rect_bracket(k, j);
    }
    case FamilyKind::BallsUnitCube: {
      const long long j = static_cast<long long>(flat % static_cast<std::uint64_t>(j_cells));
      flat /= static_cast<std::uint64_t>(j_cells);
      std::vector<long long> i(dim);
      for (int a = 0; a < dim; ++a) {
        i[a] = 1 + static_cast<long long>(flat % static_cast<std::uint64_t>(center_cells));
        flat /= static_cast<std::uint64_t>(center_cells);
      }
      return ball_bracket(i, j);
    }
    case FamilyKind::EllipsoidsUnitCube:
    case FamilyKind::EllipsoidsExtended: {
      if (kind == FamilyKind::EllipsoidsExtended && flat == count() - 1) return tail_bracket();
      std::vector<long long> i(dim), j(dim);
      for (int a = 0; a < dim; ++a) {
        j[a] = static_cast<long long>(flat % static_cast<std::uint64_t>(j_cells));
        flat /= static_cast<std::uint64_t>(j_cells);
        i[a] = 1 + static_cast<long long>(flat % static_cast<std::uint64_t>(center_cells));
        flat /= static_cast<std::uint64_t>(center_cells);
      }
      return ellipsoid_bracket(i, j);
    }
    case FamilyKind::CenteredBalls:
      return centered_bracket(static_cast<long long>(flat) + 1);
    case FamilyKind::Monotone:
      return monotone_bracket(static_cast<long long>(flat) + 1);
  }
  raise(Errc::DomainError, "unreachable");
}

inline Bracket BracketFamily::locate_impl(const IndexParams& p) const {
  if (trivial) return trivial_bracket();
  switch (kind) {
    case FamilyKind::Rectangles: {
      const auto& rp = std::get<RectangleIndex>(p);
      if (static_cast<int>(rp.t.size()) != dim || static_cast<int>(rp.u.size()) != dim)
        raise(Errc::DimensionMismatch, "rectangle corners have wrong dimension");
      std::vector<long long> k(dim), j(dim);
      for (int a = 0; a < dim; ++a) {
        if (rp.t[a] > rp.u[a]) raise(Errc::OutOfDomain, "need t <= u");
        const auto& col = qgrid[a];
        // smallest grid index with t_{a,idx} >= value, clipped to m
        auto first_geq = [&](double v) {
          auto it = std::lower_bound(col.begin(), col.end(), v);
          return it == col.end() ? m : static_cast<long long>(it - col.begin());
        };
        k[a] = first_geq(rp.t[a]);
        j[a] = first_geq(rp.u[a]);
      }
      return rect_bracket(k, j);
    }
    case FamilyKind::BallsUnitCube: {
      const auto& bp = std::get<BallIndex>(p);
      if (static_cast<int>(bp.center.size()) != dim)
        raise(Errc::DimensionMismatch, "ball center has wrong dimension");
      const double rmax = double(j_cells) * std::sqrt(double(dim)) / double(m);
      if (bp.radius < 0 || bp.radius > rmax)
        raise(Errc::OutOfDomain, "ball radius outside the family domain");
      std::vector<long long> i(dim);
      for (int a = 0; a < dim; ++a) {
        if (bp.center[a] < 0 || bp.center[a] > 1)
          raise(Errc::OutOfDomain, "ball center outside the unit cube");
        i[a] = std::min<long long>(static_cast<long long>(std::floor(bp.center[a] * m)) + 1, m);
      }
      const long long j = std::min<long long>(
          static_cast<long long>(std::floor(bp.radius * double(m) / std::sqrt(double(dim)))),
          j_cells - 1);
      return ball_bracket(i, j);
    }
    case FamilyKind::EllipsoidsUnitCube:
    case FamilyKind::EllipsoidsExtended: {
      const auto& ep = std::get<EllipsoidIndex>(p);
      if (static_cast<int>(ep.center.size()) != dim || static_cast<int>(ep.semi.size()) != dim)
        raise(Errc::DimensionMismatch, "ellipsoid parameters have wrong dimension");
      for (int a = 0; a < dim; ++a)
        if (ep.semi[a] < 0 || ep.semi[a] > double(D))
          raise(Errc::OutOfDomain, "semi-axis outside [0, D]");
      if (kind == FamilyKind::EllipsoidsExtended) {
        bool fits = true;
        for (int a = 0; a < dim; ++a)
          if (ep.center[a] - ep.semi[a] < -ext_capture || ep.center[a] + ep.semi[a] > ext_capture)
            fits = false;
        if (!fits) return tail_bracket();
      }
      const double hi_edge = grid_lo + double(center_cells) / double(m);
      std::vector<long long> i(dim), j(dim);
      for (int a = 0; a < dim; ++a) {
        if (ep.center[a] < grid_lo || ep.center[a] > hi_edge)
          raise(Errc::OutOfDomain, "ellipsoid center outside the centers box");
        i[a] = std::min<long long>(
            static_cast<long long>(std::floor((ep.center[a] - grid_lo) * m)) + 1, center_cells);
        j[a] = std::min<long long>(static_cast<long long>(std::floor(ep.semi[a] * m)), j_cells - 1);
      }
      return ellipsoid_bracket(i, j);
    }
    case FamilyKind::CenteredBalls: {
      const auto& cp = std::get<CenteredBallIndex>(p);
      if (cp.t < 0) raise(Errc::OutOfDomain, "radius must be nonnegative");
      long long i = m;
      for (long long ii = 1; ii <= m; ++ii) {
        if (cp.t <= cb_radii[static_cast<std::size_t>(ii)]) {
          i = ii;
          break;
        }
      }
      return centered_bracket(i);
    }
    case FamilyKind::Monotone: {
      const auto& mp = std::get<MonotoneIndex>(p);
      if (mp.t < 0 || mp.t > 1) raise(Errc::OutOfDomain, "parameter t must lie in [0,1]");
      long long j = static_cast<long long>(std::ceil(mp.t * double(m)));
      j = std::max<long long>(1, std::min<long long>(j, m));
      return monotone_bracket(j);
    }
  }
  raise(Errc::DomainError, "unreachable");
}

inline double BracketFamily::index_function(const IndexParams& p, std::span<const double> x) const {
  switch (kind) {
    case FamilyKind::Rectangles: {
      const auto& rp = std::get<RectangleIndex>(p);
      for (int a = 0; a < dim; ++a)
        if (!(rp.t[a] < x[a] && x[a] <= rp.u[a])) return 0.0;
      return 1.0;
    }
    case FamilyKind::BallsUnitCube: {
      const auto& bp = std::get<BallIndex>(p);
      return point_dist(x, bp.center, metric) < bp.radius ? 1.0 : 0.0;
    }
    case FamilyKind::EllipsoidsUnitCube:
    case FamilyKind::EllipsoidsExtended: {
      const auto& ep = std::get<EllipsoidIndex>(p);
      auto level_at = [&](std::span<const double> y) {
        double lvl = 0;
        for (int a = 0; a < dim; ++a) {
          const double w = y[a] - ep.center[a];
          if (ep.semi[a] == 0) {
            if (w != 0) return kInf;
          } else {
            lvl += (w / ep.semi[a]) * (w / ep.semi[a]);
          }
        }
        return lvl;
      };
      if (metric == Metric::Euclidean) return level_at(x) <= 1.0 ? 1.0 : 0.0;
      bool in = false;
      detail_region::for_each_shift(x, dim, [&](std::span<const double> y) {
        if (!in && level_at(y) <= 1.0) in = true;
      });
      return in ? 1.0 : 0.0;
    }
    case FamilyKind::CenteredBalls: {
      const auto& cp = std::get<CenteredBallIndex>(p);
      return point_dist(x, cb_center, metric) <= cp.t ? 1.0 : 0.0;
    }
    case FamilyKind::Monotone: {
      const auto& mp = std::get<MonotoneIndex>(p);
      return mono_f(mp.t, x[0]);
    }
  }
  return 0.0;
}

inline IndexParams BracketFamily::sample_index(Stream& rng) const {
  switch (kind) {
    case FamilyKind::Rectangles: {
      RectangleIndex rp;
      rp.t.resize(dim);
      rp.u.resize(dim);
      for (int a = 0; a < dim; ++a) {
        const double pick = rng.next_unit();
        double v1 = (pick < 0.1) ? -kInf : mu.marginal_quantile(a, rng.next_unit());
        const double pick2 = rng.next_unit();
        double v2 = (pick2 < 0.1) ? kInf : mu.marginal_quantile(a, rng.next_unit());
        if (v1 > v2) std::swap(v1, v2);
        rp.t[a] = v1;
        rp.u[a] = v2;
      }
      return rp;
    }
    case FamilyKind::BallsUnitCube: {
      BallIndex bp;
      bp.center.resize(dim);
      for (int a = 0; a < dim; ++a) bp.center[a] = rng.next_unit();
      const double rmax = trivial ? std::sqrt(double(dim))
                                  : double(j_cells) * std::sqrt(double(dim)) / double(m);
      bp.radius = rng.next_unit() * rmax;
      return bp;
    }
    case FamilyKind::EllipsoidsUnitCube:
    case FamilyKind::EllipsoidsExtended: {
      EllipsoidIndex ep;
      ep.center.resize(dim);
      ep.semi.resize(dim);
      const bool extended = kind == FamilyKind::EllipsoidsExtended;
      for (int a = 0; a < dim; ++a) {
        if (extended && !trivial) {
          // mix bulk draws with far centers so the tail bracket is exercised
          if (rng.next_unit() < 0.25)
            ep.center[a] = rng.next_uniform(-2.0 * ext_capture, 2.0 * ext_capture);
          else {
            std::vector<double> pt(dim);
            mu.sample(rng, pt);
            ep.center[a] = pt[a];
          }
        } else {
          ep.center[a] = rng.next_unit();
        }
        const double smax = trivial ? double(D) : double(j_cells) / double(m);
        ep.semi[a] = rng.next_unit() * std::min(double(D), smax);
      }
      return ep;
    }
    case FamilyKind::CenteredBalls: {
      CenteredBallIndex cp;
      const double top = trivial || cb_radii.empty() || !std::isfinite(cb_radii.back())
                             ? cb_dom_hi
                             : cb_radii.back();
      const double span = std::isfinite(top) ? top : 1.0;
      cp.t = rng.next_unit() * span * 1.1;
      return cp;
    }
    case FamilyKind::Monotone: {
      MonotoneIndex mp;
      if (!trivial && rng.next_unit() < 0.1) {
        mp.t = double(1 + rng.next_below(static_cast<std::uint64_t>(m))) / double(m);
      } else {
        mp.t = rng.next_unit();
      }
      return mp;
    }
  }
  raise(Errc::DomainError, "unreachable");
}

// ---------------------------------------------------------------------------
// verification

struct FamilyReport {
  std::string family;
  double eps = 0, s = 1, alpha = 1;
  long long m = 0;
  std::uint64_t count = 0;
  std::uint64_t count_expected = 0;
  bool count_ok = false;
  long long coverage_checked = 0;
  long long coverage_violations = 0;
  long long ls_brackets_checked = 0;
  long long ls_violations = 0;
  double ls_gap_max = 0;  // max over brackets of estimate / claimed_eps
  double ls_gap_se = 0;   // standard error at the maximizing bracket
  long long holder_checked = 0;
  long long holder_cap_violations = 0;
  std::uint64_t seed = 0;
  bool pass = false;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["family"] = family;
    j["eps"] = eps;
    j["s"] = s;
    j["alpha"] = alpha;
    j["m"] = m;
    j["count"] = count;
    j["count_expected"] = count_expected;
    j["count_ok"] = count_ok;
    j["coverage_checked"] = coverage_checked;
    j["coverage_violations"] = coverage_violations;
    j["ls_brackets_checked"] = ls_brackets_checked;
    j["ls_violations"] = ls_violations;
    j["ls_gap_max"] = ls_gap_max;
    j["ls_gap_se"] = ls_gap_se;
    j["holder_checked"] = holder_checked;
    j["holder_cap_violations"] = holder_cap_violations;
    j["seed"] = seed;
    j["pass"] = pass;
    return j;
  }
};

// independent count: brute enumeration of the index ranges when feasible,
// closed formula otherwise
inline std::uint64_t expected_count(const BracketFamily& f) {
  if (f.trivial) return 1;
  switch (f.kind) {
    case FamilyKind::Rectangles: {
      const long long m = f.m;
      std::uint64_t per_axis = 0;
      for (long long b = 0; b <= m; ++b)
        for (long long a = 0; a <= b; ++a) ++per_axis;
      std::uint64_t c = 1;
      for (int k = 0; k < f.dim; ++k) c *= per_axis;
      return c;
    }
    case FamilyKind::BallsUnitCube: {
      std::uint64_t c = static_cast<std::uint64_t>(f.j_cells);
      for (int k = 0; k < f.dim; ++k) c *= static_cast<std::uint64_t>(f.center_cells);
      return c;
    }
    case FamilyKind::EllipsoidsUnitCube:
    case FamilyKind::EllipsoidsExtended: {
      std::uint64_t c = 1;
      for (int k = 0; k < f.dim; ++k)
        c *= static_cast<std::uint64_t>(f.center_cells) * static_cast<std::uint64_t>(f.j_cells);
      return c + (f.kind == FamilyKind::EllipsoidsExtended ? 1 : 0);
    }
    case FamilyKind::CenteredBalls:
    case FamilyKind::Monotone:
      return static_cast<std::uint64_t>(f.m);
  }
  return 0;
}

inline FamilyReport verify_family(const BracketFamily& fam, long long n_indices, long long n_points,
                                  long long n_mc, std::uint64_t seed,
                                  unsigned threads = default_threads()) {
  FamilyReport rep;
  rep.family = family_name(fam.kind);
  rep.eps = fam.eps;
  rep.s = fam.s;
  rep.alpha = fam.alpha;
  rep.m = fam.m;
  rep.seed = seed;
  rep.count = fam.count();
  rep.count_expected = expected_count(fam);
  rep.count_ok = rep.count == rep.count_expected;

  // (a) coverage: locate the bracket of sampled index functions and check
  // l <= f <= u pointwise, no tolerance
  rep.coverage_checked = n_indices;
  std::vector<long long> violations(static_cast<std::size_t>(n_indices), 0);
  parallel_for(static_cast<std::size_t>(n_indices), threads, [&](std::size_t t) {
    Stream rng(seed, "coverage", t);
    IndexParams p = fam.sample_index(rng);
    Bracket b = fam.locate(p);
    std::vector<double> x;
    long long bad = 0;
    for (long long i = 0; i < n_points; ++i) {
      fam.sample_point(rng, x);
      const double fv = fam.index_function(p, x);
      const double lv = b.lower(x);
      const double uv = b.upper(x);
      if (!(lv <= fv && fv <= uv)) ++bad;
    }
    violations[t] = bad;
  });
  for (long long v : violations) rep.coverage_violations += v;

  // (b) L^s gaps on a sampled subset of brackets
  const std::uint64_t total = fam.count();
  const long long check_n = static_cast<long long>(std::min<std::uint64_t>(total, 200));
  rep.ls_brackets_checked = check_n;
  std::vector<double> ratio(static_cast<std::size_t>(check_n), 0.0);
  std::vector<double> ratio_se(static_cast<std::size_t>(check_n), 0.0);
  std::vector<long long> ls_bad(static_cast<std::size_t>(check_n), 0);
  parallel_for(static_cast<std::size_t>(check_n), threads, [&](std::size_t t) {
    Stream pick(seed, "ls-pick", t);
    const std::uint64_t flat =
        (total <= static_cast<std::uint64_t>(check_n)) ? t : pick.next_below(total);
    Bracket b = fam.bracket_at(flat);
    Stream rng(seed, "ls-mc", t);
    std::vector<double> x;
    double sum = 0, sum2 = 0;
    for (long long i = 0; i < n_mc; ++i) {
      fam.sample_point(rng, x);
      const double gap = std::max(0.0, b.upper(x) - b.lower(x));
      const double g = std::pow(gap, fam.s);
      sum += g;
      sum2 += g * g;
    }
    const double mean = sum / double(n_mc);
    const double var = std::max(0.0, sum2 / double(n_mc) - mean * mean);
    const double se_mean = std::sqrt(var / double(n_mc));
    const double est = std::pow(mean, 1.0 / fam.s);
    // delta method: se of mean^{1/s}
    const double se_est =
        mean > 0 ? se_mean / (fam.s * std::pow(mean, 1.0 - 1.0 / fam.s)) : se_mean;
    const double rel_se = est > 0 ? se_est / est : 0.0;
    if (b.claimed_eps > 0) {
      ratio[t] = est / b.claimed_eps;
      ratio_se[t] = se_est / b.claimed_eps;
    }
    if (est > b.claimed_eps * (1.0 + 3.0 * rel_se)) ls_bad[t] = 1;
  });
  for (long long i = 0; i < check_n; ++i) {
    rep.ls_violations += ls_bad[static_cast<std::size_t>(i)];
    if (ratio[static_cast<std::size_t>(i)] > rep.ls_gap_max) {
      rep.ls_gap_max = ratio[static_cast<std::size_t>(i)];
      rep.ls_gap_se = ratio_se[static_cast<std::size_t>(i)];
    }
  }

  // (c) Hoelder caps: sampled one-sided check of the empirical norm
  const long long hold_n = static_cast<long long>(std::min<std::uint64_t>(total, 40));
  rep.holder_checked = hold_n;
  const long long pair_budget = std::min<long long>(n_mc, 20000);
  std::vector<long long> cap_bad(static_cast<std::size_t>(hold_n), 0);
  parallel_for(static_cast<std::size_t>(hold_n), threads, [&](std::size_t t) {
    Stream pick(seed, "cap-pick", t);
    const std::uint64_t flat =
        (total <= static_cast<std::uint64_t>(hold_n)) ? t : pick.next_below(total);
    Bracket b = fam.bracket_at(flat);
    Stream rng(seed, "cap-mc", t);
    auto sampler = [&fam](Stream& r, std::vector<double>& out) { fam.sample_point(r, out); };
    const auto le = empirical_holder_norm(b.lower, sampler, pair_budget, fam.alpha, fam.metric, rng);
    const auto ue = empirical_holder_norm(b.upper, sampler, pair_budget, fam.alpha, fam.metric, rng);
    if (le.norm > b.claimed_A || ue.norm > b.claimed_A) cap_bad[t] = 1;
  });
  for (long long v : cap_bad) rep.holder_cap_violations += v;

  rep.pass = rep.count_ok && rep.coverage_violations == 0 && rep.ls_violations == 0 &&
             rep.holder_cap_violations == 0;
  return rep;
}

}  // namespace bracketlab
