#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>

#include "bracketlab/geometry.hpp"
#include "bracketlab/rng.hpp"

namespace bracketlab {

// T[A,B](x) = d_B(x) / (d_B(x) + d_A(x)), with T := 0 if A is empty and
// T := 1 if B is empty but A is not.  Values lie in [0,1]; T = 1 on A and
// T = 0 on B.  The alpha-Hoelder norm is at most 1 + (3/d(A,B))^alpha.
struct TransitionFunction {
  SetRegion A, B;
  double gap_lower_bound = 0;  // certified lower bound on d(A,B)
  double alpha = 1.0;
};

inline TransitionFunction make_transition(SetRegion A, SetRegion B, double alpha,
                                          std::optional<double> gap = std::nullopt) {
  TransitionFunction t;
  t.gap_lower_bound = gap ? *gap : set_gap(A, B);
  t.A = std::move(A);
  t.B = std::move(B);
  t.alpha = alpha;
  return t;
}

inline double transition_eval(const TransitionFunction& t, std::span<const double> x) {
  if (t.A.is_empty()) return 0.0;
  if (t.B.is_empty()) return 1.0;
  if (member(x, t.A)) return 1.0;
  if (member(x, t.B)) return 0.0;
  const double db = dist_to_set(x, t.B);
  const double da = dist_to_set(x, t.A);
  if (db == kInf) return 1.0;
  if (da == kInf) return 0.0;
  const double s = db + da;
  if (s <= 0) return 0.0;  // degenerate overlap; keep the value in range
  double v = db / s;
  return v < 0 ? 0.0 : (v > 1 ? 1.0 : v);
}

inline double holder_bound(const TransitionFunction& t) {
  if (t.A.is_empty() || t.B.is_empty()) return 1.0;  // constant function
  if (t.gap_lower_bound <= 0) raise(Errc::ZeroGap, "transition pair has no certified gap");
  return 1.0 + std::pow(3.0 / t.gap_lower_bound, t.alpha);
}

struct HolderEstimate {
  double norm = 0;          // sup|f| + max quotient over samples
  double sup_abs = 0;
  double max_quotient = 0;
};

// Sampled lower estimate of ||f||_alpha = sup|f| + sup |f(x)-f(y)|/d(x,y)^alpha.
// Pairs closer than the separation floor are skipped so that evaluation
// noise cannot inflate the quotient.
template <typename Fn, typename Sampler>
HolderEstimate empirical_holder_norm(Fn&& f, Sampler&& sample_point, long long pairs,
                                     double alpha, Metric metric, Stream& rng,
                                     double min_separation = 1e-7) {
  HolderEstimate est;
  std::vector<double> x, y;
  for (long long i = 0; i < pairs; ++i) {
    sample_point(rng, x);
    sample_point(rng, y);
    const double fx = f(std::span<const double>(x));
    const double fy = f(std::span<const double>(y));
    est.sup_abs = std::max(est.sup_abs, std::max(std::abs(fx), std::abs(fy)));
    const double dxy = point_dist(x, y, metric);
    if (dxy < min_separation) continue;
    const double q = std::abs(fx - fy) / std::pow(dxy, alpha);
    est.max_quotient = std::max(est.max_quotient, q);
  }
  est.norm = est.sup_abs + est.max_quotient;
  return est;
}

}  // namespace bracketlab
