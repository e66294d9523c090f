#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bracketlab/brackets.hpp"

using namespace bracketlab;

namespace {

BracketFamily reference_centered(double eps, double s = 1, double alpha = 1) {
  auto mu = DistributionHandle::uniform_cube(1);
  auto fam = build_centered_ball_family([](double t) { return std::min(1.0, std::max(0.0, t)); },
                                        0.0, 1.0, {0.0}, mu, eps, s, alpha);
  fam.cb_modulus = mu.modulus;
  return fam;
}

BracketFamily reference_monotone(double eps, double lambda = 1, double s = 1, double alpha = 1) {
  return build_monotone_family(
      [](double t, double x) { return std::min(1.0, std::max(0.0, t + x)); },
      DistributionHandle::uniform_cube(1), lambda, eps, s, alpha);
}

}  // namespace

TEST_CASE("grid sizes and counts match the construction arithmetic") {
  auto mu1 = DistributionHandle::uniform_cube(1);
  auto rf = build_rectangle_family(mu1, 0.5, 1, 1);
  REQUIRE(rf.m == 13);                 // floor(6*2 + 1)
  REQUIRE(rf.count() == 105);          // pairs k <= j on a 14-point axis
  REQUIRE(rf.count() <= 14ull * 14);   // the quoted (m+1)^{2d} bound

  auto bf = build_ball_family(0.5, 1, 1, 1.0, 2);
  REQUIRE(bf.m == 2);
  REQUIRE(bf.count() == 12);  // (m+1) m^d

  auto ef = build_ellipsoid_family(0.5, 1, 1, 1, 1.0, 1);
  REQUIRE(ef.m == 2);
  REQUIRE(ef.count() == 4);  // D^d m^{2d}

  auto cf = reference_centered(0.5);
  REQUIRE(cf.m == 7);  // floor(3*2 + 1)
  REQUIRE(cf.count() == 7);

  auto mf = reference_monotone(0.5);
  REQUIRE(mf.m == 11);  // floor(5*2 + 1)
  REQUIRE(mf.count() == 11);

  for (double eps : {0.5, 0.2, 0.1}) {
    for (const BracketFamily& f :
         {build_rectangle_family(mu1, eps, 1, 1), build_ball_family(eps, 1, 1, 1.0, 2),
          build_ellipsoid_family(eps, 1, 1, 1, 1.0, 1), reference_centered(eps),
          reference_monotone(eps)}) {
      REQUIRE(f.count() == expected_count(f));
    }
  }
}

TEST_CASE("uniform quantile grid") {
  auto rf = build_rectangle_family(DistributionHandle::uniform_cube(1), 0.5, 1, 1);
  for (long long j = 0; j <= rf.m; ++j)
    REQUIRE(rf.qgrid[0][j] == Catch::Approx(double(j) / 13.0).margin(1e-10));
}

TEST_CASE("located rectangle bracket covers the worked example") {
  auto rf = build_rectangle_family(DistributionHandle::uniform_cube(1), 0.5, 1, 1);
  RectangleIndex rp{{0.1}, {0.6}};
  Bracket b = rf.locate(rp);
  for (int i = 0; i <= 1000; ++i) {
    std::vector<double> x{i / 1000.0};
    const double fv = rf.index_function(rp, x);
    REQUIRE(b.lower(x) <= fv);
    REQUIRE(fv <= b.upper(x));
  }
}

TEST_CASE("semi-infinite rectangles ride the boundary conventions") {
  auto rf = build_rectangle_family(DistributionHandle::gaussian_product(1), 0.3, 1, 1);
  RectangleIndex rp{{-kInf}, {0.25}};
  Bracket b = rf.locate(rp);
  Stream rng(12, "halfline");
  std::vector<double> x(1);
  for (int t = 0; t < 3000; ++t) {
    rf.mu.sample(rng, x);
    const double fv = rf.index_function(rp, x);
    REQUIRE(b.lower(x) <= fv);
    REQUIRE(fv <= b.upper(x));
  }
}

TEST_CASE("tie-breaking assigns boundary parameters upward") {
  auto bf = build_ball_family(0.5, 1, 1, 1.0, 1);  // m = 2, cells [0,1/2), [1/2,1)
  Bracket b = bf.locate(BallIndex{{0.5}, 0.3});
  REQUIRE(b.index[0] == 2);  // center cell
  auto mf = reference_monotone(0.5);
  Bracket mb = mf.locate(MonotoneIndex{3.0 / double(mf.m)});
  REQUIRE(mb.index[0] == 3);
}

TEST_CASE("out-of-domain parameters are rejected") {
  auto bf = build_ball_family(0.5, 1, 1, 1.0, 2);
  REQUIRE_THROWS_AS(bf.locate(BallIndex{{0.5, 0.5}, 3.0}), Error);
  REQUIRE_THROWS_AS(bf.locate(BallIndex{{1.5, 0.5}, 0.3}), Error);
  auto ef = build_ellipsoid_family(0.5, 1, 1, 2, 1.0, 1);
  REQUIRE_THROWS_AS(ef.locate(EllipsoidIndex{{0.5}, {2.5}}), Error);
  auto mf = reference_monotone(0.5);
  REQUIRE_THROWS_AS(mf.locate(MonotoneIndex{1.5}), Error);
}

TEST_CASE("negative radius index gives an identically zero lower function") {
  auto bf = build_ball_family(0.5, 1, 1, 1.0, 2);
  // j = 1: lower transition has A = ball of negative radius = empty set
  Bracket b = bf.bracket_at(1);  // flat = j + (m+1)*cells...; j=1, first cell
  REQUIRE(b.index.back() == 1);
  Stream rng(9, "neg-radius");
  std::vector<double> x(2);
  for (int t = 0; t < 500; ++t) {
    bf.sample_point(rng, x);
    REQUIRE(b.lower(x) == 0.0);
  }
}

TEST_CASE("ball bracket certificates match the closed forms") {
  auto bf = build_ball_family(0.5, 1, 0.5, 1.0, 2);
  // middle radius index: gap between nested grid balls is sqrt(d)/m
  Bracket b = bf.locate(BallIndex{{0.3, 0.7}, 0.8});
  const double gap = std::sqrt(2.0) / double(bf.m);
  REQUIRE(b.claimed_A == Catch::Approx(1.0 + std::pow(3.0 / gap, 0.5)));
  REQUIRE(b.claimed_A <= 1.0 + 3.0 * std::pow(bf.eps, -bf.s * bf.alpha) + 1e-12);
}

TEST_CASE("ellipsoid volume constant is the unit-ball volume") {
  // lambda(Ellip(x, r)) = c_d prod r_k, Monte Carlo check in d = 2
  Stream rng(71, "vol");
  const double r1 = 0.31, r2 = 0.17;
  const long long n = 200000;
  long long in = 0;
  for (long long i = 0; i < n; ++i) {
    const double x = rng.next_uniform(-r1, r1);
    const double y = rng.next_uniform(-r2, r2);
    if (x * x / (r1 * r1) + y * y / (r2 * r2) <= 1) ++in;
  }
  const double box = 4 * r1 * r2;
  const double mc = box * double(in) / double(n);
  const double cd = M_PI;  // d = 2
  const double exact = cd * r1 * r2;
  REQUIRE(std::abs(mc - exact) < 4.0 * box * std::sqrt(0.25 / n));
}

TEST_CASE("every family verifies at reference parameters") {
  auto mu1 = DistributionHandle::uniform_cube(1);
  std::vector<BracketFamily> fams;
  fams.push_back(build_rectangle_family(mu1, 0.5, 1, 1));
  fams.push_back(build_ball_family(0.5, 1, 1, 1.0, 2));
  fams.push_back(build_ellipsoid_family(0.5, 1, 1, 1, 1.0, 1));
  fams.push_back(build_extended_ellipsoid_family(DistributionHandle::gaussian_product(1), 0.5, 1, 1, 1, 1));
  fams.push_back(reference_centered(0.5));
  fams.push_back(reference_monotone(0.5));
  for (const auto& fam : fams) {
    auto rep = verify_family(fam, 400, 250, 4000, 2024);
    INFO(rep.family);
    REQUIRE(rep.count_ok);
    REQUIRE(rep.coverage_violations == 0);
    REQUIRE(rep.ls_violations == 0);
    REQUIRE(rep.holder_cap_violations == 0);
    REQUIRE(rep.pass);
  }
}

TEST_CASE("s = 2 families keep their certificates") {
  auto fam = build_ball_family(0.6, 2, 1, 1.0, 2);
  auto rep = verify_family(fam, 150, 150, 4000, 99);
  REQUIRE(rep.pass);
}

TEST_CASE("torus families reject coarse grids and verify on fine ones") {
  REQUIRE_THROWS_AS(build_ball_family(0.5, 1, 1, 1.0, 2, Metric::Torus), Error);
  auto fam = build_ball_family(0.05, 1, 1, 1.0, 2, Metric::Torus);  // m = 20
  REQUIRE(fam.j_cells >= 1);
  auto rep = verify_family(fam, 200, 150, 3000, 5);
  REQUIRE(rep.pass);
}

TEST_CASE("torus rectangle brackets stay Hoelder across the wrap") {
  // full-width sides drop out of the complement on the torus, so bracket
  // functions must not jump between x ~ 0 and x ~ 1
  auto fam = build_rectangle_family(DistributionHandle::uniform_cube(2), 0.5, 1, 1, Metric::Torus);
  Stream rng(99, "wrap");
  std::vector<double> x(2), y(2);
  for (std::uint64_t flat = 0; flat < fam.count(); flat += 7) {
    Bracket b = fam.bracket_at(flat);
    if (!std::isfinite(b.claimed_A)) continue;
    for (int t = 0; t < 60; ++t) {
      // pairs straddling the wrap at small torus distance
      const double eps1 = 1e-4 + 1e-3 * rng.next_unit();
      x[0] = eps1;
      y[0] = 1.0 - eps1;
      x[1] = y[1] = rng.next_unit();
      const double d = point_dist(x, y, Metric::Torus);
      const double ql = std::abs(b.lower(x) - b.lower(y)) / d;
      const double qu = std::abs(b.upper(x) - b.upper(y)) / d;
      REQUIRE(1.0 + ql <= b.claimed_A * (1 + 1e-9));
      REQUIRE(1.0 + qu <= b.claimed_A * (1 + 1e-9));
    }
  }
  auto rep = verify_family(fam, 300, 200, 3000, 5);
  REQUIRE(rep.pass);
}

TEST_CASE("bracket endpoints stay inside the unit band") {
  auto mu1 = DistributionHandle::uniform_cube(1);
  std::vector<BracketFamily> fams;
  fams.push_back(build_rectangle_family(DistributionHandle::uniform_cube(2), 0.4, 1, 1));
  fams.push_back(build_ball_family(0.3, 1, 1, 1.0, 2));
  fams.push_back(build_extended_ellipsoid_family(DistributionHandle::gaussian_product(1), 0.4, 1, 1, 1, 1));
  fams.push_back(reference_monotone(0.4));
  Stream rng(7, "band");
  std::vector<double> x;
  for (const auto& fam : fams) {
    for (int t = 0; t < 15; ++t) {
      Bracket b = fam.bracket_at(rng.next_below(fam.count()));
      for (int i = 0; i < 300; ++i) {
        fam.sample_point(rng, x);
        for (double v : {b.lower(x), b.upper(x)}) {
          REQUIRE(v >= 0.0);
          REQUIRE(v <= 1.0);
        }
      }
    }
  }
}

TEST_CASE("monotone brackets nest with the parameter") {
  auto mf = reference_monotone(0.5);
  Stream rng(55, "nesting");
  std::vector<double> x(1);
  for (long long j = 1; j + 1 <= mf.m; ++j) {
    Bracket a = mf.bracket_at(static_cast<std::uint64_t>(j - 1));
    Bracket b = mf.bracket_at(static_cast<std::uint64_t>(j));
    for (int t = 0; t < 200; ++t) {
      mf.sample_point(rng, x);
      REQUIRE(a.lower(x) <= b.lower(x) + 1e-12);
      REQUIRE(a.upper(x) <= b.upper(x) + 1e-12);
    }
  }
}

TEST_CASE("monotone coverage pins f_t between the located pair") {
  auto mf = reference_monotone(0.5);
  for (double t : {0.0, 0.12, 3.0 / 11.0, 0.5, 0.999, 1.0}) {
    MonotoneIndex mp{t};
    Bracket b = mf.locate(mp);
    for (int i = 0; i <= 1000; ++i) {
      std::vector<double> x{i / 1000.0};
      const double fv = mf.index_function(mp, x);
      REQUIRE(b.lower(x) <= fv + 1e-12);
      REQUIRE(fv <= b.upper(x) + 1e-12);
    }
  }
}

TEST_CASE("monotonicity violations are detected") {
  auto mu = DistributionHandle::uniform_cube(1);
  REQUIRE_THROWS_AS(
      build_monotone_family([](double t, double x) { return std::min(1.0, std::max(0.0, t - x)); },
                            mu, 1.0, 0.5, 1, 1),
      Error);
  REQUIRE_THROWS_AS(
      build_monotone_family([](double t, double x) { return 2.0 * t + x; }, mu, 1.0, 0.5, 1, 1),
      Error);
}

TEST_CASE("centered-ball gap certificate") {
  auto cf = reference_centered(0.5);
  // ||u_i - l_i||_s^s <= mu(B_{i+1} \ B_{i-2}) <= 3/m <= eps^s
  Stream rng(77, "cb-gap");
  std::vector<double> x(1);
  for (std::uint64_t i = 0; i < cf.count(); ++i) {
    Bracket b = cf.bracket_at(i);
    double sum = 0;
    const int n = 20000;
    for (int t = 0; t < n; ++t) {
      cf.sample_point(rng, x);
      sum += std::abs(b.upper(x) - b.lower(x));
    }
    REQUIRE(std::pow(sum / n, 1.0 / cf.s) <= cf.eps + 0.02);
    REQUIRE(b.claimed_eps == Catch::Approx(cf.eps));
  }
  // the first bracket has an identically zero lower function
  Bracket first = cf.bracket_at(0);
  for (int t = 0; t < 200; ++t) {
    cf.sample_point(rng, x);
    REQUIRE(first.lower(x) == 0.0);
  }
}

TEST_CASE("extension tail bracket") {
  auto gm = DistributionHandle::gaussian_product(1);
  const double eps = 0.4, s = 1, alpha = 1;
  Bracket tail = extension_tail_bracket(gm, eps, s, alpha, 1);

  // Monte Carlo L^s size within eps (slack: 3 standard errors)
  Stream rng(88, "tail-mc");
  std::vector<double> x(1);
  const long long n = 200000;
  double sum = 0, sum2 = 0;
  for (long long i = 0; i < n; ++i) {
    gm.sample(rng, x);
    const double g = std::abs(tail.upper(x) - tail.lower(x));
    sum += g;
    sum2 += g * g;
  }
  const double mean = sum / n;
  const double se = std::sqrt(std::max(0.0, sum2 / n - mean * mean) / n);
  REQUIRE(mean <= eps + 3 * se);

  // growth bound on the truncation level
  auto fam = build_extended_ellipsoid_family(gm, eps, s, alpha, 1, 1);
  const auto [b, beta] = *gm.tail;
  REQUIRE(fam.ext_K1 <= std::pow(2.0 * b / std::pow(eps, s), beta));

  // 0 at the box center, 1 far outside
  std::vector<double> center{0.0}, far{fam.ext_K1 + 50.0};
  REQUIRE(tail.upper(center) == 0.0);
  REQUIRE(tail.upper(far) == 1.0);
  REQUIRE(tail.lower(center) == 0.0);

  // missing tail parameters
  auto nt = DistributionHandle::gaussian_product(1);
  nt.tail.reset();
  REQUIRE_THROWS_AS(extension_tail_bracket(nt, eps, s, alpha, 1), Error);
}

TEST_CASE("extended family: compact support keeps the box bounded") {
  auto um = DistributionHandle::uniform_cube(1);
  auto fam = build_extended_ellipsoid_family(um, 0.4, 1, 1, 1, 1);
  REQUIRE(fam.ext_K1 <= 1.0);
  REQUIRE(fam.count() == static_cast<std::uint64_t>(fam.center_cells) * fam.j_cells + 1);
  auto rep = verify_family(fam, 300, 200, 3000, 17);
  REQUIRE(rep.pass);
}

TEST_CASE("degenerate eps >= 1 collapses to the trivial bracket") {
  auto mu1 = DistributionHandle::uniform_cube(1);
  for (const BracketFamily& f :
       {build_rectangle_family(mu1, 1.0, 1, 1), build_ball_family(1.2, 1, 1, 1.0, 2),
        reference_centered(1.0), reference_monotone(2.0)}) {
    REQUIRE(f.trivial);
    REQUIRE(f.count() == 1);
    auto rep = verify_family(f, 200, 100, 1000, 3);
    REQUIRE(rep.pass);
  }
}

TEST_CASE("lower never exceeds upper on random brackets") {
  auto fams = std::vector<BracketFamily>{};
  fams.push_back(build_rectangle_family(DistributionHandle::uniform_cube(2), 0.4, 1, 1));
  fams.push_back(build_ball_family(0.3, 1, 1, 1.0, 2));
  fams.push_back(build_ellipsoid_family(0.3, 1, 1, 1, 1.0, 2));
  Stream rng(31, "ordering");
  std::vector<double> x;
  for (const auto& fam : fams) {
    for (int t = 0; t < 25; ++t) {
      Bracket b = fam.bracket_at(rng.next_below(fam.count()));
      for (int i = 0; i < 300; ++i) {
        fam.sample_point(rng, x);
        REQUIRE(b.lower(x) <= b.upper(x) + 1e-15);
      }
    }
  }
}

TEST_CASE("corrupted certificates are caught by verification") {
  auto fam = build_ball_family(0.5, 1, 1, 1.0, 2);
  fam.claim_scale = 1e-3;
  auto rep = verify_family(fam, 100, 100, 2000, 8);
  REQUIRE_FALSE(rep.pass);
  REQUIRE(rep.ls_violations + rep.holder_cap_violations > 0);
}
