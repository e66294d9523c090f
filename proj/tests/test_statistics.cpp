#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bracketlab/brackets.hpp"
#include "bracketlab/statistics.hpp"

using namespace bracketlab;

namespace {

// regenerates the frozen reference datasets for the normality statistic
std::vector<double> reference_dataset(int key, int n) {
  auto unit = [&](std::uint64_t i) {
    return double(mix64(std::uint64_t(key) + (i + 1) * kGolden) >> 11) * 0x1.0p-53;
  };
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) {
    if (key % 3 == 0) {
      xs[i] = std::log(unit(i) + 1e-3);
    } else if (key % 3 == 1) {
      xs[i] = unit(i);
    } else {
      double s = 0;
      for (int j = 0; j < 12; ++j) s += unit(100 + 12 * i + j);
      xs[i] = s - 6.0;
    }
  }
  return xs;
}

// test-local lattice oracle: (A^T)^j m over exact wide integers
bool character_covariance_vanishes(const std::vector<long long>& a, int d,
                                   const std::vector<long long>& freq, int j) {
  using W = __int128;
  std::vector<W> at(static_cast<std::size_t>(d) * d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) at[r * d + c] = a[c * d + r];
  std::vector<W> v(freq.begin(), freq.end());
  for (int it = 0; it < j; ++it) {
    std::vector<W> w(d, 0);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) w[r] += at[r * d + c] * v[c];
    v = w;
  }
  bool plus = true, minus = true;
  for (int r = 0; r < d; ++r) {
    if (v[r] != W(freq[r])) plus = false;
    if (v[r] != -W(freq[r])) minus = false;
  }
  return !plus && !minus;
}

}  // namespace

TEST_CASE("normality statistic matches the reference implementation") {
  struct Ref {
    int key;
    int n;
    double stat;
  };
  const Ref refs[] = {{1, 33, 0.31716119831404654},  {2, 46, 0.3451779991229955},
                      {3, 59, 2.902705717520874},    {4, 72, 1.0051108643793611},
                      {5, 85, 0.40217748179983914},  {6, 98, 3.983036141893166},
                      {7, 111, 1.4312704784272938},  {8, 124, 0.26891896121945535},
                      {9, 137, 7.082187989532429},   {10, 150, 1.9643568380827787}};
  for (const auto& r : refs) {
    const double a2 = anderson_darling_statistic(reference_dataset(r.key, r.n));
    REQUIRE(a2 == Catch::Approx(r.stat).margin(1e-10));
  }
}

TEST_CASE("normality p-values are monotone and calibrated under the null") {
  REQUIRE(anderson_darling_pvalue(0.2, 500) > anderson_darling_pvalue(1.0, 500));
  REQUIRE(anderson_darling_pvalue(1.0, 500) > anderson_darling_pvalue(3.0, 500));
  // under a true normal sample the p-value should usually be moderate
  Stream rng(10101, "null");
  int reject = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> xs(150);
    for (auto& v : xs) v = rng.next_gaussian();
    if (anderson_darling_pvalue(anderson_darling_statistic(xs), 150) < 0.05) ++reject;
  }
  REQUIRE(reject < 0.05 * trials + 4 * std::sqrt(0.05 * 0.95 * trials));
}

TEST_CASE("u_n is linear and kills constants") {
  auto proc = ProcessSpec::iid(1);
  auto orb = generate_replica(proc, 7, 0, 500);
  auto f = rectangle_indicator_obs({0.0}, {0.5});
  auto g = rectangle_indicator_obs({0.25}, {0.9});
  Stream rng(2, "linear");
  for (int t = 0; t < 20; ++t) {
    const double a = rng.next_uniform(-2, 2), b = rng.next_uniform(-2, 2);
    Observable combo;
    combo.mean = a * f.mean + b * g.mean;
    combo.f = [&, a, b](std::span<const double> x) { return a * f.f(x) + b * g.f(x); };
    const double lhs = u_n(combo, orb, 1);
    const double rhs = a * u_n(f, orb, 1) + b * u_n(g, orb, 1);
    REQUIRE(lhs == Catch::Approx(rhs).margin(1e-9));
  }
  REQUIRE(u_n(constant_obs(0.7), orb, 1) == 0.0);
}

TEST_CASE("bracket sandwich transfers to empirical means") {
  auto fam = build_ball_family(0.4, 1, 1, 1.0, 2);
  auto proc = ProcessSpec::iid(2);
  auto orb = generate_replica(proc, 99, 0, 400);
  Stream rng(4, "sandwich");
  for (int t = 0; t < 10; ++t) {
    IndexParams p = fam.sample_index(rng);
    Bracket b = fam.locate(p);
    double sl = 0, sf = 0, su = 0;
    for (int i = 0; i < 400; ++i) {
      std::span<const double> x(orb.data() + 2 * i, 2);
      sl += b.lower(x);
      sf += fam.index_function(p, x);
      su += b.upper(x);
    }
    REQUIRE(sl <= sf);
    REQUIRE(sf <= su);
  }
}

TEST_CASE("Donsker variance of a half-interval indicator") {
  auto f = rectangle_indicator_obs({0.0}, {0.5});
  double se = 0;
  const double v = variance_estimate(f, ProcessSpec::iid(1), 10000, 400, 11, &se);
  REQUIRE(std::abs(v - 0.25) < 3 * se + 1e-9);
}

TEST_CASE("replica normality under the null passes") {
  auto f = rectangle_indicator_obs({0.0}, {0.5});
  auto d = clt_check(f, ProcessSpec::iid(1), 4000, 300, 0.01, 1234);
  REQUIRE_FALSE(d.degenerate);
  REQUIRE(d.pass);
  REQUIRE(d.sigma2_hat == Catch::Approx(0.25).margin(0.05));
}

TEST_CASE("constant observables flag a degenerate pass") {
  auto d = clt_check(constant_obs(0.3), ProcessSpec::iid(1), 500, 100, 0.01, 5);
  REQUIRE(d.degenerate);
  REQUIRE(d.pass);
  REQUIRE_THROWS_AS(clt_check(constant_obs(0.3), ProcessSpec::iid(1), 100, 5, 0.01, 5), Error);
}

TEST_CASE("cat map characters: exact-zero covariance oracle") {
  const std::vector<long long> cat = {2, 1, 1, 1};
  auto T = TorusAutomorphism::make(cat, 2);
  auto proc = ProcessSpec::torus(T);
  const std::vector<long long> freq = {1, 0};
  for (int j = 1; j <= 20; ++j) REQUIRE(character_covariance_vanishes(cat, 2, freq, j));

  auto ch = character_obs(freq);
  double se = 0;
  const double v = variance_estimate(ch, proc, 20000, 150, 77, &se);
  REQUIRE(std::abs(v - 0.5) < 3 * se + 1e-9);

  auto est = covariance_decay(ch, proc, 12, 20000, 80, 31);
  REQUIRE(est.cov[0] == Catch::Approx(0.5).margin(0.02));
  for (int k = 1; k <= 12; ++k)
    REQUIRE(std::abs(est.cov[k]) <= 4.0 * est.cov_se[k]);
  REQUIRE(est.fit_status == "below-noise-floor");
}

TEST_CASE("cat map indicator observable satisfies the CLT check") {
  auto T = TorusAutomorphism::make({2, 1, 1, 1}, 2);
  auto f = rectangle_indicator_obs({0, 0}, {1.0 / 3, 1.0 / 3});
  auto d = clt_check(f, ProcessSpec::torus(T), 5000, 300, 0.01, 2026);
  REQUIRE(d.pass);
}

TEST_CASE("independence shows no covariance decay signal") {
  auto f = rectangle_indicator_obs({0.0}, {0.5});
  auto est = covariance_decay(f, ProcessSpec::iid(1), 10, 20000, 60, 13);
  for (int k = 1; k <= 10; ++k) REQUIRE(std::abs(est.cov[k]) <= 3.0 * est.cov_se[k]);
  REQUIRE(est.fit_status == "below-noise-floor");
}

TEST_CASE("cat map Hoelder observable mixes exponentially") {
  auto T = TorusAutomorphism::make({2, 1, 1, 1}, 2);
  auto ramp = torus_ball_transition_obs({0.5, 0.5}, 0.15, 0.35);
  auto est = covariance_decay(ramp, ProcessSpec::torus(T), 12, 100000, 60, 13);
  REQUIRE(est.fit_status == "fitted");
  REQUIRE(est.lags_used >= 3);
  REQUIRE(est.theta_hat < 0.9);
  REQUIRE(est.r2 >= 0.8);
}

TEST_CASE("torus ramp mean matches Monte Carlo") {
  auto ramp = torus_ball_transition_obs({0.3, 0.7}, 0.1, 0.3);
  Stream rng(505, "ramp-mean");
  const long long n = 400000;
  double sum = 0, sum2 = 0;
  std::vector<double> x(2);
  for (long long i = 0; i < n; ++i) {
    x[0] = rng.next_unit();
    x[1] = rng.next_unit();
    const double v = ramp.f(x);
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt(std::max(0.0, sum2 / n - mean * mean) / n);
  REQUIRE(std::abs(mean - ramp.mean) < 4 * se);
}

TEST_CASE("moment growth matches the classical fourth-moment identity") {
  // i.i.d. Z = 1_{x <= 1/2} - 1/2: E[(sum Z)^4] = n m4 + 3 n (n-1) sigma^4
  auto f = rectangle_indicator_obs({0.0}, {0.5});
  auto proc = ProcessSpec::iid(1);
  const long long n = 256, R = 4000;
  std::vector<double> vals(R);
  for (long long rep = 0; rep < R; ++rep) {
    auto orb = generate_replica(proc, 31337, rep, n);
    double s = 0;
    for (long long i = 0; i < n; ++i) s += f.f(std::span<const double>(orb.data() + i, 1)) - 0.5;
    vals[rep] = std::pow(s, 4);
  }
  double mean = 0;
  for (double v : vals) mean += v;
  mean /= double(R);
  double var = 0;
  for (double v : vals) var += (v - mean) * (v - mean);
  var /= double(R - 1);
  const double se = std::sqrt(var / R);
  const double exact = n * (1.0 / 16.0) + 3.0 * n * (n - 1) / 16.0;
  REQUIRE(std::abs(mean - exact) < 4 * se);

  std::vector<long long> grid{500, 1000, 2000, 4000};
  auto mg = moment_growth(f, proc, 2, grid, 300, 2024);
  REQUIRE(mg.exponent == Catch::Approx(2.0).margin(0.2));
  REQUIRE(mg.pass);
}

TEST_CASE("moment growth on the cat map stays near the admissible order") {
  auto T = TorusAutomorphism::make({2, 1, 1, 1}, 2);
  auto ramp = torus_ball_transition_obs({0.5, 0.5}, 0.15, 0.35);
  std::vector<long long> grid{500, 1500, 4000, 10000};
  auto mg = moment_growth(ramp, ProcessSpec::torus(T), 1, grid, 150, 7);
  REQUIRE(mg.exponent <= 1.2);
}

TEST_CASE("finite-dimensional directions behave like the scalar check") {
  std::vector<Observable> fs;
  fs.push_back(rectangle_indicator_obs({0.0}, {0.3}));
  fs.push_back(rectangle_indicator_obs({0.6}, {0.9}));  // disjoint supports
  auto res = finite_dim_check(fs, ProcessSpec::iid(1), 3000, 200, 8, 0.005, 424242);
  REQUIRE(res.size() == 8);
  for (const auto& d : res) REQUIRE(d.pass);

  std::vector<Observable> single;
  single.push_back(rectangle_indicator_obs({0.0}, {0.5}));
  auto one = finite_dim_check(single, ProcessSpec::iid(1), 2000, 150, 1, 0.01, 5);
  REQUIRE(one.size() == 1);
  REQUIRE(one[0].pass);
}

TEST_CASE("diagnostics are bit-identical across repeated runs") {
  auto T = TorusAutomorphism::make({2, 1, 1, 1}, 2);
  auto ramp = torus_ball_transition_obs({0.5, 0.5}, 0.2, 0.4);
  auto a = clt_check(ramp, ProcessSpec::torus(T), 2000, 64, 0.01, 555, 2);
  auto b = clt_check(ramp, ProcessSpec::torus(T), 2000, 64, 0.01, 555, 1);
  REQUIRE(a.to_json().dump() == b.to_json().dump());

  auto ma = covariance_decay(ramp, ProcessSpec::torus(T), 6, 4000, 24, 9, 2);
  auto mb = covariance_decay(ramp, ProcessSpec::torus(T), 6, 4000, 24, 9, 1);
  REQUIRE(ma.to_json().dump() == mb.to_json().dump());
}

TEST_CASE("declared-mean observables agree with a Monte Carlo estimate") {
  // invariant on the Observable contract: when the mean is declared exact,
  // an independent Monte Carlo estimate must agree within 4 SE
  auto obs = std::vector<Observable>{rectangle_indicator_obs({0.1, 0.2}, {0.6, 0.9}),
                                     torus_ball_transition_obs({0.5, 0.5}, 0.1, 0.45),
                                     character_obs({2, -1})};
  Stream rng(8080, "mean-check");
  std::vector<double> x(2);
  for (const auto& o : obs) {
    const long long n = 200000;
    double sum = 0, sum2 = 0;
    for (long long i = 0; i < n; ++i) {
      x[0] = rng.next_unit();
      x[1] = rng.next_unit();
      const double v = o.f(x);
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / n;
    const double se = std::sqrt(std::max(0.0, sum2 / n - mean * mean) / n);
    REQUIRE(std::abs(mean - o.mean) < 4 * se + 1e-12);
  }
}

TEST_CASE("error paths") {
  auto f = rectangle_indicator_obs({0.0}, {0.5});
  std::vector<long long> tiny{100, 200};
  REQUIRE_THROWS_AS(moment_growth(f, ProcessSpec::iid(1), 2, tiny, 50, 1), Error);
  std::vector<long long> grid{100, 200, 400, 800};
  REQUIRE_THROWS_AS(moment_growth(f, ProcessSpec::iid(1), 5, grid, 50, 1), Error);
  REQUIRE_THROWS_AS(covariance_decay(f, ProcessSpec::iid(1), 2, 1000, 20, 1), Error);
}
