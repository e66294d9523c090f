#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bracketlab/distribution.hpp"

using namespace bracketlab;

TEST_CASE("pseudo-inverse of the uniform marginal") {
  auto u = DistributionHandle::uniform_cube(1);
  for (int j = 0; j <= 13; ++j) {
    const double t = double(j) / 13.0;
    REQUIRE(u.marginal_quantile(0, t) == Catch::Approx(t).margin(1e-11));
  }
  REQUIRE(u.marginal_quantile(0, 1.0) == Catch::Approx(1.0).margin(1e-11));
}

TEST_CASE("sup convention on flat and jumping cdfs") {
  // flat stretch: F(x) = x/2 on [0, 0.6], 0.3 on [0.6, 1.5], then rises
  auto flat = [](double x) {
    if (x < 0) return 0.0;
    if (x <= 0.6) return x / 2;
    if (x <= 1.5) return 0.3;
    return std::min(1.0, 0.3 + (x - 1.5) / 2);
  };
  // sup{x : F(x) <= 0.3} is the right end of the flat stretch
  REQUIRE(pseudo_inverse(flat, 0.3, 0.0, 3.0) == Catch::Approx(1.5).margin(1e-9));

  // atom: F jumps from 0 to 1 at 0.5
  auto jump = [](double x) { return x < 0.5 ? 0.0 : 1.0; };
  REQUIRE(pseudo_inverse(jump, 0.25, 0.0, 1.0) == Catch::Approx(0.5).margin(1e-9));
  REQUIRE(pseudo_inverse(jump, 1.0, 0.0, 1.0) == Catch::Approx(1.0).margin(1e-12));

  // empty sup set
  REQUIRE(pseudo_inverse([](double) { return 0.7; }, 0.2, 0.0, 1.0) == -kInf);
}

TEST_CASE("gaussian quantiles against reference constants") {
  auto g = DistributionHandle::gaussian_product(1);
  REQUIRE(g.marginal_quantile(0, 0.975) == Catch::Approx(1.959963985).margin(1e-6));
  REQUIRE(g.marginal_quantile(0, 0.025) == Catch::Approx(-1.959963985).margin(1e-6));
  REQUIRE(g.marginal_quantile(0, 0.5) == Catch::Approx(0.0).margin(1e-9));
  REQUIRE(g.marginal_quantile(0, 1.0) == kInf);
  // at t = 0 the double-precision cdf underflows to an exact zero around
  // -38.5, so the sup convention lands there; anything far left is fine
  REQUIRE(g.marginal_quantile(0, 0.0) <= -38.0);
}

TEST_CASE("sampler agrees with the declared marginals") {
  // Kolmogorov-Smirnov at level 1e-3 over 1e5 draws: critical ~1.949/sqrt(n)
  const double crit = 1.949 / std::sqrt(100000.0);
  REQUIRE(ks_self_test(DistributionHandle::uniform_cube(2), 100000, 7) < crit);
  REQUIRE(ks_self_test(DistributionHandle::gaussian_product(2), 100000, 8) < crit);
}

TEST_CASE("declared tail parameters bound the actual tails") {
  auto g = DistributionHandle::gaussian_product(2);
  REQUIRE(g.tail.has_value());
  const auto [b, beta] = *g.tail;
  Stream rng(404, "tail");
  std::vector<double> pt(2);
  for (double t : {1.0, 2.0, 3.0, 5.0}) {
    long long exceed = 0;
    const long long n = 20000;
    for (long long i = 0; i < n; ++i) {
      g.sample(rng, pt);
      if (std::hypot(pt[0], pt[1]) > t) ++exceed;
    }
    const double p_hat = double(exceed) / n;
    REQUIRE(p_hat <= b * std::pow(t, -1.0 / beta) + 3.0 * std::sqrt(p_hat / n + 1e-9));
  }
}

TEST_CASE("json round trip and validation") {
  auto g = DistributionHandle::gaussian_product(3, 0.5, 2.0);
  auto back = DistributionHandle::from_json(g.to_json());
  REQUIRE(back.kind == DistributionHandle::Kind::GaussianProduct);
  REQUIRE(back.dim == 3);
  REQUIRE(back.mean == 0.5);
  REQUIRE(back.sd == 2.0);

  REQUIRE_THROWS_AS(DistributionHandle::from_json(nlohmann::json{{"type", "cauchy"}}), Error);
  REQUIRE_THROWS_AS(DistributionHandle::from_json(nlohmann::json::array()), Error);
}
