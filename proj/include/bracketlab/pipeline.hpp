#pragma once

#include <string>

#include <json.hpp>

#include "bracketlab/brackets.hpp"
#include "bracketlab/report.hpp"
#include "bracketlab/statistics.hpp"

namespace bracketlab {

struct TorusTheoremParams {
  std::vector<long long> matrix{2, 1, 1, 1};
  int dim = 2;
  std::string klass = "rectangles";  // rectangles | balls | ellipsoids
  double eps = 0.5;
  double s = 1;
  double alpha = 1;
  long long n = 10000;
  long long replicas = 200;
  double level = 0.01;
  long long indices = 2000;
  long long points = 500;
  long long mc = 20000;
  std::uint64_t seed = 20240801;
  unsigned threads = 1;
};

// Bundled pipeline: classify the map, build the requested index family on
// the torus, verify coverage/gaps/caps/counts, then run CLT, mixing, and
// moment diagnostics on grid observables.  Fully deterministic per config.
inline RunReport torus_theorem_report(const TorusTheoremParams& par) {
  RunReport rep;
  rep.config = {{"subcommand", "torus-theorem"},
                {"matrix", par.matrix},
                {"dim", par.dim},
                {"class", par.klass},
                {"eps", par.eps},
                {"s", par.s},
                {"alpha", par.alpha},
                {"n", par.n},
                {"replicas", par.replicas},
                {"level", par.level},
                {"indices", par.indices},
                {"points", par.points},
                {"mc", par.mc},
                {"seed", par.seed}};
  rep.seeds = {{"master", par.seed}};

  auto map = TorusAutomorphism::make(par.matrix, par.dim);
  rep.extra["classification"] = {{"ergodic", map.classification().ergodic},
                                 {"hyperbolic", map.classification().hyperbolic},
                                 {"neutral_degree", map.classification().neutral_degree}};
  rep.checks.push_back({"map-ergodic", map.classification().ergodic,
                        double(map.classification().neutral_degree), 0, 0});

  const int d = par.dim;
  const DistributionHandle mu = DistributionHandle::uniform_cube(d);
  BracketFamily fam;
  if (par.klass == "rectangles") {
    fam = build_rectangle_family(mu, par.eps, par.s, par.alpha, Metric::Torus);
  } else if (par.klass == "balls") {
    fam = build_ball_family(par.eps, par.s, par.alpha, 1.0, d, Metric::Torus);
  } else if (par.klass == "ellipsoids") {
    fam = build_ellipsoid_family(par.eps, par.s, par.alpha, 1, 1.0, d, Metric::Torus);
  } else {
    raise(Errc::ConfigError, "class must be rectangles, balls, or ellipsoids");
  }
  FamilyReport fr = verify_family(fam, par.indices, par.points, par.mc, par.seed, par.threads);
  rep.extra["family"] = fam.params_json();
  rep.extra["verification"] = fr.to_json();
  rep.checks.push_back({"family-count", fr.count_ok, double(fr.count), double(fr.count_expected), 0});
  rep.checks.push_back(
      {"family-coverage", fr.coverage_violations == 0, double(fr.coverage_violations), 0, 0});
  rep.checks.push_back({"family-ls-gap", fr.ls_violations == 0, fr.ls_gap_max, 1.0, fr.ls_gap_se});
  rep.checks.push_back({"family-holder-cap", fr.holder_cap_violations == 0,
                        double(fr.holder_cap_violations), 0, 0});

  ProcessSpec proc = ProcessSpec::torus(map);
  OrbitConfig cfg;
  cfg.master_seed = par.seed;
  rep.seeds["denominator"] = orbit_denominator(cfg);

  // grid observables: a rectangle indicator, a transition ramp, a character
  std::vector<Observable> obs;
  {
    std::vector<double> lo(d, 0.0), hi(d, 1.0 / 3.0);
    obs.push_back(rectangle_indicator_obs(lo, hi));
    std::vector<double> c(d, 0.5);
    obs.push_back(torus_ball_transition_obs(c, 0.15, 0.35));
    std::vector<long long> freq(d, 0);
    freq[0] = 1;
    obs.push_back(character_obs(freq));
  }
  nlohmann::json diag = nlohmann::json::array();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    auto dres = clt_check(obs[i], proc, par.n, par.replicas, par.level,
                          derive_key(par.seed, "tt-clt", i), par.threads);
    nlohmann::json entry;
    entry["observable"] = obs[i].name;
    entry["clt"] = dres.to_json();
    rep.checks.push_back({"clt-" + obs[i].name, dres.pass, dres.p_value, par.level, 0});
    diag.push_back(entry);
  }
  {
    auto est = covariance_decay(obs[1], proc, 12, par.n, std::min<long long>(par.replicas, 100),
                                derive_key(par.seed, "tt-mixing", 0), par.threads);
    rep.extra["mixing"] = est.to_json();
    const bool decayed = est.fit_status == "below-noise-floor" || est.theta_hat < 1.0;
    rep.checks.push_back({"mixing-decay", decayed, est.theta_hat, 1.0, 0});
  }
  {
    std::vector<long long> grid{std::max<long long>(100, par.n / 27),
                                std::max<long long>(300, par.n / 9),
                                std::max<long long>(1000, par.n / 3), par.n};
    auto mg = moment_growth(obs[1], proc, 1, grid, std::min<long long>(par.replicas, 200),
                            derive_key(par.seed, "tt-moment", 0), 0.2, par.threads);
    rep.extra["moment"] = mg.to_json();
    rep.checks.push_back({"moment-exponent", mg.pass, mg.exponent, 1.2, 0});
  }
  rep.extra["diagnostics"] = diag;
  return rep;
}

}  // namespace bracketlab
