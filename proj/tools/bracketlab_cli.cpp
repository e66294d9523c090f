// bracketlab command-line runner: subcommand dispatch, config ingestion,
// deterministic seeding, machine-readable JSON/CSV reports.
//
// Exit codes: 0 all checks pass, 1 a verification check failed (report is
// still written), 2 configuration error, 3 runtime/IO error.

#include <cmath>
#include <cstdint>
#include <limits>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bracketlab/brackets.hpp"
#include "bracketlab/pipeline.hpp"
#include "bracketlab/entropy.hpp"
#include "bracketlab/report.hpp"
#include "bracketlab/statistics.hpp"
#include "bracketlab/torus.hpp"

using nlohmann::json;
using namespace bracketlab;

namespace {

// configuration file + flag merge; flags win, unknown file keys are rejected
class ConfigFile {
 public:
  void load(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::ConfigError, "cannot open config file: " + path);
    try {
      in >> data_;
    } catch (const std::exception& e) {
      raise(Errc::ConfigError, std::string("config file is not valid JSON: ") + e.what());
    }
    if (!data_.is_object()) raise(Errc::ConfigError, "config file must hold a JSON object");
  }

  template <typename T>
  void merge(const CLI::Option* opt, T& value, const std::string& key) {
    known_.insert(key);
    if (opt != nullptr && opt->count() > 0) return;  // flag overrides file
    if (!data_.contains(key)) return;
    try {
      value = data_.at(key).get<T>();
    } catch (const std::exception&) {
      raise(Errc::ConfigError, "config key has the wrong type: " + key);
    }
  }

  void reject_unknown() const {
    for (const auto& item : data_.items())
      if (!known_.count(item.key()))
        raise(Errc::ConfigError, "unknown config key: " + item.key());
  }

 private:
  json data_ = json::object();
  std::set<std::string> known_;
};

json parse_json_arg(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const std::exception& e) {
    raise(Errc::ConfigError, what + " is not valid JSON: " + e.what());
  }
}

std::vector<long long> parse_matrix(const std::string& text, int& dim_out) {
  json j = parse_json_arg(text, "matrix");
  if (!j.is_array() || j.empty()) raise(Errc::ConfigError, "matrix must be an array of integer rows");
  const int d = static_cast<int>(j.size());
  std::vector<long long> m;
  for (const auto& row : j) {
    if (!row.is_array() || static_cast<int>(row.size()) != d)
      raise(Errc::ConfigError, "matrix must be square");
    for (const auto& v : row) {
      if (!v.is_number_integer()) raise(Errc::ConfigError, "matrix entries must be integers");
      m.push_back(v.get<long long>());
    }
  }
  dim_out = d;
  return m;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      out.push_back(std::stod(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::stod(cur));
  return out;
}

std::vector<long long> parse_int_list(const std::string& text) {
  std::vector<long long> out;
  for (double v : parse_double_list(text)) out.push_back(static_cast<long long>(v));
  return out;
}

// "1e-3:1e-1:16log" or "0.01:0.2:8"
std::vector<double> parse_delta_grid(const std::string& spec) {
  const auto p1 = spec.find(':');
  const auto p2 = spec.find(':', p1 == std::string::npos ? 0 : p1 + 1);
  if (p1 == std::string::npos || p2 == std::string::npos)
    raise(Errc::ConfigError, "delta-grid must look like lo:hi:N or lo:hi:Nlog");
  const double lo = std::stod(spec.substr(0, p1));
  const double hi = std::stod(spec.substr(p1 + 1, p2 - p1 - 1));
  std::string tail = spec.substr(p2 + 1);
  bool logspace = false;
  if (tail.size() >= 3 && tail.substr(tail.size() - 3) == "log") {
    logspace = true;
    tail = tail.substr(0, tail.size() - 3);
  }
  const int n = std::stoi(tail);
  if (n < 2 || !(lo > 0) || !(hi > lo)) raise(Errc::ConfigError, "bad delta-grid bounds");
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) {
    const double t = double(i) / double(n - 1);
    grid[i] = logspace ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))
                       : lo + t * (hi - lo);
  }
  // deltas strictly decreasing toward 0
  std::sort(grid.begin(), grid.end(), std::greater<double>());
  return grid;
}

Observable observable_from_json(const json& j, int dim) {
  if (!j.is_object() || !j.contains("type"))
    raise(Errc::ConfigError, "observable must be an object with a \"type\"");
  const std::string type = j.at("type").get<std::string>();
  if (type == "rectangle-indicator") {
    auto lo = j.at("lo").get<std::vector<double>>();
    auto hi = j.at("hi").get<std::vector<double>>();
    if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim)
      raise(Errc::ConfigError, "observable corners must match the process dimension");
    auto o = rectangle_indicator_obs(std::move(lo), std::move(hi));
    if (j.contains("centered") && j.at("centered").get<bool>()) o.name += "-centered";
    return o;
  }
  if (type == "character") {
    auto freq = j.at("freq").get<std::vector<long long>>();
    if (static_cast<int>(freq.size()) != dim)
      raise(Errc::ConfigError, "character frequency must match the process dimension");
    return character_obs(std::move(freq));
  }
  if (type == "torus-ball-ramp") {
    auto center = j.at("center").get<std::vector<double>>();
    if (static_cast<int>(center.size()) != dim)
      raise(Errc::ConfigError, "ramp center must match the process dimension");
    return torus_ball_transition_obs(std::move(center), j.at("r1").get<double>(),
                                     j.at("r2").get<double>());
  }
  if (type == "constant") return constant_obs(j.value("value", 0.0));
  raise(Errc::ConfigError, "unknown observable type: " + type);
}

struct ProcessOpts {
  std::string process = "torus";
  std::string matrix = "[[2,1],[1,1]]";
  int dim = 1;
  int denominator_bits = 61;

  ProcessSpec build(json& seeds, std::uint64_t seed) const {
    if (process == "iid") return ProcessSpec::iid(dim);
    if (process != "torus") raise(Errc::ConfigError, "process must be \"torus\" or \"iid\"");
    int d = 0;
    auto m = parse_matrix(matrix, d);
    auto spec = ProcessSpec::torus(TorusAutomorphism::make(std::move(m), d), denominator_bits);
    OrbitConfig cfg;
    cfg.denominator_bits = denominator_bits;
    cfg.master_seed = seed;
    seeds["denominator"] = orbit_denominator(cfg);
    return spec;
  }
};

BracketFamily build_family_from(const std::string& family, double eps, double s, double alpha,
                                int dim, long long D, double lambda, const json& mu_spec,
                                Metric metric) {
  const FamilyKind kind = family_from_name(family);
  switch (kind) {
    case FamilyKind::Rectangles: {
      DistributionHandle mu =
          mu_spec.is_null() ? DistributionHandle::uniform_cube(dim) : DistributionHandle::from_json(mu_spec);
      return build_rectangle_family(mu, eps, s, alpha, metric);
    }
    case FamilyKind::BallsUnitCube: {
      double B = 1.0;
      if (!mu_spec.is_null()) B = DistributionHandle::from_json(mu_spec).density_bound.value_or(1.0);
      return build_ball_family(eps, s, alpha, B, dim, metric);
    }
    case FamilyKind::EllipsoidsUnitCube: {
      double B = 1.0;
      if (!mu_spec.is_null()) B = DistributionHandle::from_json(mu_spec).density_bound.value_or(1.0);
      return build_ellipsoid_family(eps, s, alpha, D, B, dim, metric);
    }
    case FamilyKind::EllipsoidsExtended: {
      DistributionHandle mu = mu_spec.is_null() ? DistributionHandle::gaussian_product(dim)
                                                : DistributionHandle::from_json(mu_spec);
      return build_extended_ellipsoid_family(mu, eps, s, alpha, D, dim);
    }
    case FamilyKind::CenteredBalls: {
      // scalar radial law G(t) = t on [0,1] with the uniform space measure,
      // the 1-d reference configuration
      DistributionHandle mu = DistributionHandle::uniform_cube(1);
      auto fam = build_centered_ball_family([](double t) { return std::min(1.0, std::max(0.0, t)); },
                                            0.0, 1.0, {0.0}, mu, eps, s, alpha);
      fam.cb_modulus = mu.modulus;
      return fam;
    }
    case FamilyKind::Monotone: {
      DistributionHandle mu = DistributionHandle::uniform_cube(1);
      return build_monotone_family(
          [](double t, double x) { return std::min(1.0, std::max(0.0, t + x)); }, mu, lambda, eps,
          s, alpha);
    }
  }
  raise(Errc::ConfigError, "unknown family");
}

int finish_report(RunReport& rep, const std::string& out_path) {
  const json j = rep.to_json();
  if (!out_path.empty())
    write_json_file(j, out_path);
  else
    std::cout << j.dump(2) << "\n";
  return rep.all_pass() ? 0 : 1;
}

// ---------------------------------------------------------------------------

int cmd_classify(const std::string& matrix, const std::string& out) {
  int d = 0;
  auto m = parse_matrix(matrix, d);
  auto cls = classify(m, d);
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["matrix"] = parse_json_arg(matrix, "matrix");
  j["ergodic"] = cls.ergodic;
  j["hyperbolic"] = cls.hyperbolic;
  j["neutral_degree"] = cls.neutral_degree;
  j["char_poly"] = cls.char_poly;
  const long long c0 = cls.char_poly.front();
  j["det"] = (d % 2) ? -c0 : c0;
  if (!out.empty())
    write_json_file(j, out);
  else
    std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_simulate(const ProcessOpts& popt, long long n, long long replicas, std::uint64_t seed,
                 const std::string& out) {
  json seeds;
  seeds["master"] = seed;
  ProcessSpec proc = popt.build(seeds, seed);
  std::vector<std::vector<double>> rows;
  for (long long rep = 0; rep < replicas; ++rep) {
    auto flat = generate_replica(proc, seed, rep, n);
    for (long long i = 0; i < n; ++i) {
      std::vector<double> row;
      row.push_back(double(rep));
      row.push_back(double(i));
      for (int k = 0; k < proc.dim; ++k) row.push_back(flat[static_cast<std::size_t>(i) * proc.dim + k]);
      rows.push_back(std::move(row));
    }
  }
  std::vector<std::string> header{"replica", "step"};
  for (int k = 1; k <= proc.dim; ++k) header.push_back("x" + std::to_string(k));
  if (out.empty()) raise(Errc::ConfigError, "simulate requires --out for the CSV");
  write_csv(out, header, rows);
  return 0;
}

int cmd_brackets(const std::string& family, double eps, double s, double alpha, int dim,
                 long long D, double lambda, const std::string& mu_text, bool verify,
                 long long indices, long long points, long long mc, bool corrupt,
                 std::uint64_t seed, unsigned threads, const std::string& out) {
  json mu_spec;
  if (!mu_text.empty()) mu_spec = parse_json_arg(mu_text, "mu");
  BracketFamily fam =
      build_family_from(family, eps, s, alpha, dim, D, lambda, mu_spec, Metric::Euclidean);
  if (corrupt) fam.claim_scale = 1e-3;

  RunReport rep;
  rep.config = {{"subcommand", "brackets"}, {"family", family},  {"eps", eps},
                {"s", s},                   {"alpha", alpha},    {"dim", dim},
                {"D", D},                   {"lambda", lambda},  {"verify", verify},
                {"indices", indices},       {"points", points},  {"mc", mc},
                {"seed", seed},             {"threads", threads}};
  if (!mu_spec.is_null()) rep.config["mu"] = mu_spec;
  rep.seeds = {{"master", seed}};
  rep.extra = fam.params_json();

  if (verify) {
    FamilyReport fr = verify_family(fam, indices, points, mc, seed, threads);
    rep.extra["verification"] = fr.to_json();
    rep.checks.push_back({"count-exact", fr.count_ok, double(fr.count), double(fr.count_expected), 0});
    rep.checks.push_back({"coverage", fr.coverage_violations == 0, double(fr.coverage_violations), 0, 0});
    rep.checks.push_back({"ls-gap", fr.ls_violations == 0, fr.ls_gap_max, 1.0, fr.ls_gap_se});
    rep.checks.push_back(
        {"holder-cap", fr.holder_cap_violations == 0, double(fr.holder_cap_violations), 0, 0});
  }
  return finish_report(rep, out);
}

int cmd_entropy(const std::string& family, double s, double alpha, int dim, long long D,
                double lambda, const std::string& mu_text, const std::string& grid_spec, double r,
                double gamma, double a, const std::string& out, const std::string& csv) {
  json mu_spec;
  if (!mu_text.empty()) mu_spec = parse_json_arg(mu_text, "mu");
  auto grid = parse_delta_grid(grid_spec);
  auto builder = [&](double delta) -> std::pair<double, double> {
    BracketFamily f =
        build_family_from(family, delta, s, alpha, dim, D, lambda, mu_spec, Metric::Euclidean);
    const double cap = f.family_cap();
    return {double(f.count()), cap};
  };
  EntropyCurve curve = entropy_curve(builder, grid);
  IntegralCondition cond = integral_condition(curve, r, gamma);

  RunReport rep;
  rep.config = {{"subcommand", "entropy"}, {"family", family}, {"s", s},
                {"alpha", alpha},          {"dim", dim},       {"D", D},
                {"lambda", lambda},        {"delta_grid", grid_spec},
                {"r", r},                  {"gamma", gamma},
                {"a", a}};
  rep.seeds = json::object();
  json jgrid = json::array();
  std::vector<std::vector<double>> csv_rows;
  for (const auto& p : curve.pts) {
    jgrid.push_back({{"delta", p.delta}, {"count", p.count}, {"cap", p.cap}});
    csv_rows.push_back({p.delta, p.count, p.cap});
  }
  rep.extra = {{"grid", jgrid},
               {"fitted_rprime", cond.fitted_rprime},
               {"criterion_r_min", cond.criterion_r_min},
               {"converges", cond.converges},
               {"numeric_integral_tail", cond.numeric_integral_tail}};
  // smallest C with cap(delta) <= exp(C delta^{-1/gamma}) along the curve
  double cap_const = 0;
  bool cap_finite = true;
  for (const auto& p : curve.pts) {
    if (!std::isfinite(p.cap)) { cap_finite = false; continue; }
    if (p.cap > 1) cap_const = std::max(cap_const, std::pow(p.delta, 1.0 / gamma) * std::log(p.cap));
  }
  rep.extra["fitted_cap_constant"] = cap_finite ? nlohmann::json(cap_const) : nlohmann::json();
  if (gamma > std::max(2.0 + a, 1.0))
    rep.extra["min_moment_order"] = min_moment_order(r, gamma, a);
  rep.checks.push_back({"integral-condition", cond.converges, r, cond.criterion_r_min, 0});
  if (!csv.empty()) write_csv(csv, {"delta", "count", "cap"}, csv_rows);
  return finish_report(rep, out);
}

int cmd_verify_lemmas(long long n_pairs, long long samples, const std::string& dims_text,
                      const std::string& alphas_text, std::uint64_t seed, unsigned threads,
                      const std::string& out) {
  const auto dims = parse_int_list(dims_text);
  const auto alphas = parse_double_list(alphas_text);
  long long bound_viol = 0, core_viol = 0, range_viol = 0;
  std::vector<std::array<long long, 3>> per_pair(static_cast<std::size_t>(n_pairs));
  parallel_for(static_cast<std::size_t>(n_pairs), threads, [&](std::size_t t) {
    Stream rng(seed, "verify-lemmas", t);
    const int d = static_cast<int>(dims[rng.next_below(dims.size())]);
    const double alpha = alphas[rng.next_below(alphas.size())];
    // random nested pair: ball-in-ball or rectangle-in-rectangle
    SetRegion A, B;
    double gap = 0;
    if (rng.next_unit() < 0.5) {
      std::vector<double> c(d);
      for (auto& v : c) v = rng.next_unit();
      const double r1 = 0.05 + 0.3 * rng.next_unit();
      const double r2 = r1 + 0.05 + 0.4 * rng.next_unit();
      A = SetRegion::ball(c, r1);
      B = SetRegion::complement(SetRegion::ball(c, r2));
      gap = r2 - r1;
    } else {
      std::vector<double> alo(d), ahi(d), blo(d), bhi(d);
      for (int k = 0; k < d; ++k) {
        alo[k] = rng.next_unit();
        ahi[k] = alo[k] + 0.2 + 0.5 * rng.next_unit();
        const double margin1 = 0.02 + 0.1 * rng.next_unit();
        const double margin2 = 0.02 + 0.1 * rng.next_unit();
        blo[k] = alo[k] + margin1;
        bhi[k] = std::max(blo[k], ahi[k] - margin2);
      }
      SetRegion inner = SetRegion::rectangle(blo, bhi);
      SetRegion outer = SetRegion::rectangle(alo, ahi);
      A = inner;
      B = SetRegion::complement(outer);
      gap = set_gap(A, B);
    }
    TransitionFunction tf = make_transition(A, B, alpha, gap);
    const double cap_quotient = std::pow(3.0 / gap, alpha);
    long long bound_bad = 0, core_bad = 0, range_bad = 0;
    std::vector<double> x(d), y(d);
    for (long long i = 0; i < samples; ++i) {
      for (auto& v : x) v = -0.5 + 2.0 * rng.next_unit();
      for (auto& v : y) v = -0.5 + 2.0 * rng.next_unit();
      const double tx = transition_eval(tf, x);
      const double ty = transition_eval(tf, y);
      if (tx < 0 || tx > 1 || ty < 0 || ty > 1) ++range_bad;
      const double dxy = point_dist(x, y, Metric::Euclidean);
      if (dxy < 1e-7) continue;
      const double diff = std::abs(tx - ty);
      if (diff > 3.0 * dxy / gap) ++core_bad;
      if (diff / std::pow(dxy, alpha) > cap_quotient) ++bound_bad;
    }
    per_pair[t] = {bound_bad, core_bad, range_bad};
  });
  for (const auto& pp : per_pair) {
    bound_viol += pp[0];
    core_viol += pp[1];
    range_viol += pp[2];
  }

  RunReport rep;
  rep.config = {{"subcommand", "verify-lemmas"}, {"pairs", n_pairs},   {"samples", samples},
                {"dims", dims_text},             {"alphas", alphas_text}, {"seed", seed}};
  rep.seeds = {{"master", seed}};
  rep.checks.push_back({"holder-quotient-bound", bound_viol == 0, double(bound_viol), 0, 0});
  rep.checks.push_back({"core-inequality", core_viol == 0, double(core_viol), 0, 0});
  rep.checks.push_back({"range", range_viol == 0, double(range_viol), 0, 0});
  return finish_report(rep, out);
}

int cmd_clt(const ProcessOpts& popt, const std::string& obs_text, long long n, long long R,
            double level, std::uint64_t seed, unsigned threads, const std::string& out) {
  RunReport rep;
  rep.seeds = {{"master", seed}};
  ProcessSpec proc = popt.build(rep.seeds, seed);
  Observable obs = observable_from_json(parse_json_arg(obs_text, "observable"), proc.dim);
  rep.config = {{"subcommand", "clt-check"}, {"process", popt.process}, {"matrix", popt.matrix},
                {"n", n},                    {"replicas", R},           {"level", level},
                {"seed", seed},              {"observable", parse_json_arg(obs_text, "observable")}};
  auto d = clt_check(obs, proc, n, R, level, seed, threads);
  rep.extra = d.to_json();
  rep.checks.push_back({"clt-normality", d.pass, d.p_value, level, 0});
  return finish_report(rep, out);
}

int cmd_mixing(const ProcessOpts& popt, const std::string& obs_text, long long n, long long R,
               int max_lag, std::uint64_t seed, unsigned threads, const std::string& out,
               const std::string& csv) {
  RunReport rep;
  rep.seeds = {{"master", seed}};
  ProcessSpec proc = popt.build(rep.seeds, seed);
  Observable obs = observable_from_json(parse_json_arg(obs_text, "observable"), proc.dim);
  rep.config = {{"subcommand", "mixing-check"}, {"process", popt.process}, {"matrix", popt.matrix},
                {"n", n},                       {"replicas", R},           {"max_lag", max_lag},
                {"seed", seed},                 {"observable", parse_json_arg(obs_text, "observable")}};
  auto est = covariance_decay(obs, proc, max_lag, n, R, seed, threads);
  rep.extra = est.to_json();
  const bool decayed = est.fit_status == "below-noise-floor" ||
                       (est.fit_status == "fitted" && est.theta_hat < 1.0);
  rep.checks.push_back({"covariance-decay", decayed, est.theta_hat, 1.0, 0});
  if (!csv.empty()) {
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < est.cov.size(); ++k)
      rows.push_back({double(k), est.cov[k], est.cov_se[k]});
    write_csv(csv, {"lag", "cov", "se"}, rows);
  }
  return finish_report(rep, out);
}

int cmd_moment(const ProcessOpts& popt, const std::string& obs_text, const std::string& grid_text,
               int p, long long R, double slack, double a_declared, double s_order,
               std::uint64_t seed, unsigned threads, const std::string& out,
               const std::string& csv) {
  RunReport rep;
  rep.seeds = {{"master", seed}};
  ProcessSpec proc = popt.build(rep.seeds, seed);
  Observable obs = observable_from_json(parse_json_arg(obs_text, "observable"), proc.dim);
  auto grid = parse_int_list(grid_text);
  rep.config = {{"subcommand", "moment-check"}, {"process", popt.process}, {"matrix", popt.matrix},
                {"p", p},                       {"replicas", R},           {"n_grid", grid},
                {"slack", slack},               {"a", a_declared},         {"s", s_order},
                {"seed", seed},
                {"observable", parse_json_arg(obs_text, "observable")}};
  auto mg = moment_growth(obs, proc, p, grid, R, seed, slack, threads, a_declared, s_order);
  rep.extra = mg.to_json();
  rep.checks.push_back({"moment-exponent", mg.pass, mg.exponent, double(p) + slack, 0});
  if (!csv.empty()) {
    std::vector<std::vector<double>> rows;
    for (std::size_t g = 0; g < mg.n_grid.size(); ++g)
      rows.push_back({double(mg.n_grid[g]), mg.moment[g], mg.se[g]});
    write_csv(csv, {"n", "moment", "se"}, rows);
  }
  return finish_report(rep, out);
}

// bundled pipeline; the report builder lives in the library so tests can
// reproduce it byte for byte
int cmd_torus_theorem(const std::string& matrix, const std::string& klass, double eps, double s,
                      double alpha, long long n, long long R, double level, long long indices,
                      long long points, long long mc, std::uint64_t seed, unsigned threads,
                      const std::string& out) {
  TorusTheoremParams par;
  par.matrix = parse_matrix(matrix, par.dim);
  par.klass = klass;
  par.eps = eps;
  par.s = s;
  par.alpha = alpha;
  par.n = n;
  par.replicas = R;
  par.level = level;
  par.indices = indices;
  par.points = points;
  par.mc = mc;
  par.seed = seed;
  par.threads = threads;
  RunReport rep = torus_theorem_report(par);
  return finish_report(rep, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bracket families, transition geometry, entropy calculus, and "
               "torus-automorphism diagnostics"};
  app.require_subcommand(1);

  std::string config_path, out_path, csv_path;
  std::uint64_t seed = 20240801;
  unsigned threads = default_threads();
  app.add_option("--config", config_path, "JSON config file; flags override file values");
  app.add_option("--threads", threads, "worker threads (or env BRACKETLAB_THREADS)");

  // classify
  auto* sc_classify = app.add_subcommand("classify", "spectral classification of an integer matrix");
  std::string matrix = "[[2,1],[1,1]]";
  auto* o_matrix = sc_classify->add_option("--matrix", matrix, "integer matrix rows as JSON");
  auto* o_cout = sc_classify->add_option("--out", out_path, "output JSON path");

  // simulate
  auto* sc_sim = app.add_subcommand("simulate", "exact orbits to CSV");
  ProcessOpts sim_p;
  long long sim_n = 16, sim_R = 1;
  auto* o_sp = sc_sim->add_option("--process", sim_p.process, "torus|iid");
  auto* o_sm = sc_sim->add_option("--matrix", sim_p.matrix, "integer matrix rows as JSON");
  auto* o_sd = sc_sim->add_option("--dim", sim_p.dim, "dimension for iid");
  auto* o_sb = sc_sim->add_option("--denominator-bits", sim_p.denominator_bits, "prime size");
  auto* o_sn = sc_sim->add_option("--n", sim_n, "orbit length");
  auto* o_sR = sc_sim->add_option("--replicas", sim_R, "independent orbits");
  auto* o_ss = sc_sim->add_option("--seed", seed, "master seed");
  auto* o_so = sc_sim->add_option("--out", out_path, "output CSV path");

  // brackets
  auto* sc_br = app.add_subcommand("brackets", "build and verify a bracket family");
  std::string family = "rectangles", mu_text;
  double eps = std::numeric_limits<double>::quiet_NaN();
  double s_par = 1, alpha = 1, lambda = 1, level = 0.01, r_par = 3, gamma = 2;
  int dim = 1, max_lag = 20, p_ord = 1;
  long long D = 1, idx_n = 2000, pts_n = 500, mc_n = 20000, n_par = 10000, R_par = 200;
  bool do_verify = false, corrupt = false;
  auto* o_bf = sc_br->add_option("--family", family,
                                 "rectangles|balls|ellipsoids|ellipsoids-ext|centered-balls|monotone");
  auto* o_be = sc_br->add_option("--eps", eps, "bracket size");
  auto* o_bs = sc_br->add_option("--s", s_par, "L^s order");
  auto* o_ba = sc_br->add_option("--alpha", alpha, "Hoelder exponent");
  auto* o_bd = sc_br->add_option("--dim", dim, "dimension");
  auto* o_bD = sc_br->add_option("--D", D, "ellipsoid parameter bound");
  auto* o_bl = sc_br->add_option("--lambda", lambda, "Lipschitz constant for the monotone class");
  auto* o_bm = sc_br->add_option("--mu", mu_text, "measure spec JSON");
  auto* o_bv = sc_br->add_flag("--verify", do_verify, "run the verification suite");
  auto* o_bi = sc_br->add_option("--indices", idx_n, "coverage index samples");
  auto* o_bp = sc_br->add_option("--points", pts_n, "coverage points per index");
  auto* o_bmc = sc_br->add_option("--mc", mc_n, "Monte Carlo draws per bracket");
  auto* o_bc = sc_br->add_flag("--corrupt-claims", corrupt,
                               "test fixture: corrupt certificates to force failures");
  auto* o_bseed = sc_br->add_option("--seed", seed, "master seed");
  auto* o_bo = sc_br->add_option("--out", out_path, "report JSON path");

  // entropy
  auto* sc_en = app.add_subcommand("entropy", "bracketing-number curve and integral condition");
  std::string grid_spec = "1e-3:1e-1:16log";
  double a_par = -1;
  auto* o_ef = sc_en->add_option("--family", family, "family kind");
  auto* o_es = sc_en->add_option("--s", s_par, "L^s order");
  auto* o_ea = sc_en->add_option("--alpha", alpha, "Hoelder exponent");
  auto* o_ed = sc_en->add_option("--dim", dim, "dimension");
  auto* o_eD = sc_en->add_option("--D", D, "ellipsoid parameter bound");
  auto* o_el = sc_en->add_option("--lambda", lambda, "monotone Lipschitz constant");
  auto* o_em = sc_en->add_option("--mu", mu_text, "measure spec JSON");
  auto* o_eg = sc_en->add_option("--delta-grid", grid_spec, "lo:hi:N or lo:hi:Nlog");
  auto* o_er = sc_en->add_option("--r", r_par, "integral exponent r");
  auto* o_egm = sc_en->add_option("--gamma", gamma, "norm growth exponent gamma");
  auto* o_eaa = sc_en->add_option("--a", a_par, "moment-bound exponent a");
  auto* o_eo = sc_en->add_option("--out", out_path, "report JSON path");
  auto* o_ec = sc_en->add_option("--csv", csv_path, "curve CSV path");

  // verify-lemmas
  auto* sc_vl = app.add_subcommand("verify-lemmas", "transition-function bound checks");
  long long vl_pairs = 100, vl_samples = 20000;
  std::string vl_dims = "1,2,3", vl_alphas = "0.5,1";
  auto* o_vp = sc_vl->add_option("--pairs", vl_pairs, "random set pairs");
  auto* o_vs = sc_vl->add_option("--samples", vl_samples, "point pairs per set pair");
  auto* o_vd = sc_vl->add_option("--dims", vl_dims, "dimensions, comma separated");
  auto* o_va = sc_vl->add_option("--alphas", vl_alphas, "Hoelder exponents, comma separated");
  auto* o_vseed = sc_vl->add_option("--seed", seed, "master seed");
  auto* o_vo = sc_vl->add_option("--out", out_path, "report JSON path");

  // clt-check / mixing-check / moment-check
  ProcessOpts stat_p;
  std::string obs_text = R"({"type":"rectangle-indicator","lo":[0,0],"hi":[0.333,0.333]})";
  std::string ngrid_text = "1000,3000,10000,30000";
  double slack = 0.2;

  auto* sc_clt = app.add_subcommand("clt-check", "replica normality of U_n(f)");
  auto* o_cp = sc_clt->add_option("--process", stat_p.process, "torus|iid");
  auto* o_cm = sc_clt->add_option("--matrix", stat_p.matrix, "integer matrix rows as JSON");
  auto* o_cd = sc_clt->add_option("--dim", stat_p.dim, "dimension for iid");
  auto* o_cn = sc_clt->add_option("--n", n_par, "orbit length");
  auto* o_cR = sc_clt->add_option("--replicas", R_par, "replicas");
  auto* o_cl = sc_clt->add_option("--level", level, "test level");
  auto* o_cobs = sc_clt->add_option("--observable", obs_text, "observable JSON");
  auto* o_cs = sc_clt->add_option("--seed", seed, "master seed");
  auto* o_co = sc_clt->add_option("--out", out_path, "report JSON path");

  auto* sc_mix = app.add_subcommand("mixing-check", "lag covariance decay");
  auto* o_mp = sc_mix->add_option("--process", stat_p.process, "torus|iid");
  auto* o_mm = sc_mix->add_option("--matrix", stat_p.matrix, "integer matrix rows as JSON");
  auto* o_md = sc_mix->add_option("--dim", stat_p.dim, "dimension for iid");
  auto* o_mn = sc_mix->add_option("--n", n_par, "orbit length");
  auto* o_mR = sc_mix->add_option("--replicas", R_par, "replicas");
  auto* o_mk = sc_mix->add_option("--max-lag", max_lag, "largest lag");
  auto* o_mobs = sc_mix->add_option("--observable", obs_text, "observable JSON");
  auto* o_ms = sc_mix->add_option("--seed", seed, "master seed");
  auto* o_mo = sc_mix->add_option("--out", out_path, "report JSON path");
  auto* o_mc2 = sc_mix->add_option("--csv", csv_path, "lag CSV path");

  auto* sc_mom = app.add_subcommand("moment-check", "centered-sum moment growth");
  auto* o_pp = sc_mom->add_option("--process", stat_p.process, "torus|iid");
  auto* o_pm = sc_mom->add_option("--matrix", stat_p.matrix, "integer matrix rows as JSON");
  auto* o_pd = sc_mom->add_option("--dim", stat_p.dim, "dimension for iid");
  auto* o_pg = sc_mom->add_option("--n-grid", ngrid_text, "n grid, comma separated");
  auto* o_pord = sc_mom->add_option("--p", p_ord, "moment order p (moment is 2p)");
  auto* o_pa = sc_mom->add_option("--a", a_par, "declared moment-bound exponent a");
  auto* o_pso = sc_mom->add_option("--s", s_par, "L^s order for the implied constant");
  auto* o_pR = sc_mom->add_option("--replicas", R_par, "replicas");
  auto* o_psl = sc_mom->add_option("--slack", slack, "exponent slack");
  auto* o_pobs = sc_mom->add_option("--observable", obs_text, "observable JSON");
  auto* o_ps = sc_mom->add_option("--seed", seed, "master seed");
  auto* o_po = sc_mom->add_option("--out", out_path, "report JSON path");
  auto* o_pc = sc_mom->add_option("--csv", csv_path, "grid CSV path");

  // torus-theorem
  auto* sc_tt = app.add_subcommand("torus-theorem", "bundled family + diagnostics pipeline");
  std::string tt_matrix = "[[2,1],[1,1]]", tt_class = "rectangles";
  auto* o_tm = sc_tt->add_option("--matrix", tt_matrix, "integer matrix rows as JSON");
  auto* o_tc = sc_tt->add_option("--class", tt_class, "rectangles|balls|ellipsoids");
  auto* o_te = sc_tt->add_option("--eps", eps, "bracket size");
  auto* o_ts = sc_tt->add_option("--s", s_par, "L^s order");
  auto* o_ta = sc_tt->add_option("--alpha", alpha, "Hoelder exponent");
  auto* o_tn = sc_tt->add_option("--n", n_par, "orbit length");
  auto* o_tR = sc_tt->add_option("--replicas", R_par, "replicas");
  auto* o_tl = sc_tt->add_option("--level", level, "test level");
  auto* o_ti = sc_tt->add_option("--indices", idx_n, "coverage index samples");
  auto* o_tp = sc_tt->add_option("--points", pts_n, "coverage points per index");
  auto* o_tmc = sc_tt->add_option("--mc", mc_n, "Monte Carlo draws per bracket");
  auto* o_tseed = sc_tt->add_option("--seed", seed, "master seed");
  auto* o_to = sc_tt->add_option("--out", out_path, "report JSON path");

  try {
    app.parse(argc, argv);

    ConfigFile cfg;
    if (!config_path.empty()) cfg.load(config_path);

    if (*sc_classify) {
      cfg.merge(o_matrix, matrix, "matrix");
      cfg.merge(o_cout, out_path, "out");
      cfg.reject_unknown();
      return cmd_classify(matrix, out_path);
    }
    if (*sc_sim) {
      cfg.merge(o_sp, sim_p.process, "process");
      cfg.merge(o_sm, sim_p.matrix, "matrix");
      cfg.merge(o_sd, sim_p.dim, "dim");
      cfg.merge(o_sb, sim_p.denominator_bits, "denominator_bits");
      cfg.merge(o_sn, sim_n, "n");
      cfg.merge(o_sR, sim_R, "replicas");
      cfg.merge(o_ss, seed, "seed");
      cfg.merge(o_so, out_path, "out");
      cfg.reject_unknown();
      return cmd_simulate(sim_p, sim_n, sim_R, seed, out_path);
    }
    if (*sc_br) {
      cfg.merge(o_bf, family, "family");
      cfg.merge(o_be, eps, "eps");
      cfg.merge(o_bs, s_par, "s");
      cfg.merge(o_ba, alpha, "alpha");
      cfg.merge(o_bd, dim, "dim");
      cfg.merge(o_bD, D, "D");
      cfg.merge(o_bl, lambda, "lambda");
      cfg.merge(o_bm, mu_text, "mu");
      cfg.merge(o_bv, do_verify, "verify");
      cfg.merge(o_bi, idx_n, "indices");
      cfg.merge(o_bp, pts_n, "points");
      cfg.merge(o_bmc, mc_n, "mc");
      cfg.merge(o_bc, corrupt, "corrupt_claims");
      cfg.merge(o_bseed, seed, "seed");
      cfg.merge(o_bo, out_path, "out");
      cfg.reject_unknown();
      if (std::isnan(eps)) raise(Errc::ConfigError, "missing required option: eps");
      return cmd_brackets(family, eps, s_par, alpha, dim, D, lambda, mu_text, do_verify, idx_n,
                          pts_n, mc_n, corrupt, seed, threads, out_path);
    }
    if (*sc_en) {
      cfg.merge(o_ef, family, "family");
      cfg.merge(o_es, s_par, "s");
      cfg.merge(o_ea, alpha, "alpha");
      cfg.merge(o_ed, dim, "dim");
      cfg.merge(o_eD, D, "D");
      cfg.merge(o_el, lambda, "lambda");
      cfg.merge(o_em, mu_text, "mu");
      cfg.merge(o_eg, grid_spec, "delta_grid");
      cfg.merge(o_er, r_par, "r");
      cfg.merge(o_egm, gamma, "gamma");
      cfg.merge(o_eaa, a_par, "a");
      cfg.merge(o_eo, out_path, "out");
      cfg.merge(o_ec, csv_path, "csv");
      cfg.reject_unknown();
      return cmd_entropy(family, s_par, alpha, dim, D, lambda, mu_text, grid_spec, r_par, gamma,
                         a_par, out_path, csv_path);
    }
    if (*sc_vl) {
      cfg.merge(o_vp, vl_pairs, "pairs");
      cfg.merge(o_vs, vl_samples, "samples");
      cfg.merge(o_vd, vl_dims, "dims");
      cfg.merge(o_va, vl_alphas, "alphas");
      cfg.merge(o_vseed, seed, "seed");
      cfg.merge(o_vo, out_path, "out");
      cfg.reject_unknown();
      return cmd_verify_lemmas(vl_pairs, vl_samples, vl_dims, vl_alphas, seed, threads, out_path);
    }
    if (*sc_clt) {
      cfg.merge(o_cp, stat_p.process, "process");
      cfg.merge(o_cm, stat_p.matrix, "matrix");
      cfg.merge(o_cd, stat_p.dim, "dim");
      cfg.merge(o_cn, n_par, "n");
      cfg.merge(o_cR, R_par, "replicas");
      cfg.merge(o_cl, level, "level");
      cfg.merge(o_cobs, obs_text, "observable");
      cfg.merge(o_cs, seed, "seed");
      cfg.merge(o_co, out_path, "out");
      cfg.reject_unknown();
      return cmd_clt(stat_p, obs_text, n_par, R_par, level, seed, threads, out_path);
    }
    if (*sc_mix) {
      cfg.merge(o_mp, stat_p.process, "process");
      cfg.merge(o_mm, stat_p.matrix, "matrix");
      cfg.merge(o_md, stat_p.dim, "dim");
      cfg.merge(o_mn, n_par, "n");
      cfg.merge(o_mR, R_par, "replicas");
      cfg.merge(o_mk, max_lag, "max_lag");
      cfg.merge(o_mobs, obs_text, "observable");
      cfg.merge(o_ms, seed, "seed");
      cfg.merge(o_mo, out_path, "out");
      cfg.merge(o_mc2, csv_path, "csv");
      cfg.reject_unknown();
      return cmd_mixing(stat_p, obs_text, n_par, R_par, max_lag, seed, threads, out_path, csv_path);
    }
    if (*sc_mom) {
      cfg.merge(o_pp, stat_p.process, "process");
      cfg.merge(o_pm, stat_p.matrix, "matrix");
      cfg.merge(o_pd, stat_p.dim, "dim");
      cfg.merge(o_pg, ngrid_text, "n_grid");
      cfg.merge(o_pord, p_ord, "p");
      cfg.merge(o_pa, a_par, "a");
      cfg.merge(o_pso, s_par, "s");
      cfg.merge(o_pR, R_par, "replicas");
      cfg.merge(o_psl, slack, "slack");
      cfg.merge(o_pobs, obs_text, "observable");
      cfg.merge(o_ps, seed, "seed");
      cfg.merge(o_po, out_path, "out");
      cfg.merge(o_pc, csv_path, "csv");
      cfg.reject_unknown();
      return cmd_moment(stat_p, obs_text, ngrid_text, p_ord, R_par, slack, a_par, s_par, seed,
                        threads, out_path, csv_path);
    }
    if (*sc_tt) {
      cfg.merge(o_tm, tt_matrix, "matrix");
      cfg.merge(o_tc, tt_class, "class");
      cfg.merge(o_te, eps, "eps");
      cfg.merge(o_ts, s_par, "s");
      cfg.merge(o_ta, alpha, "alpha");
      cfg.merge(o_tn, n_par, "n");
      cfg.merge(o_tR, R_par, "replicas");
      cfg.merge(o_tl, level, "level");
      cfg.merge(o_ti, idx_n, "indices");
      cfg.merge(o_tp, pts_n, "points");
      cfg.merge(o_tmc, mc_n, "mc");
      cfg.merge(o_tseed, seed, "seed");
      cfg.merge(o_to, out_path, "out");
      cfg.reject_unknown();
      if (std::isnan(eps)) eps = 0.5;
      return cmd_torus_theorem(tt_matrix, tt_class, eps, s_par, alpha, n_par, R_par, level, idx_n,
                               pts_n, mc_n, seed, threads, out_path);
    }
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case Errc::ConfigError: return 2;
      default: return 3;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
