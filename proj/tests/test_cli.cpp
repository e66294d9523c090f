#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

using nlohmann::json;

namespace {

const std::string kCli = BRACKETLAB_CLI_PATH;

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string out_file = "cli_stdout.tmp";
  const std::string cmd = kCli + " " + args + " > " + out_file + " 2>&1";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = WEXITSTATUS(raw);
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("classify: happy path and malformed input") {
  auto r = run("classify --matrix \"[[2,1],[1,1]]\"");
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  REQUIRE(j.at("ergodic").get<bool>());
  REQUIRE(j.at("hyperbolic").get<bool>());
  REQUIRE(j.at("neutral_degree").get<int>() == 0);
  REQUIRE(j.at("det").get<long long>() == 1);

  REQUIRE(run("classify --matrix \"[[2,1],[1,1]\"").code == 2);   // broken JSON
  REQUIRE(run("classify --matrix \"[[2,1],[1,1,3]]\"").code == 2);  // ragged
  REQUIRE(run("classify --matrix \"[[2,0],[0,1]]\"").code == 3);  // |det| != 1
}

TEST_CASE("brackets: eps is mandatory") {
  auto r = run("brackets --family rectangles --dim 1");
  REQUIRE(r.code == 2);
  REQUIRE(r.out.find("eps") != std::string::npos);
}

TEST_CASE("brackets: verification pass and corrupted-claims failure") {
  auto ok = run(
      "brackets --family balls --eps 0.5 --dim 2 --verify --indices 120 --points 80 --mc 1500 "
      "--seed 7 --out rep_ok.json");
  REQUIRE(ok.code == 0);
  json j = json::parse(slurp("rep_ok.json"));
  REQUIRE(j.at("schema_version").get<int>() == 1);
  REQUIRE(j.at("checks").size() == 4);
  for (const auto& c : j.at("checks")) REQUIRE(c.at("verdict").get<std::string>() == "pass");

  auto bad = run(
      "brackets --family balls --eps 0.5 --dim 2 --verify --indices 60 --points 60 --mc 1500 "
      "--seed 7 --corrupt-claims --out rep_bad.json");
  REQUIRE(bad.code == 1);
  json jb = json::parse(slurp("rep_bad.json"));
  bool any_fail = false;
  for (const auto& c : jb.at("checks"))
    if (c.at("verdict").get<std::string>() == "fail") any_fail = true;
  REQUIRE(any_fail);
}

TEST_CASE("brackets without --verify emits an empty checks array") {
  auto r = run("brackets --family centered-balls --eps 0.4 --out rep_novf.json");
  REQUIRE(r.code == 0);
  json j = json::parse(slurp("rep_novf.json"));
  REQUIRE(j.at("checks").is_array());
  REQUIRE(j.at("checks").empty());
  REQUIRE(j.at("extra").at("count").get<long long>() > 0);
}

TEST_CASE("config file merging, overrides, and unknown keys") {
  {
    std::ofstream cfg("cfg.json");
    cfg << R"({"family":"balls","eps":0.5,"dim":2,"seed":11})";
  }
  auto r = run("--config cfg.json brackets --eps 0.25 --out rep_cfg.json");
  REQUIRE(r.code == 0);
  json j = json::parse(slurp("rep_cfg.json"));
  REQUIRE(j.at("config").at("family").get<std::string>() == "balls");  // from file
  REQUIRE(j.at("config").at("eps").get<double>() == 0.25);             // flag wins
  REQUIRE(j.at("config").at("seed").get<std::uint64_t>() == 11);

  {
    std::ofstream cfg("cfg_bad.json");
    cfg << R"({"family":"balls","eps":0.5,"bogus_key":3})";
  }
  auto bad = run("--config cfg_bad.json brackets --out rep_cfg2.json");
  REQUIRE(bad.code == 2);
  REQUIRE(bad.out.find("bogus_key") != std::string::npos);

  REQUIRE(run("--config does_not_exist.json brackets --eps 0.5").code == 2);
}

TEST_CASE("resolved config round-trips through a second run") {
  auto first = run("brackets --family monotone --eps 0.5 --lambda 1 --seed 3 --out rt1.json");
  REQUIRE(first.code == 0);
  json j = json::parse(slurp("rt1.json"));
  // feed the resolved config back as a config file (minus the subcommand tag)
  json cfg = j.at("config");
  cfg.erase("subcommand");
  cfg.erase("verify");
  cfg.erase("threads");
  cfg["out"] = "rt2.json";
  {
    std::ofstream f("rt_cfg.json");
    f << cfg.dump();
  }
  auto second = run("--config rt_cfg.json brackets");
  REQUIRE(second.code == 0);
  json j2 = json::parse(slurp("rt2.json"));
  json c1 = j.at("config"), c2 = j2.at("config");
  c1.erase("out");
  c2.erase("out");
  REQUIRE(c1.dump() == c2.dump());
}

TEST_CASE("simulate: CSV layout and full float precision") {
  auto r = run("simulate --matrix \"[[2,1],[1,1]]\" --n 8 --replicas 2 --seed 5 --out orbits.csv");
  REQUIRE(r.code == 0);
  std::ifstream in("orbits.csv");
  std::string header;
  std::getline(in, header);
  REQUIRE(header == "replica,step,x1,x2");
  int lines = 0;
  std::string line, first_data;
  while (std::getline(in, line)) {
    if (lines == 0) first_data = line;
    ++lines;
  }
  REQUIRE(lines == 16);
  // 17 significant digits: the printed value must round-trip
  const auto last_comma = first_data.rfind(',');
  const double v = std::stod(first_data.substr(last_comma + 1));
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  REQUIRE(first_data.substr(last_comma + 1) == std::string(buf));
}

TEST_CASE("verify-lemmas exits cleanly on the true bounds") {
  auto r = run("verify-lemmas --pairs 40 --samples 4000 --seed 3 --out vl.json");
  REQUIRE(r.code == 0);
  json j = json::parse(slurp("vl.json"));
  REQUIRE(j.at("checks").size() == 3);
}

TEST_CASE("entropy: curve csv and convergence report") {
  auto r = run(
      "entropy --family centered-balls --delta-grid 1e-2:1e-1:6log --r 1.5 --gamma 2 "
      "--out ent.json --csv ent.csv");
  REQUIRE(r.code == 0);
  json j = json::parse(slurp("ent.json"));
  REQUIRE(j.at("extra").at("grid").size() == 6);
  REQUIRE(j.at("extra").at("converges").get<bool>());
  std::ifstream in("ent.csv");
  std::string header;
  std::getline(in, header);
  REQUIRE(header == "delta,count,cap");
}

TEST_CASE("statistics subcommands produce verdicts") {
  auto clt = run(
      "clt-check --process iid --dim 1 --n 2000 --replicas 150 --level 0.01 --seed 5 "
      "--observable \"{\\\"type\\\":\\\"rectangle-indicator\\\",\\\"lo\\\":[0],\\\"hi\\\":[0.5]}\" "
      "--out clt.json");
  REQUIRE(clt.code == 0);
  json j = json::parse(slurp("clt.json"));
  REQUIRE(j.at("extra").at("p_value").get<double>() >= 0.01);

  auto mix = run(
      "mixing-check --matrix \"[[2,1],[1,1]]\" --n 20000 --replicas 40 --max-lag 8 --seed 5 "
      "--observable \"{\\\"type\\\":\\\"character\\\",\\\"freq\\\":[1,0]}\" --out mix.json "
      "--csv mix.csv");
  REQUIRE(mix.code == 0);
  std::ifstream in("mix.csv");
  std::string header;
  std::getline(in, header);
  REQUIRE(header == "lag,cov,se");

  auto mom = run(
      "moment-check --process iid --dim 1 --p 1 --n-grid 200,500,1000,2000 --replicas 100 "
      "--seed 5 "
      "--observable \"{\\\"type\\\":\\\"rectangle-indicator\\\",\\\"lo\\\":[0],\\\"hi\\\":[0.5]}\" "
      "--out mom.json");
  REQUIRE(mom.code == 0);
  json jm = json::parse(slurp("mom.json"));
  REQUIRE(jm.at("extra").at("exponent").get<double>() <= 1.2);
}

TEST_CASE("torus-theorem reports are byte-identical across runs") {
  const std::string args =
      "torus-theorem --matrix \"[[2,1],[1,1]]\" --class balls --eps 0.05 --n 2000 --replicas 64 "
      "--indices 100 --points 60 --mc 800 --seed 13";
  auto a = run(args + " --out tt1.json");
  auto b = run(args + " --out tt2.json");
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  REQUIRE(slurp("tt1.json") == slurp("tt2.json"));
  REQUIRE(!slurp("tt1.json").empty());
}

TEST_CASE("missing subcommand is a usage error") {
  REQUIRE(run("").code == 2);
  REQUIRE(run("frobnicate").code == 2);
}
