#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rndrace/cli.hpp"
#include "rndrace/error.hpp"
#include "rndrace/io.hpp"
#include "rndrace/model.hpp"
#include "rndrace/solver.hpp"

using namespace rndrace;
using doctest::Approx;

namespace {

struct Result {
  int status = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "rndrace");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

const std::vector<std::string> kReference{"--alpha", "0.8", "--H",  "1",   "--mu", "0.5",
                                          "--p1",    "1",   "--p2", "0.2", "--c",  "0.8"};

// Reference flags go first so later flags in `args` override them.
std::vector<std::string> with_reference(std::vector<std::string> args) {
  args.insert(args.begin() + 1, kReference.begin(), kReference.end());
  return args;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("rndrace_test_" + name)).string();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("format_double round-trips") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 10000; ++i) {
    const double v = std::ldexp(u(rng), static_cast<int>(u(rng) * 20));
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
}

TEST_CASE("params_from_json accepts flat and wrapped objects") {
  const Json flat = Json::parse(R"({"alpha":0.8,"H":1,"mu":0.5,"p1":1,"p2":0.2,"c":0.8})");
  const auto p = params_from_json(flat);
  CHECK(p.prior_feasible == 0.8);
  CHECK(p.cost_rate == 0.8);
  const auto q = params_from_json(Json{{"params", flat}, {"cutoffs", Json::object()}});
  CHECK(q.stage2_rate == 0.5);
  CHECK_THROWS_WITH_AS(params_from_json(Json::parse(R"({"alpha":0.8,"H":1})")),
                       "missing field \"mu\"", ValidationError);
  CHECK_THROWS_AS(params_from_json(Json::parse(R"({"alpha":"x","H":1,"mu":1,"p1":1,"p2":1,"c":1})")),
                  ValidationError);
}

TEST_CASE("check reports the assumptions") {
  const auto r = run(with_reference({"check"}));
  REQUIRE(r.status == kExitOk);
  const auto j = Json::parse(r.out);
  CHECK(j["assumptions"]["a1_holds"] == true);
  CHECK(j["assumptions"]["a2_holds"] == true);
  CHECK(j["assumptions"]["a1_margin"].get<double>() == Approx(0.16));
  CHECK(j["assumptions"]["a3_holds"] == false);

  const auto violated = run({"check", "--alpha", "0.8", "--H", "1", "--mu", "0.5", "--p1", "0.1",
                             "--p2", "1", "--c", "0.8"});
  CHECK(violated.status == kExitOk);
  CHECK(Json::parse(violated.out)["assumptions"]["a2_holds"] == false);
}

TEST_CASE("check input errors") {
  const std::string path = temp_path("partial.json");
  write_file(path, R"({"alpha":0.8,"H":1,"p1":1,"p2":0.2,"c":0.8})");
  const auto missing = run({"check", "--params", path});
  CHECK(missing.status == kExitValidation);
  CHECK(missing.err.find("missing field \"mu\"") != std::string::npos);

  const auto bad_alpha = run(with_reference({"check", "--alpha", "1.2"}));
  CHECK(bad_alpha.status == kExitValidation);
  CHECK(bad_alpha.err.find("alpha must lie in (0,1)") != std::string::npos);

  write_file(path, "{not json");
  CHECK(run({"check", "--params", path}).status == kExitValidation);
  CHECK(run({"check", "--params", temp_path("does_not_exist.json")}).status == kExitValidation);
  CHECK(run({"frobnicate"}).status == kExitValidation);
  CHECK(run({}).status == kExitValidation);
  CHECK(run(with_reference({"check", "--format", "xml"})).status == kExitValidation);
  std::remove(path.c_str());
}

TEST_CASE("flags override file values") {
  const std::string path = temp_path("file.json");
  write_file(path, R"({"alpha":0.8,"H":1,"mu":0.5,"p1":1,"p2":0.2,"c":0.8})");
  const auto r = run({"solve", "--params", path, "--c", "0.2"});
  REQUIRE(r.status == kExitOk);
  CHECK(Json::parse(r.out)["params"]["c"].get<double>() == 0.2);
  std::remove(path.c_str());
}

TEST_CASE("solve outputs") {
  const auto r = run(with_reference({"solve"}));
  REQUIRE(r.status == kExitOk);
  const auto j = Json::parse(r.out);
  CHECK(std::abs(j["cutoffs"]["t1"].get<double>() - 0.103) < 2e-3);
  CHECK(std::abs(j["cutoffs"]["t2"].get<double>() - 0.294) < 2e-3);
  CHECK(std::abs(j["monopoly"]["t_star"].get<double>() - 0.693) < 1e-3);

  const auto cheap = Json::parse(run(with_reference({"solve", "--c", "0.2"})).out);
  CHECK(std::abs(cheap["cutoffs"]["t1"].get<double>() - 1.346) < 2e-3);
  CHECK(std::abs(cheap["cutoffs"]["t2"].get<double>() - 1.537) < 2e-3);
  CHECK(std::abs(cheap["monopoly"]["t_star"].get<double>() - 2.996) < 1e-3);

  const auto a2 = run(with_reference({"solve", "--p1", "0.1", "--p2", "1"}));
  CHECK(a2.status == kExitAssumption);
  CHECK(a2.err.find("no disclose region supported") != std::string::npos);
  const auto a1 = run(with_reference({"solve", "--c", "2"}));
  CHECK(a1.status == kExitAssumption);
  CHECK(a1.err.find("exit at time zero") != std::string::npos);

  const auto text = run(with_reference({"solve", "--format", "text"}));
  CHECK(text.out.find("cutoffs.t2: 0.293536\n") != std::string::npos);
}

TEST_CASE("curves schema and content") {
  const auto r = run(with_reference({"curves"}));
  REQUIRE(r.status == kExitOk);
  CHECK(r.out.find('\r') == std::string::npos);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() >= 513);
  CHECK(r.out.substr(0, r.out.find('\n')) ==
        "t,belief,disclose_payoff,withhold_payoff,stay_rate,cost_rate");
  CHECK(std::stod(rows[1][0]) == 0.0);
  CHECK(std::stod(rows[1][1]) == Approx(0.8).epsilon(1e-15));

  const auto eq = solve_equilibrium(reference_params());
  double prev_diff = 0.0;
  bool crossed = false, found_exit = false;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == 6);
    const double t = std::stod(rows[i][0]);
    const double diff = std::stod(rows[i][2]) - std::stod(rows[i][3]);
    if (t < eq.t1) CHECK(diff > 0.0);
    if (t > eq.t1 && t <= eq.t2) {
      CHECK(diff < 0.0);
      if (prev_diff > 0.0) crossed = true;
    }
    prev_diff = diff;
    if (t == eq.t2) {
      found_exit = true;
      CHECK(std::abs(std::stod(rows[i][4]) - 0.8) < 1e-6);
    }
    CHECK(std::stod(rows[i][5]) == 0.8);
  }
  CHECK(crossed);
  CHECK(found_exit);
  CHECK(std::stod(rows.back()[0]) == Approx(eq.t2 + withhold_length(reference_params())));
}

TEST_CASE("curves grid option") {
  const auto r = run(with_reference({"curves", "--grid", "0:1:5"}));
  REQUIRE(r.status == kExitOk);
  const auto rows = parse_csv(r.out);
  CHECK(rows.size() == 1 + 5 + 2);
  CHECK(run(with_reference({"curves", "--grid", "1:0:5"})).status == kExitValidation);
  CHECK(run(with_reference({"curves", "--grid", "abc"})).status == kExitValidation);
  CHECK(run(with_reference({"curves", "--format", "json", "--grid", "10"})).status == kExitOk);
}

TEST_CASE("solve output round-trips into curves") {
  const std::string solved = temp_path("solved.json");
  const auto s = run(with_reference({"solve", "--out", solved}));
  REQUIRE(s.status == kExitOk);
  CHECK(s.out.empty());
  const auto from_file = run({"curves", "--params", solved});
  const auto direct = run(with_reference({"curves"}));
  REQUIRE(from_file.status == kExitOk);
  CHECK(from_file.out == direct.out);

  // Stored cutoffs are used as written.
  auto doc = Json::parse(std::ifstream(solved));
  const double t2 = doc["cutoffs"]["t2"].get<double>();
  CHECK(t2 == solve_equilibrium(reference_params()).t2);
  std::remove(solved.c_str());
}

TEST_CASE("simulate is deterministic and prints its seed") {
  const auto a = run(with_reference({"simulate", "--trials", "1", "--seed", "0"}));
  const auto b = run(with_reference({"simulate", "--trials", "1", "--seed", "0"}));
  REQUIRE(a.status == kExitOk);
  CHECK(a.out == b.out);
  CHECK(Json::parse(a.out)["seed"] == 0);
  const auto text = run(with_reference({"simulate", "--trials", "1000", "--seed", "17", "--format", "text"}));
  CHECK(text.out.find("seed: 17") != std::string::npos);
  const auto csv = run(with_reference({"simulate", "--trials", "1000", "--format", "csv", "--threads", "2"}));
  CHECK(parse_csv(csv.out).size() == 2);
  const auto custom = run(with_reference(
      {"simulate", "--trials", "100", "--disclose-until", "0", "--exit-at", "0.5",
       "--planned-disclosure", "0.3"}));
  REQUIRE(custom.status == kExitOk);
  CHECK(Json::parse(custom.out)["strategy"]["planned_disclosure"].get<double>() == 0.3);
  CHECK(run(with_reference({"simulate", "--exit-at", "-1"})).status == kExitValidation);
}

TEST_CASE("scan command") {
  const auto r = run(with_reference({"scan", "--trials", "20000", "--grid", "0.05,0.15"}));
  REQUIRE(r.status == kExitOk);
  const auto j = Json::parse(r.out);
  CHECK(j["seed"] == 0);
  CHECK(j["report"]["grid"].size() >= 10);
  CHECK(j["report"].contains("equilibrium_confirmed"));
  const auto csv = run(with_reference({"scan", "--trials", "1000", "--format", "csv"}));
  CHECK(csv.status == kExitOk);
}

TEST_CASE("welfare command") {
  const auto r = run(with_reference({"welfare"}));
  REQUIRE(r.status == kExitOk);
  const auto w = Json::parse(r.out)["welfare"];
  CHECK(w["preferred"] == "Monopoly");
  CHECK(std::abs(w["total_time_duopoly"].get<double>() - 0.588) < 2e-3);
  CHECK(std::abs(w["total_time_monopoly"].get<double>() - 0.693) < 1e-3);
  const auto cheap = Json::parse(run(with_reference({"welfare", "--c", "0.2"})).out)["welfare"];
  CHECK(cheap["preferred"] == "Competition");
  CHECK(std::abs(cheap["total_time_duopoly"].get<double>() - 3.074) < 2e-3);
  CHECK(std::abs(cheap["total_time_monopoly"].get<double>() - 2.996) < 1e-3);
  const auto social = Json::parse(run(with_reference({"welfare", "--social-value", "2"})).out);
  CHECK(social["social"]["t_hat"].get<double>() == Approx(1.7918).epsilon(1e-4));
  CHECK(run(with_reference({"welfare", "--social-value", "1"})).status == kExitValidation);
}

TEST_CASE("sweep command") {
  const auto r = run(with_reference({"sweep", "--grid", "c=0.1:1.0:91", "--format", "csv"}));
  REQUIRE(r.status == kExitOk);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 92);
  int errors = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double c = std::stod(rows[i][5]);
    if (rows[i][6] == "error") {
      ++errors;
      CHECK(c >= 0.96 - 1e-12);
    } else {
      CHECK(c < 0.96);
    }
  }
  CHECK(errors == 5);
  const auto two = run(with_reference({"sweep", "--grid", "c=0.2,0.8", "--grid", "alpha=0.5,0.8"}));
  REQUIRE(two.status == kExitOk);
  CHECK(Json::parse(two.out)["points"].size() == 4);
  CHECK(run(with_reference({"sweep"})).status == kExitValidation);
  CHECK(run(with_reference({"sweep", "--grid", "zeta=1:2:3"})).status == kExitValidation);
  CHECK(run(with_reference({"sweep", "--grid", "alpha=0.5:1.5:3"})).status == kExitValidation);
}

TEST_CASE("output file errors map to validation status") {
  CHECK(run(with_reference({"solve", "--out", "/nonexistent-dir/x.json"})).status ==
        kExitValidation);
}

}  // TEST_SUITE
