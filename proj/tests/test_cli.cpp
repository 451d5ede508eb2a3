#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "circlekms/builtins.hpp"
#include "circlekms/report.hpp"
#include "cli.hpp"

using namespace circlekms;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "circlekms_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("example emits the Example 5 spec") {
  const auto r = run({"example", "--name", "example5", "--alpha", "121/10"});
  REQUIRE(r.code == 0);
  CHECK(r.out ==
        "cmap v1\n"
        "breakpoints 0 1/8 1/4 3/8 1/2 7/12 2/3 3/4 5/6 11/12 1\n"
        "values 0 121/80 0 121/80 0 121/120 0 121/120 0 121/120 0\n"
        "assume-exact false\n");
  CHECK(parse_map(r.out) == builtins::example5(Rational(121, 10)));
}

TEST_CASE("property: emitted specs round-trip") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<long> num(1, 400), den(1, 30);
  for (int i = 0; i < 40; ++i) {
    const Rational alpha = ratio(num(rng), den(rng));
    const bool exact = i % 2 == 0;
    std::vector<std::string> args{"example", "--name", "example5", "--alpha", to_string(alpha)};
    if (exact) args.push_back("--assume-exact");
    const auto r = run(args);
    REQUIRE(r.code == 0);
    CHECK(parse_map(r.out) == builtins::example5(alpha, exact));
  }
  for (const auto& name : {"tent", "doubling"}) {
    const auto r = run({"example", "--name", name});
    REQUIRE(r.code == 0);
    CHECK(parse_map(r.out) == builtins::by_name(name));
  }
}

TEST_CASE("property: rationals round-trip through JSON") {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<long> num(-100000, 100000), den(1, 100000);
  for (int i = 0; i < 200; ++i) {
    const Rational r = ratio(num(rng), den(rng));
    CHECK(rational_from_json(Json::parse(to_json(r).dump())) == r);
  }
  CHECK_THROWS_AS(rational_from_json(Json{{"num", 1}, {"den", 2}}), ValidationError);
}

TEST_CASE("classify from a spec file") {
  const auto spec = scratch("ex5.cmap");
  REQUIRE(run({"example", "--name", "example5", "--alpha", "121/10", "-o", spec.string()}).code == 0);
  const auto r = run({"classify", "--map", spec.string(), "--depth", "50"});
  REQUIRE(r.code == 0);
  const auto j = Json::parse(r.out);
  CHECK(j["N"] == 2);
  CHECK(j["ground_state_dims"] == Json::array({2, 3}));
  CHECK(j["entropy"]["exact_form"] == "log(121/10)");
  CHECK(j["simplicity"]["status"] == "simple");
  CHECK(j["zero_kms"] == "none");
  CHECK(j["catalog"]["critical_count"] == 10);
  CHECK(j["depth"] == 50);
  CHECK(parse_map(j["map"]["spec"].get<std::string>()) == builtins::example5(Rational(121, 10)));
}

TEST_CASE("empty ground state list") {
  const auto r = run({"classify", "--builtin", "tent", "--depth", "10"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("\"ground_state_dims\": []") != std::string::npos);
  const auto j = Json::parse(r.out);
  CHECK(j["summary"] == "unique KMS state at beta = log(2) only");
}

TEST_CASE("verify reports exact zeros") {
  const auto r = run({"verify", "--builtin", "example5", "--q", "1/13", "--samples", "100", "--seed", "7"});
  REQUIRE(r.code == 0);
  const auto v = Json::parse(r.out)["verification"];
  CHECK(v["all_exact_zero"] == true);
  CHECK(v["seed"] == 7);
  REQUIRE(v["classes"].size() == 2);
  for (const auto& c : v["classes"]) {
    CHECK(c["kms"]["exact_zero"] == true);
    CHECK(c["kms"]["pairs"] == 100);
    CHECK(c["conformal"]["exact_zero"] == true);
    CHECK(c["conformal"]["bisections"] == 100);
    CHECK(c["conformal"].contains("skipped"));
    CHECK(c["scaling"]["exact_zero"] == true);
    CHECK(c["control"]["detected"] == true);
  }
}

TEST_CASE("measure JSON and atoms CSV") {
  const auto csv = scratch("atoms.csv");
  const auto r = run({"measure", "--builtin", "example5", "--class", "1", "--q", "1/13", "--depth", "2", "--csv",
                      csv.string()});
  REQUIRE(r.code == 0);
  const auto j = Json::parse(r.out)["measure"];
  CHECK(j["atom_count"] == 381);
  CHECK(rational_from_json(j["total_weight"]) == 1);
  CHECK(j["class_weights"].size() == 3);
  const auto text = slurp(csv);
  CHECK(text.rfind("position_p,position_q,level,weight_num,weight_den,via_terminal\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 382);
}

TEST_CASE("determinism") {
  const std::vector<std::vector<std::string>> requests{
      {"verify", "--builtin", "example5", "--q", "1/13", "--samples", "30", "--seed", "3"},
      {"entropy", "--builtin", "example5", "--alpha", "9"},
      {"analyze", "--builtin", "tent", "--depth", "10"},
      {"measure", "--builtin", "example5", "--class", "0", "--q", "1/20", "--depth", "2"},
  };
  for (const auto& req : requests) {
    const auto a = run(req), b = run(req);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
  }
  const auto c1 = scratch("c1.csv"), c2 = scratch("c2.csv");
  run({"measure", "--builtin", "example5", "--class", "0", "--q", "1/20", "--depth", "2", "--csv", c1.string()});
  run({"measure", "--builtin", "example5", "--class", "0", "--q", "1/20", "--depth", "2", "--csv", c2.string()});
  CHECK(slurp(c1) == slurp(c2));
}

TEST_CASE("exit codes") {
  CHECK(run({"classify", "--builtin", "nope"}).code == 2);
  CHECK(run({"verify", "--builtin", "example5", "--q", "x/y"}).code == 2);
  CHECK(run({"verify", "--builtin", "example5", "--q", "3/2"}).code == 2);
  CHECK(run({"verify", "--builtin", "example5", "--q", "0"}).code == 2);
  const auto div = run({"measure", "--builtin", "example5", "--class", "0", "--q", "1/12"});
  CHECK(div.code == 2);
  CHECK(div.err.find("divergent partition function") != std::string::npos);
  const auto li = run({"classify", "--builtin", "doubling"});
  CHECK(li.code == 2);
  CHECK(li.err.find("locally injective map") != std::string::npos);
  CHECK(run({"measure", "--builtin", "example5", "--class", "5", "--q", "1/13"}).code == 2);
  CHECK(run({"classify", "--map", "/nonexistent/file"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"measure", "--builtin", "example5", "--class", "0", "--q", "1/13", "--depth", "40"}).code == 3);

  const auto bad = scratch("bad.cmap");
  std::ofstream(bad) << "cmap v1\nbreakpoints 0 1/2 1\nvalues 0 1 1\n";
  const auto r = run({"classify", "--map", bad.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 3") != std::string::npos);
}
