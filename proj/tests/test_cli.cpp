#include "pathint/cli.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"pathint"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return pathint::cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/pathint_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("unknown flags exit with code 2") {
  REQUIRE(run_cli({"det", "--nonsense", "1"}) == 2);
  REQUIRE(run_cli({"det", "--method", "bogus"}) == 2);
  REQUIRE(run_cli({"mc", "--check", "cov"}) == 2);  // missing required seed
}

TEST_CASE("det subcommand reports the oscillator determinant") {
  TempFile f("det.json");
  REQUIRE(run_cli({"det", "--method", "limit", "--omega", "1", "--T", "1", "--family",
                   "zab", "--n", "800", "--out", f.path}) == 0);
  auto j = nlohmann::json::parse(slurp(f.path));
  REQUIRE(j["schema"] == 1);
  REQUIRE(std::abs(j["value"].get<double>() - std::sin(1.0)) < 1e-3);
  REQUIRE(j["index"] == 0);
}

TEST_CASE("greens subcommand writes the comparison table") {
  TempFile f("greens.csv");
  REQUIRE(run_cli({"greens", "--family", "zab", "--n", "40", "--out", f.path}) == 0);
  std::string text = slurp(f.path);
  REQUIRE(text.rfind("t,u,G_closed,G_discrete,abs_err", 0) == 0);
  // 39 free nodes -> 39^2 data rows + header
  REQUIRE(std::count(text.begin(), text.end(), '\n') == 39 * 39 + 1);
}

TEST_CASE("mc output is byte-identical for a fixed seed") {
  TempFile a("mc_a.json"), b("mc_b.json");
  std::vector<std::string> args{"mc",     "--check", "cov",  "--family", "zab",
                                "--samples", "2000", "--seed", "7",      "--grid-n",
                                "32",     "--out"};
  auto run_with = [&](const std::string& path) {
    auto full = args;
    full.push_back(path);
    REQUIRE(run_cli(full) == 0);
  };
  run_with(a.path);
  run_with(b.path);
  REQUIRE(slurp(a.path) == slurp(b.path));
  auto j = nlohmann::json::parse(slurp(a.path));
  REQUIRE(std::abs(j["estimate"].get<double>() - j["oracle"].get<double>()) <
          10.0 * j["std_err"].get<double>() + 1e-3);
}

TEST_CASE("wkb subcommand carries the free modulus") {
  TempFile f("wkb.json");
  REQUIRE(run_cli({"wkb", "--kind", "pp", "--omega", "0", "--T", "2", "--xa", "0",
                   "--xb", "1", "--n", "200", "--out", f.path}) == 0);
  auto j = nlohmann::json::parse(slurp(f.path));
  // |K| = (2 pi T)^{-1/2} for the free line
  REQUIRE(j["modulus"].get<double>() ==
          Catch::Approx(1.0 / std::sqrt(2.0 * pathint::pi * 2.0)).epsilon(1e-10));
}

TEST_CASE("ab subcommand emits the sweep csv") {
  TempFile f("ab.csv");
  REQUIRE(run_cli({"ab", "--sweep", "c", "--points", "16", "--T", "0.4", "--out",
                   f.path}) == 0);
  std::string text = slurp(f.path);
  REQUIRE(text.rfind("c,modulus,phase", 0) == 0);
  REQUIRE(std::count(text.begin(), text.end(), '\n') == 17);
}

TEST_CASE("develop subcommand reports the great-circle deviation") {
  TempFile f("dev.csv");
  REQUIRE(run_cli({"develop", "--n", "500", "--duration", "1.0", "--out", f.path}) == 0);
  std::string text = slurp(f.path);
  REQUIRE(text.rfind("t,x,y,z", 0) == 0);
}

TEST_CASE("csv format mirrors the json fields") {
  TempFile j("det_f.json"), c("det_f.csv");
  REQUIRE(run_cli({"det", "--method", "jacobi", "--omega", "1", "--T", "1", "--family",
                   "zab", "--n", "400", "--out", j.path}) == 0);
  REQUIRE(run_cli({"det", "--method", "jacobi", "--omega", "1", "--T", "1", "--family",
                   "zab", "--n", "400", "--format", "csv", "--out", c.path}) == 0);
  std::string csv = slurp(c.path);
  REQUIRE(csv.rfind("value,index,method,n,err_est", 0) == 0);
  auto parsed = nlohmann::json::parse(slurp(j.path));
  // first CSV value equals the JSON value
  std::string second_line = csv.substr(csv.find('\n') + 1);
  double csv_value = std::stod(second_line.substr(0, second_line.find(',')));
  REQUIRE(csv_value == Catch::Approx(parsed["value"].get<double>()));
  REQUIRE(run_cli({"det", "--method", "jacobi", "--format", "yaml"}) == 2);
}
