#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "lcs/scalar_field.hpp"

namespace {

std::string cli() {
  const char* p = std::getenv("LCS_CLI");
  REQUIRE_MESSAGE(p != nullptr, "LCS_CLI must point at the built binary");
  return p;
}

struct RunResult {
  int exit_code;
  std::string stdout_text;
};

RunResult run(const std::string& args) {
  const std::string out_file = "cli_stdout.txt";
  const std::string cmd = cli() + " " + args + " > " + out_file + " 2> cli_stderr.txt";
  const int status = std::system(cmd.c_str());
  std::ifstream in(out_file);
  std::ostringstream ss;
  ss << in.rdbuf();
#ifdef _WIN32
  const int code = status;
#else
  const int code = WEXITSTATUS(status);
#endif
  return {code, ss.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("list-flows") {
  const RunResult r = run("list-flows");
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("double-gyre") != std::string::npos);
  CHECK(r.stdout_text.find("moving-separation") != std::string::npos);
  CHECK(r.stdout_text.find("linear-saddle") != std::string::npos);
}

TEST_CASE("ftle on the linear saddle produces a constant-one field") {
  const RunResult r = run(
      "ftle --flow linear-saddle --grid -1:1:51,-1:1:51 --t0 0 --horizon 1 "
      "--dt 0.01 --out cli_f.grid");
  REQUIRE(r.exit_code == 0);
  CHECK(r.stdout_text.find("kind=ftle") != std::string::npos);
  const lcs::ScalarGrid g = lcs::read_grid("cli_f.grid");
  CHECK(g.spec.nx == 51);
  for (double v : g.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("identical invocations are byte-identical") {
  const std::string args =
      "fsle --flow double-gyre --grid 0.1:0.9:7,0.1:0.9:7 --t0 0 --r 2 "
      "--delta0 1e-3 --max-horizon 20 --dt 0.01 --out ";
  CHECK(run(args + "cli_a.grid").exit_code == 0);
  CHECK(run(args + "cli_b.grid --threads 3").exit_code == 0);
  CHECK(slurp("cli_a.grid") == slurp("cli_b.grid"));
}

TEST_CASE("isle insensitivity regime summary") {
  const RunResult r = run(
      "isle --flow transition-saddle --param a=0.5,b=0.6 --grid -1:1:11,-1:1:11 "
      "--r 1.5 --max-horizon 10 --dt 0.005 --out cli_isle.grid");
  REQUIRE(r.exit_code == 0);
  const lcs::ScalarGrid g = lcs::read_grid("cli_isle.grid");
  for (double v : g.values) CHECK(std::abs(v - 1.0) <= 1e-3);
}

TEST_CASE("fsle on the ill-posed transient saddle reports 100% undefined") {
  const RunResult r = run(
      "fsle --flow transient-saddle --param a=0.5,b=0.6 --grid -1:1:5,-1:1:5 "
      "--r 2.1 --delta0 1e-3 --max-horizon 50 --dt 0.01 --out cli_u.grid");
  REQUIRE(r.exit_code == 0);
  CHECK(r.stdout_text.find("undefined_pct=100") != std::string::npos);
  const lcs::ScalarGrid g = lcs::read_grid("cli_u.grid");
  for (double v : g.values) CHECK(lcs::ScalarGrid::missing(v));
}

TEST_CASE("ridges subcommand extracts the analytic test ridge") {
  lcs::GridSpec spec{-2.0, 2.0, -2.0, 2.0, 201, 201};
  lcs::ScalarGrid g(spec);
  for (int j = 0; j < spec.ny; ++j)
    for (int i = 0; i < spec.nx; ++i) {
      const double x1 = spec.x1(i), x2 = spec.x2(j);
      const double q = x1 * x1 - 1.0;
      g.at(i, j) = std::exp(-x2 * x2) * (1.0 - 0.25 * q * q);
    }
  lcs::write_grid(g, "cli_ridge_in.grid");
  const RunResult r = run("ridges --in cli_ridge_in.grid --out cli_ridges.csv");
  REQUIRE(r.exit_code == 0);
  CHECK(r.stdout_text.find("curves=1") != std::string::npos);
  std::ifstream csv("cli_ridges.csv");
  std::string line;
  REQUIRE(std::getline(csv, line));
  CHECK(line == "curve_id,x1,x2");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    CHECK(line.rfind("0,", 0) == 0);  // single curve id
  }
  CHECK(rows >= 3);
}

TEST_CASE("jumps on the linear saddle flags nothing") {
  const RunResult r = run(
      "jumps --flow linear-saddle --grid -1:1:5,-1:1:5 --r 2 --max-horizon 10 "
      "--dt 0.01 --out cli_flags.csv");
  REQUIRE(r.exit_code == 0);
  CHECK(r.stdout_text.find("flags=0") != std::string::npos);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run("ftle --no-such-flag 1 --out x.grid").exit_code == 2);
  CHECK(run("ftle --flow linear-saddle --grid bogus --horizon 1 --out x.grid").exit_code ==
        2);
  CHECK(run("").exit_code == 2);  // missing subcommand
}

TEST_CASE("runtime errors exit with code 1") {
  CHECK(run("ridges --in does_not_exist.grid --out x.csv").exit_code == 1);
  CHECK(run("ftle --flow linear-saddle --param bogus=1 --horizon 1 --out x.grid")
            .exit_code == 1);
}
