#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = RIDGEPDE_CLI_PATH;

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ridgepde-cli-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("list and usage errors") {
  CHECK(run("list") == 0);
  CHECK(run("") == 2);
  CHECK(run("run") == 2);
  CHECK(run("run ex9-unknown") == 2);
  CHECK(run("run ex1-neumann --n-schedule 8,4") == 2);
  CHECK(run("run ex1-neumann --config /nonexistent/config.json") == 2);
}

TEST_CASE("identical runs give byte-identical csv") {
  const fs::path a = fresh("a"), b = fresh("b");
  const std::string args = "run ex1-pinn --n-schedule 4,8 --quiet ";
  REQUIRE(run(args + "--out " + a.string()) == 0);
  REQUIRE(run(args + "--out " + b.string()) == 0);
  const std::string csv = slurp(a / "ex1-pinn.csv");
  CHECK(!csv.empty());
  CHECK(csv == slurp(b / "ex1-pinn.csv"));
  CHECK(csv.rfind("n,pinn_loss,L2,H1,order_pinn_loss,order_L2,order_H1\n", 0) == 0);
  CHECK(fs::exists(a / "ex1-pinn.txt"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("config file, output directory variable and breakpoints") {
  const fs::path dir = fresh("env");
  const fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << R"({"n_schedule": [4, 8], "quadrature": {"cells": 200}, "output": {"breakpoints": true}})";
  const std::string cmd = "RIDGEPDE_OUT_DIR=" + dir.string() + " " + kCli + " run ex2-peaks --quiet --config " +
                          cfg.string() + " >/dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(dir / "ex2-peaks.csv"));
  CHECK(slurp(dir / "ex2-peaks-breakpoints.csv").rfind("breakpoint\n", 0) == 0);

  std::ofstream(cfg) << R"({"argmax": {"unknown": 1}})";
  CHECK(run("run ex2-peaks --config " + cfg.string()) == 2);
  fs::remove_all(dir);
}
