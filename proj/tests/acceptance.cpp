// Acceptance runs: `acceptance <criterion> [property-test-binary]`.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "ridgepde/experiment.hpp"

using namespace ridgepde;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

/// Fitted order of `column` over the rows whose n lies in [lo, hi] and whose value passes `keep`.
std::optional<double> fit(const ConvergenceReport& r, const std::string& column, int lo, int hi,
                          double floor = 0.0) {
  std::vector<double> n, e;
  for (const auto& row : r.rows) {
    const double v = row.errors.at(column);
    if (row.n < lo || row.n > hi || !(v > floor)) continue;
    n.push_back(row.n);
    e.push_back(v);
  }
  return fitted_order(n, e);
}

struct Run {
  ExperimentResult result;
  double seconds = 0.0;
};

Run run_preset(const std::string& preset) {
  ExperimentConfig c = default_config(preset);
  if (const char* dir = std::getenv("RIDGEPDE_ACCEPTANCE_OUT"); dir && *dir) {
    c.out_dir = dir;
    std::filesystem::create_directories(c.out_dir);
  }
  const auto t0 = std::chrono::steady_clock::now();
  Run run{run_experiment(c, &std::cerr), 0.0};
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (c.out_dir != ".") write_outputs(c, run.result);
  std::cout << format_table(run.result.report);
  return run;
}

std::string describe_fit(const std::string& name, const std::optional<double>& v) {
  return name + " order " + (v ? fmt(*v) : std::string("undefined"));
}

Outcome order_at_least(const std::string& preset, const std::string& column, double target, int lo, int hi,
                       double budget) {
  const Run run = run_preset(preset);
  const auto order = fit(run.result.report, column, lo, hi);
  Outcome o;
  o.pass = order && *order >= target && run.seconds <= budget;
  o.detail = describe_fit(column, order) + " (need >= " + fmt(target) + "), " + fmt(run.seconds, 1) + " s (limit " +
             fmt(budget, 0) + " s)";
  return o;
}

Outcome criterion1() {
  const Run run = run_preset("ex1-neumann");
  const auto l2 = fit(run.result.report, "L2", 16, 256);
  const auto h1 = fit(run.result.report, "H1", 16, 256);
  Outcome o;
  o.pass = l2 && h1 && *l2 >= 2.5 && *h1 >= 1.7 && run.seconds <= 300.0;
  o.detail = describe_fit("L2", l2) + " (need >= 2.50), " + describe_fit("H1", h1) + " (need >= 1.70), " +
             fmt(run.seconds, 1) + " s (limit 300 s)";
  return o;
}

Outcome criterion2() {
  const Run run = run_preset("ex1-dirichlet");
  const auto order = fit(run.result.report, "energy_penalized", 16, 256);
  Outcome o;
  o.pass = order && std::abs(*order - 1.0) <= 0.2 && run.seconds <= 300.0;
  o.detail = describe_fit("energy_penalized", order) + " (need 1.00 +- 0.20), " + fmt(run.seconds, 1) +
             " s (limit 300 s)";
  return o;
}

Outcome criterion5() {
  const Run run = run_preset("ex5-highdim");
  const auto& r = run.result.report;
  const double noise = std::stod(r.meta("noise_floor_L2").value_or("0"));
  int kept = 0;
  for (const auto& row : r.rows)
    if (row.n <= 64 && row.errors.at("L2") > 10.0 * noise) ++kept;
  const auto order = fit(r, "L2", 16, 64, 10.0 * noise);
  Outcome o;
  o.pass = order && *order >= 2.5 && run.seconds <= 1800.0;
  o.detail = describe_fit("L2", order) + " over " + std::to_string(kept) + " rows above 10x noise floor " +
             fmt(noise * 10.0, 8) + " (need >= 2.50), " + fmt(run.seconds, 1) + " s (limit 1800 s)";
  return o;
}

Outcome criterion8(const std::string& binary) {
  if (binary.empty()) return {false, "property test binary not given"};
  const auto t0 = std::chrono::steady_clock::now();
  const int status = std::system(binary.c_str());
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Outcome o;
  o.pass = status == 0 && seconds < 120.0;
  o.detail = std::string("property suite ") + (status == 0 ? "passed" : "failed") + ", " + fmt(seconds, 1) +
             " s (limit 120 s)";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <1-8> [property-test-binary]\n";
    return 2;
  }
  const int k = std::atoi(argv[1]);
  Outcome o;
  try {
    switch (k) {
      case 1: o = criterion1(); break;
      case 2: o = criterion2(); break;
      case 3: o = order_at_least("ex1-pinn", "pinn_loss", 3.0, 16, 128, 600.0); break;
      case 4: o = order_at_least("ex3-2d", "H1", 1.25, 16, 128, 1800.0); break;
      case 5: o = criterion5(); break;
      case 6: o = order_at_least("ex6-poisson-boltzmann", "relative_gap", 0.8, 16, 512, 1800.0); break;
      case 7: o = order_at_least("ex4-biharmonic", "energy", 1.1, 16, 64, 1800.0); break;
      case 8: o = criterion8(argc > 2 ? argv[2] : ""); break;
      default: std::cerr << "unknown criterion " << argv[1] << "\n"; return 2;
    }
  } catch (const std::exception& e) {
    o = {false, std::string("error: ") + e.what()};
  }
  std::cout << "criterion " << k << ": " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail << std::endl;
  return o.pass ? 0 : 1;
}
