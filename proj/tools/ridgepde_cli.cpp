#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ridgepde/error.hpp"
#include "ridgepde/experiment.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ridgepde::Error(ridgepde::ErrorKind::Usage, "cannot read config file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Greedy training of shallow ridge-function networks for PDE benchmarks"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "List available presets");

  auto* run = app.add_subcommand("run", "Run a preset and write its convergence table");
  std::string preset;
  std::vector<int> schedule;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string config_file;
  bool full_scale = false;
  bool quiet = false;
  run->add_option("preset", preset, "Preset name (see 'list')")->required();
  auto* schedule_opt = run->add_option("--n-schedule", schedule, "Neuron counts, strictly increasing")->delimiter(',');
  auto* seed_opt = run->add_option("--seed", seed, "Sampling seed");
  auto* out_opt = run->add_option("--out", out_dir, "Output directory (default: $RIDGEPDE_OUT_DIR or .)");
  run->add_option("--config", config_file, "JSON config file");
  run->add_flag("--full-scale", full_scale, "Use the full discretization sizes and schedules");
  run->add_flag("--quiet", quiet, "Suppress progress on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (*list) {
    for (const auto& name : ridgepde::preset_names()) std::cout << name << "\n";
    return 0;
  }

  try {
    ridgepde::ExperimentConfig config = ridgepde::default_config(preset, full_scale);
    if (const char* env = std::getenv("RIDGEPDE_OUT_DIR"); env && *env) config.out_dir = env;
    if (!config_file.empty()) ridgepde::apply_config_json(config, read_file(config_file));
    if (*schedule_opt) config.n_schedule = schedule;
    if (*seed_opt) config.seed = seed;
    if (*out_opt) config.out_dir = out_dir;
    ridgepde::validate(config);

    const ridgepde::ExperimentResult result = ridgepde::run_experiment(config, quiet ? nullptr : &std::cerr);
    const auto files = ridgepde::write_outputs(config, result);
    std::cout << ridgepde::format_table(result.report);
    for (const auto& f : files) std::cerr << "wrote " << f << "\n";
    return 0;
  } catch (const ridgepde::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ridgepde::ErrorKind::Usage ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
