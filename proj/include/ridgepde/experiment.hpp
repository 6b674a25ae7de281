#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ridgepde/argmax.hpp"
#include "ridgepde/dictionary.hpp"
#include "ridgepde/greedy.hpp"
#include "ridgepde/metrics.hpp"

namespace ridgepde {

enum class Algorithm { Oga, Rga };
enum class LossKind { Energy, Penalized, Pinn, Nonlinear };

struct QuadratureSettings {
  int t = 2;
  /// Assembly cells per axis for Gauss rules.
  int cells = 0;
  /// Error-measurement rule refinement relative to the assembly rule.
  int fine_factor = 2;
  /// Interior sample count for Monte-Carlo / Halton rules (or the floor for n-dependent rules).
  long samples = 0;
  /// Samples per boundary face for randomly sampled boundaries.
  long boundary_samples = 0;
};

struct ExperimentConfig {
  std::string preset;
  std::vector<int> n_schedule;
  std::uint64_t seed = 1;
  QuadratureSettings quadrature;
  SearchConfig argmax;
  /// Restrict 1-D kinks to the edges of the Gauss assembly cells.
  bool align_kinks = true;
  Activation activation;
  Algorithm algorithm = Algorithm::Oga;
  LossKind loss = LossKind::Energy;
  OgaConfig oga;
  double rga_M = 20.0;
  /// delta = delta_coefficient * n^-2 for penalized losses.
  double delta_coefficient = 0.1;
  std::string out_dir = ".";
  bool breakpoints = false;
  bool full_scale = false;
};

/// Names accepted by default_config, in table order.
const std::vector<std::string>& preset_names();

/// Preset defaults; desk scale unless full_scale. Throws usage error for unknown names.
ExperimentConfig default_config(const std::string& preset, bool full_scale = false);

/// Overrides fields from a JSON document with optional blocks argmax, quadrature,
/// algorithm, loss and output plus top-level n_schedule and seed.
void apply_config_json(ExperimentConfig& config, const std::string& json_text);

/// Throws usage error for invalid schedules or incompatible settings.
void validate(const ExperimentConfig& config);

struct ExperimentResult {
  ConvergenceReport report;
  /// Expansion at the last schedule entry.
  Expansion final_expansion;
  std::vector<double> row_seconds;
};

/// Runs the preset over the neuron schedule. Progress goes to `log` when non-null.
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

/// Sorted kinks -b/omega of a 1-D expansion that lie in [lower, upper].
std::vector<double> export_breakpoints(const Expansion& u, double lower, double upper);

/// CSV with columns n, errors, order_<error>; %.6e formatting.
std::string format_csv(const ConvergenceReport& report);
/// Metadata lines followed by an aligned table.
std::string format_table(const ConvergenceReport& report);

/// Writes <preset>.csv, <preset>.txt and, when enabled, <preset>-breakpoints.csv.
std::vector<std::string> write_outputs(const ExperimentConfig& config, const ExperimentResult& result);

}  // namespace ridgepde
