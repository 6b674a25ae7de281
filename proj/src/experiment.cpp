#include "ridgepde/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <ostream>
#include <sstream>

#include "ridgepde/presets.hpp"
#include "ridgepde/quadrature.hpp"

namespace ridgepde {

namespace {

using json = nlohmann::json;

std::vector<int> doubling(int from, int to) {
  std::vector<int> out;
  for (int n = from; n <= to; n *= 2) out.push_back(n);
  return out;
}

std::string activation_name(const Activation& act) {
  return act.kind == ActivationKind::Sigmoid ? "sigmoid" : "relu^" + std::to_string(act.degree);
}

std::string loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::Energy: return "energy";
    case LossKind::Penalized: return "penalized";
    case LossKind::Pinn: return "pinn";
    case LossKind::Nonlinear: return "nonlinear";
  }
  return "?";
}

std::string mode_name(SearchMode mode) {
  switch (mode) {
    case SearchMode::GridRefine: return "grid-refine";
    case SearchMode::Exact1d: return "exact-1d";
    case SearchMode::AxisRestricted: return "axis-restricted";
  }
  return "?";
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6e", v);
  return buf;
}

std::string format_fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

Error usage(const std::string& message) { return Error(ErrorKind::Usage, message); }

// ---------------------------------------------------------------------------
// Preset instances

/// Objective plus error evaluation for one assembly.
struct Instance {
  std::shared_ptr<ConvexObjective> objective;
  /// Errors of u given the training objective value at u.
  std::function<ErrorMap(const Expansion&, double)> evaluate;
  int dim = 1;
  BiasRange bias;
  /// Cell-edge lattice for 1-D Gauss rules (spacing 0 when absent).
  double kink_spacing = 0.0;
  double kink_origin = 0.0;
};

struct Preset {
  std::vector<std::string> columns;
  bool per_n = false;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::function<Instance(int n)> make;
};

std::vector<int> cells(int dim, int per_axis) { return std::vector<int>(static_cast<std::size_t>(dim), per_axis); }

Preset elliptic_preset(const ExperimentConfig& c, EllipticCase base, std::vector<std::string> columns) {
  const auto& q = c.quadrature;
  auto ec = std::make_shared<EllipticCase>(std::move(base));
  const Box box = std::get<Box>(ec->problem.domain);
  const int d = box.dim();
  auto rule = std::make_shared<QuadratureRule>(gauss_grid(box, cells(d, q.cells), q.t));
  auto fine = std::make_shared<QuadratureRule>(gauss_grid(box, cells(d, q.cells * q.fine_factor), q.t));
  Preset p;
  p.columns = std::move(columns);
  p.metadata = {{"quadrature", "gauss t=" + std::to_string(q.t) + " cells=" + std::to_string(q.cells) + "^" +
                                   std::to_string(d) + " N=" + std::to_string(rule->size())},
                {"fine_quadrature", "gauss t=" + std::to_string(q.t) + " cells=" +
                                        std::to_string(q.cells * q.fine_factor) + "^" + std::to_string(d)}};
  const int cells_1d = q.cells;
  p.make = [ec, rule, fine, d, box, cells_1d](int) {
    Instance inst;
    inst.dim = d;
    inst.bias = bias_range_for(box);
    if (d == 1) {
      inst.kink_origin = box.lower(0);
      inst.kink_spacing = (box.upper(0) - box.lower(0)) / cells_1d;
    }
    inst.objective = std::make_shared<QuadraticObjective>(assemble_energy(ec->problem, *rule));
    inst.evaluate = [ec, fine](const Expansion& u, double) { return error_norms(u, ec->exact, *fine, ec->problem); };
    return inst;
  };
  return p;
}

Preset dirichlet_preset(const ExperimentConfig& c) {
  const auto& q = c.quadrature;
  const Box box = Box::cube(1, -1.0, 1.0);
  auto rule = std::make_shared<QuadratureRule>(gauss_grid(box, {q.cells}, q.t));
  auto fine = std::make_shared<QuadratureRule>(gauss_grid(box, {q.cells * q.fine_factor}, q.t));
  auto brule = std::make_shared<BoundaryRule>(boundary_rule(box, 1, q.t));
  const double coefficient = c.delta_coefficient;
  Preset p;
  p.columns = {"L2", "H1", "energy_penalized"};
  p.per_n = true;
  p.metadata = {{"quadrature", "gauss t=" + std::to_string(q.t) + " cells=" + std::to_string(q.cells)},
                {"fine_quadrature", "gauss t=" + std::to_string(q.t) + " cells=" +
                                        std::to_string(q.cells * q.fine_factor)},
                {"delta", format_number(coefficient) + " * n^-2"}};
  const int cells_1d = q.cells;
  p.make = [rule, fine, brule, coefficient, box, cells_1d](int n) {
    auto ec = std::make_shared<EllipticCase>(ex1_dirichlet(coefficient / (static_cast<double>(n) * n)));
    Instance inst;
    inst.dim = 1;
    inst.bias = bias_range_for(box);
    inst.kink_origin = box.lower(0);
    inst.kink_spacing = (box.upper(0) - box.lower(0)) / cells_1d;
    inst.objective = std::make_shared<QuadraticObjective>(assemble_penalized(ec->problem, *rule, *brule));
    inst.evaluate = [ec, fine, brule](const Expansion& u, double) {
      return error_norms(u, ec->exact, *fine, ec->problem, brule.get());
    };
    return inst;
  };
  return p;
}

Preset pinn_preset(const ExperimentConfig& c, PinnCase base) {
  const auto& q = c.quadrature;
  auto pc = std::make_shared<PinnCase>(std::move(base));
  const Box box = std::get<Box>(pc->problem.domain);
  const int d = box.dim();
  auto interior = std::make_shared<QuadratureRule>(monte_carlo(box, q.samples, c.seed));
  auto boundary = std::make_shared<BoundaryRule>(d == 1 ? boundary_rule(box, 1, q.t)
                                                        : sampled_boundary(box, q.boundary_samples, c.seed + 1));
  auto fine = std::make_shared<QuadratureRule>(gauss_grid(box, cells(d, q.cells * q.fine_factor), q.t));
  Preset p;
  p.columns = {"pinn_loss", "L2", "H1"};
  p.metadata = {{"quadrature", "uniform random N_f=" + std::to_string(q.samples) + " seed=" + std::to_string(c.seed)},
                {"boundary", d == 1 ? "endpoints" : "uniform random " + std::to_string(q.boundary_samples) +
                                                        " per edge seed=" + std::to_string(c.seed + 1)},
                {"fine_quadrature", "gauss t=" + std::to_string(q.t) + " cells=" +
                                        std::to_string(q.cells * q.fine_factor) + "^" + std::to_string(d)}};
  p.make = [pc, interior, boundary, fine, d, box](int) {
    Instance inst;
    inst.dim = d;
    inst.bias = bias_range_for(box);
    inst.objective = std::make_shared<QuadraticObjective>(assemble_pinn(pc->problem, *interior, *boundary));
    inst.evaluate = [pc, fine](const Expansion& u, double loss) {
      ErrorMap e = error_norms(u, pc->exact, *fine, 1);
      e["pinn_loss"] = loss;
      return e;
    };
    return inst;
  };
  return p;
}

Preset highdim_preset(const ExperimentConfig& c) {
  const auto& q = c.quadrature;
  auto ec = std::make_shared<EllipticCase>(ex5_highdim(10));
  const Box box = std::get<Box>(ec->problem.domain);
  const Eigen::Index n_train = q.samples;
  const Eigen::Index n_fine = n_train * q.fine_factor;
  auto rule = std::make_shared<QuadratureRule>(halton(box, n_train, 1));
  auto fine = std::make_shared<QuadratureRule>(halton(box, n_fine, static_cast<std::uint64_t>(n_train) + 1));
  auto square = [&](const Eigen::VectorXd& x) {
    const double v = ec->exact.value(x);
    return v * v;
  };
  const double q_train = integrate(*rule, square);
  const double q_fine = integrate(*fine, square);
  const double floor = std::abs(q_train - q_fine) / q_fine * std::sqrt(q_fine);
  Preset p;
  p.columns = {"L2", "H1"};
  p.metadata = {{"quadrature", "halton N=" + std::to_string(n_train) + " indices 1.." + std::to_string(n_train)},
                {"fine_quadrature", "halton N=" + std::to_string(n_fine) + " from index " +
                                        std::to_string(n_train + 1)},
                {"noise_floor_L2", format_number(floor)}};
  p.make = [ec, rule, fine](int) {
    Instance inst;
    inst.dim = 10;
    inst.bias = {-2.0, 2.0};
    inst.objective = std::make_shared<QuadraticObjective>(assemble_energy(ec->problem, *rule));
    inst.evaluate = [ec, fine](const Expansion& u, double) { return error_norms(u, ec->exact, *fine, ec->problem); };
    return inst;
  };
  return p;
}

Preset boltzmann_preset(const ExperimentConfig& c) {
  const auto& q = c.quadrature;
  auto nc = std::make_shared<NonlinearCase>(ex6_poisson_boltzmann(1.0));
  const Disk disk = std::get<Disk>(nc->problem.domain);
  const int radial = 100 * q.fine_factor;
  const int angles = 200 * q.fine_factor;
  auto fine = std::make_shared<QuadratureRule>(disk_polar_rule(disk, radial, angles, q.t));
  auto fine_obj = std::make_shared<NonlinearEnergyObjective>(assemble_nonlinear(nc->problem, *fine));
  // R(u) by direct quadrature of the exact solution
  double r_exact = 0.0;
  {
    Eigen::VectorXd x(2);
    for (Eigen::Index i = 0; i < fine->size(); ++i) {
      x = fine->points.col(i);
      const double u = nc->exact.value(x);
      const double ux = nc->exact.partial(x, MultiIndex({1, 0}));
      const double uy = nc->exact.partial(x, MultiIndex({0, 1}));
      r_exact += fine->weights(i) *
                 (0.5 * (ux * ux + uy * uy) + nc->problem.kappa * std::cosh(u) - nc->problem.source(x) * u);
    }
  }
  const double r_zero = objective_value(*fine_obj, Expansion());
  const long sample_floor = q.samples;
  const std::uint64_t seed = c.seed;
  Preset p;
  p.columns = {"relative_gap"};
  p.per_n = true;
  p.metadata = {{"quadrature", "uniform random on disk, N = max(n^2/10, " + std::to_string(sample_floor) +
                                   "), seed = " + std::to_string(seed) + " + n"},
                {"sample_floor", std::to_string(sample_floor)},
                {"fine_quadrature", "polar gauss t=" + std::to_string(q.t) + " radial cells=" +
                                        std::to_string(radial) + " angles=" + std::to_string(angles)},
                {"R_exact", format_number(r_exact)},
                {"R_zero", format_number(r_zero)}};
  p.make = [nc, fine_obj, r_exact, r_zero, sample_floor, seed, disk](int n) {
    const long count = std::max<long>(static_cast<long>(n) * n / 10, sample_floor);
    const QuadratureRule rule = monte_carlo(disk, count, seed + static_cast<std::uint64_t>(n));
    Instance inst;
    inst.dim = 2;
    inst.bias = bias_range_for(Domain(disk));
    inst.objective = std::make_shared<NonlinearEnergyObjective>(assemble_nonlinear(nc->problem, rule));
    inst.evaluate = [fine_obj, r_exact, r_zero](const Expansion& u, double) {
      return ErrorMap{{"relative_gap", relative_gap(objective_value(*fine_obj, u), r_exact, r_zero)}};
    };
    return inst;
  };
  return p;
}

Preset make_preset(const ExperimentConfig& c) {
  const std::string& name = c.preset;
  if (name == "ex1-neumann") return elliptic_preset(c, ex1_neumann(), {"L2", "H1"});
  if (name == "ex1-dirichlet") return dirichlet_preset(c);
  if (name == "ex1-pinn") return pinn_preset(c, ex1_pinn());
  if (name == "ex2-peaks") return elliptic_preset(c, ex2_peaks(), {"L2", "H1"});
  if (name == "ex3-2d") return elliptic_preset(c, ex3_2d(), {"L2", "H1"});
  if (name == "ex3-2d-pinn") return pinn_preset(c, ex3_2d_pinn());
  if (name == "ex4-biharmonic") return elliptic_preset(c, ex4_biharmonic(), {"L2", "energy"});
  if (name == "ex5-highdim") return highdim_preset(c);
  if (name == "ex6-poisson-boltzmann") return boltzmann_preset(c);
  throw usage("unknown preset '" + name + "'");
}

// ---------------------------------------------------------------------------
// Greedy driver

class Driver {
 public:
  Driver(const ExperimentConfig& c, const Instance& inst) : config_(c), inst_(inst) {
    SearchConfig search = c.argmax;
    search.bias = inst.bias;
    if (c.align_kinks && inst.kink_spacing > 0.0) {
      search.kink_spacing = inst.kink_spacing;
      search.kink_origin = inst.kink_origin;
    }
    check_smoothness(*inst.objective, c.activation);
    search_ = std::make_unique<DictionarySearch>(search, c.activation, inst.dim);
    solver_ = [this](const PairingField& field, ScoreMode mode) { return (*search_)(field, mode); };
    if (c.algorithm == Algorithm::Oga) {
      quadratic_ = dynamic_cast<const QuadraticObjective*>(inst.objective.get());
      if (!quadratic_) throw usage("orthogonal greedy needs a quadratic loss");
      oga_ = oga_init(*quadratic_, c.oga);
    } else {
      rga_ = rga_init(*inst.objective);
    }
  }

  void advance_to(int n) {
    if (quadratic_) {
      while (oga_.n < n && !oga_.converged) oga_step(oga_, *quadratic_, solver_, config_.oga);
    } else {
      RgaConfig rc{config_.rga_M, n};
      while (rga_.n < n && !rga_.converged) rga_step(rga_, *inst_.objective, solver_, rc);
    }
  }

  const Expansion& expansion() const { return quadratic_ ? oga_.expansion : rga_.expansion; }
  double objective() const { return quadratic_ ? oga_.objective : rga_.objective; }
  int selected() const { return quadratic_ ? oga_.n : rga_.n; }
  int fallbacks() const {
    const auto& h = quadratic_ ? oga_.history : rga_.history;
    return static_cast<int>(std::count_if(h.begin(), h.end(), [](const IterationRecord& r) { return r.refine_fallback; }));
  }

 private:
  const ExperimentConfig& config_;
  const Instance& inst_;
  std::unique_ptr<DictionarySearch> search_;
  ArgmaxSolver solver_;
  const QuadraticObjective* quadratic_ = nullptr;
  OgaState oga_;
  RgaState rga_;
};

// ---------------------------------------------------------------------------
// JSON helpers

template <typename T>
void read(const json& block, const char* key, T& out) {
  if (block.contains(key)) out = block.at(key).get<T>();
}

void check_keys(const json& block, const std::string& name, std::initializer_list<const char*> keys) {
  if (!block.is_object()) throw usage("config block '" + name + "' must be an object");
  for (const auto& item : block.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return item.key() == k; }))
      throw usage("unknown key '" + item.key() + "' in config block '" + name + "'");
  }
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"ex1-neumann", "ex1-dirichlet", "ex1-pinn",
                                                 "ex2-peaks",   "ex3-2d",        "ex3-2d-pinn",
                                                 "ex4-biharmonic", "ex5-highdim", "ex6-poisson-boltzmann"};
  return names;
}

ExperimentConfig default_config(const std::string& preset, bool full_scale) {
  const auto& names = preset_names();
  if (std::find(names.begin(), names.end(), preset) == names.end()) throw usage("unknown preset '" + preset + "'");
  ExperimentConfig c;
  c.preset = preset;
  c.full_scale = full_scale;
  c.activation = Activation::relu_power(2);
  c.quadrature.cells = 4000;
  c.argmax.mode = SearchMode::Exact1d;
  if (preset == "ex1-neumann") {
    c.n_schedule = doubling(16, 256);
  } else if (preset == "ex1-dirichlet") {
    c.n_schedule = doubling(16, 256);
    c.loss = LossKind::Penalized;
  } else if (preset == "ex1-pinn") {
    c.n_schedule = doubling(16, full_scale ? 256 : 128);
    c.activation = Activation::relu_power(3);
    c.loss = LossKind::Pinn;
    c.quadrature.samples = 10000;
  } else if (preset == "ex2-peaks") {
    c.n_schedule = doubling(16, 128);
    c.breakpoints = true;
  } else if (preset == "ex3-2d" || preset == "ex3-2d-pinn" || preset == "ex4-biharmonic") {
    c.argmax.mode = SearchMode::GridRefine;
    c.quadrature.cells = full_scale ? 400 : 100;
    if (preset == "ex3-2d") {
      c.n_schedule = doubling(16, full_scale ? 256 : 128);
    } else if (preset == "ex3-2d-pinn") {
      c.n_schedule = doubling(16, full_scale ? 2048 : 128);
      c.activation = Activation::relu_power(3);
      c.loss = LossKind::Pinn;
      c.quadrature.samples = 20000;
      c.quadrature.boundary_samples = 2000;
    } else {
      c.n_schedule = doubling(16, full_scale ? 256 : 64);
      c.activation = Activation::relu_power(3);
    }
  } else if (preset == "ex5-highdim") {
    c.n_schedule = doubling(16, full_scale ? 256 : 64);
    c.argmax.mode = SearchMode::AxisRestricted;
    c.quadrature.samples = full_scale ? 100000000L : 1000000L;
    c.oga.cache_bytes = std::size_t(1024) << 20;
  } else if (preset == "ex6-poisson-boltzmann") {
    c.n_schedule = doubling(16, full_scale ? 2048 : 512);
    c.activation = Activation::sigmoid();
    c.algorithm = Algorithm::Rga;
    c.loss = LossKind::Nonlinear;
    c.rga_M = 20.0;
    c.argmax.mode = SearchMode::GridRefine;
    c.quadrature.samples = 10000;
  }
  return c;
}

void apply_config_json(ExperimentConfig& c, const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw usage(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    check_keys(doc, "root", {"preset", "n_schedule", "seed", "argmax", "quadrature", "algorithm", "loss", "output"});
    if (doc.contains("preset") && doc.at("preset").get<std::string>() != c.preset)
      throw usage("config preset '" + doc.at("preset").get<std::string>() + "' does not match '" + c.preset + "'");
    read(doc, "n_schedule", c.n_schedule);
    read(doc, "seed", c.seed);
    if (doc.contains("argmax")) {
      const json& a = doc.at("argmax");
      check_keys(a, "argmax", {"n_bias", "n_theta", "top_k", "refine", "refine_iters", "max_halvings",
                               "refine_enabled", "exact_bias", "coarse_angles", "max_seeds", "box_half_width",
                               "box_count", "sort_cache_mb", "align_kinks"});
      read(a, "align_kinks", c.align_kinks);
      read(a, "n_bias", c.argmax.n_bias);
      read(a, "n_theta", c.argmax.n_theta);
      read(a, "top_k", c.argmax.top_k);
      read(a, "refine_iters", c.argmax.refine_iters);
      read(a, "max_halvings", c.argmax.max_halvings);
      read(a, "refine_enabled", c.argmax.refine_enabled);
      read(a, "exact_bias", c.argmax.exact_bias);
      read(a, "coarse_angles", c.argmax.coarse_angles);
      read(a, "max_seeds", c.argmax.max_seeds);
      read(a, "box_half_width", c.argmax.box_half_width);
      read(a, "box_count", c.argmax.box_count);
      if (a.contains("refine")) {
        const auto r = a.at("refine").get<std::string>();
        if (r == "newton") c.argmax.refine = RefineMethod::Newton;
        else if (r == "gradient") c.argmax.refine = RefineMethod::Gradient;
        else throw usage("argmax.refine must be 'newton' or 'gradient'");
      }
      if (a.contains("sort_cache_mb")) c.argmax.sort_cache_bytes = a.at("sort_cache_mb").get<std::size_t>() << 20;
    }
    if (doc.contains("quadrature")) {
      const json& q = doc.at("quadrature");
      check_keys(q, "quadrature", {"t", "cells", "fine_factor", "samples", "boundary_samples"});
      read(q, "t", c.quadrature.t);
      read(q, "cells", c.quadrature.cells);
      read(q, "fine_factor", c.quadrature.fine_factor);
      read(q, "samples", c.quadrature.samples);
      read(q, "boundary_samples", c.quadrature.boundary_samples);
    }
    if (doc.contains("algorithm")) {
      const json& a = doc.at("algorithm");
      check_keys(a, "algorithm", {"name", "M", "gram_regularization", "stop_relative", "cache_mb"});
      if (a.contains("name")) {
        const auto n = a.at("name").get<std::string>();
        if (n == "oga") c.algorithm = Algorithm::Oga;
        else if (n == "rga") c.algorithm = Algorithm::Rga;
        else throw usage("algorithm.name must be 'oga' or 'rga'");
      }
      read(a, "M", c.rga_M);
      read(a, "gram_regularization", c.oga.gram_regularization);
      read(a, "stop_relative", c.oga.stop_relative);
      if (a.contains("cache_mb")) c.oga.cache_bytes = a.at("cache_mb").get<std::size_t>() << 20;
    }
    if (doc.contains("loss")) {
      const json& l = doc.at("loss");
      check_keys(l, "loss", {"kind", "delta_coefficient"});
      if (l.contains("kind") && l.at("kind").get<std::string>() != loss_name(c.loss))
        throw usage("loss kind '" + l.at("kind").get<std::string>() + "' is not available for preset " + c.preset);
      read(l, "delta_coefficient", c.delta_coefficient);
    }
    if (doc.contains("output")) {
      const json& o = doc.at("output");
      check_keys(o, "output", {"dir", "breakpoints"});
      read(o, "dir", c.out_dir);
      read(o, "breakpoints", c.breakpoints);
    }
  } catch (const json::exception& e) {
    throw usage(std::string("config has a field of the wrong type: ") + e.what());
  }
}

void validate(const ExperimentConfig& c) {
  const auto& names = preset_names();
  if (std::find(names.begin(), names.end(), c.preset) == names.end()) throw usage("unknown preset '" + c.preset + "'");
  if (c.n_schedule.empty()) throw usage("neuron schedule is empty");
  for (std::size_t i = 0; i < c.n_schedule.size(); ++i) {
    if (c.n_schedule[i] < 1) throw usage("neuron schedule entries must be positive");
    if (i > 0 && c.n_schedule[i] <= c.n_schedule[i - 1]) throw usage("neuron schedule must be strictly increasing");
  }
  if (c.quadrature.t < 0 || c.quadrature.fine_factor < 1) throw usage("quadrature t must be >= 0 and fine_factor >= 1");
  if (c.loss != LossKind::Pinn && c.loss != LossKind::Nonlinear && c.preset != "ex5-highdim" &&
      c.quadrature.cells < 1)
    throw usage("quadrature cells must be positive");
  if ((c.loss == LossKind::Pinn || c.preset == "ex5-highdim" || c.loss == LossKind::Nonlinear) &&
      c.quadrature.samples < 1)
    throw usage("quadrature samples must be positive");
  if (c.algorithm == Algorithm::Oga && c.loss == LossKind::Nonlinear)
    throw usage("orthogonal greedy needs a quadratic loss");
  if (c.algorithm == Algorithm::Rga && !(c.rga_M > 0.0)) throw usage("RGA budget M must be positive");
  if (!(c.delta_coefficient > 0.0)) throw usage("delta coefficient must be positive");
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log) {
  validate(config);
  using clock = std::chrono::steady_clock;
  const Preset preset = make_preset(config);
  ExperimentResult result;
  std::vector<ReportRow> rows;

  auto record = [&](int n, const Driver& driver, const Instance& inst, clock::time_point start) {
    ReportRow row;
    row.n = n;
    const ErrorMap errors = inst.evaluate(driver.expansion(), driver.objective());
    for (const auto& c : preset.columns) row.errors[c] = errors.at(c);
    rows.push_back(std::move(row));
    const double seconds = std::chrono::duration<double>(clock::now() - start).count();
    result.row_seconds.push_back(seconds);
    if (log) {
      *log << "[" << config.preset << "] n=" << n << " selected=" << driver.selected();
      for (const auto& c : preset.columns) *log << " " << c << "=" << format_number(errors.at(c));
      *log << " (" << format_fixed(seconds) << " s)\n";
      log->flush();
    }
  };

  int fallbacks = 0;
  if (preset.per_n) {
    for (int n : config.n_schedule) {
      const auto start = clock::now();
      const Instance inst = preset.make(n);
      Driver driver(config, inst);
      driver.advance_to(n);
      record(n, driver, inst, start);
      fallbacks += driver.fallbacks();
      result.final_expansion = driver.expansion();
    }
  } else {
    const auto start_all = clock::now();
    const Instance inst = preset.make(config.n_schedule.back());
    Driver driver(config, inst);
    auto start = start_all;
    for (int n : config.n_schedule) {
      driver.advance_to(n);
      record(n, driver, inst, start);
      start = clock::now();
    }
    fallbacks = driver.fallbacks();
    result.final_expansion = driver.expansion();
  }

  result.report = order_table(preset.columns, std::move(rows));
  ConvergenceReport& r = result.report;
  r.preset = config.preset;
  r.set_meta("preset", config.preset);
  r.set_meta("algorithm", config.algorithm == Algorithm::Oga ? "oga" : "rga M=" + format_number(config.rga_M));
  r.set_meta("loss", loss_name(config.loss));
  r.set_meta("activation", activation_name(config.activation));
  r.set_meta("search", mode_name(config.argmax.mode));
  if (config.align_kinks && config.loss != LossKind::Pinn && config.activation.kind == ActivationKind::ReluPower &&
      config.argmax.mode == SearchMode::Exact1d)
    r.set_meta("kinks", "aligned to assembly cell edges");
  r.set_meta("seed", std::to_string(config.seed));
  r.set_meta("scale", config.full_scale ? "full" : "desk");
  for (const auto& [k, v] : preset.metadata) r.set_meta(k, v);
  r.set_meta("refine_fallbacks", std::to_string(fallbacks));
  for (const auto& c : preset.columns) {
    const auto fit = fitted_order(r.ns(), r.column(c));
    r.set_meta("fitted_order_" + c, fit ? format_fixed(*fit) : "-");
  }
  return result;
}

std::vector<double> export_breakpoints(const Expansion& u, double lower, double upper) {
  std::vector<double> out;
  for (const auto& term : u.terms()) {
    if (term.neuron.dim() != 1) throw Error(ErrorKind::UnsupportedDomain, "breakpoints need a 1-D expansion");
    const double w = term.neuron.omega(0);
    if (w == 0.0) continue;
    const double x = -term.neuron.bias / w;
    if (x >= lower && x <= upper) out.push_back(x);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string format_csv(const ConvergenceReport& report) {
  std::ostringstream os;
  os << "n";
  for (const auto& c : report.columns) os << "," << c;
  for (const auto& c : report.columns) os << ",order_" << c;
  os << "\n";
  for (const auto& row : report.rows) {
    os << row.n;
    for (const auto& c : report.columns) os << "," << format_number(row.errors.at(c));
    for (const auto& c : report.columns) {
      const auto it = row.orders.find(c);
      os << ",";
      if (it != row.orders.end() && it->second) os << format_number(*it->second);
    }
    os << "\n";
  }
  return os.str();
}

std::string format_table(const ConvergenceReport& report) {
  std::ostringstream os;
  for (const auto& [k, v] : report.metadata) os << "# " << k << ": " << v << "\n";
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header = {"n"};
  for (const auto& c : report.columns) {
    header.push_back(c);
    header.push_back("order");
  }
  cells.push_back(header);
  for (const auto& row : report.rows) {
    std::vector<std::string> line = {std::to_string(row.n)};
    for (const auto& c : report.columns) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.2e", row.errors.at(c));
      line.emplace_back(buf);
      const auto it = row.orders.find(c);
      line.push_back(it != row.orders.end() && it->second ? format_fixed(*it->second) : "-");
    }
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : cells)
    for (std::size_t j = 0; j < line.size(); ++j) width[j] = std::max(width[j], line[j].size());
  for (const auto& line : cells) {
    for (std::size_t j = 0; j < line.size(); ++j) {
      if (j > 0) os << "  ";
      os << std::string(width[j] - line[j].size(), ' ') << line[j];
    }
    os << "\n";
  }
  return os.str();
}

std::vector<std::string> write_outputs(const ExperimentConfig& config, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  const fs::path dir(config.out_dir.empty() ? "." : config.out_dir);
  fs::create_directories(dir);
  std::vector<std::string> written;
  auto write = [&](const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
    out << content;
    written.push_back(path.string());
  };
  write(dir / (config.preset + ".csv"), format_csv(result.report));
  write(dir / (config.preset + ".txt"), format_table(result.report));
  if (config.breakpoints) {
    if (result.final_expansion.dim() != 1 && !result.final_expansion.empty())
      throw Error(ErrorKind::UnsupportedDomain, "breakpoints need a 1-D expansion");
    std::ostringstream os;
    os << "breakpoint\n";
    for (double x : export_breakpoints(result.final_expansion, -1.0, 1.0)) os << format_number(x) << "\n";
    write(dir / (config.preset + "-breakpoints.csv"), os.str());
  }
  return written;
}

}  // namespace ridgepde
