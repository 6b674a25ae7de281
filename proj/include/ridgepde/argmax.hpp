#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <vector>

#include "ridgepde/dictionary.hpp"
#include "ridgepde/pairing.hpp"

namespace ridgepde {

enum class SearchMode { GridRefine, Exact1d, AxisRestricted };
enum class RefineMethod { Gradient, Newton };
/// Orthogonal: score -1/2 P^2. Relaxed: score -P over the symmetric dictionary.
enum class ScoreMode { Orthogonal, Relaxed };

struct SearchConfig {
  SearchMode mode = SearchMode::GridRefine;
  /// Bias grid count; 0 selects 200 * max(|c1|, |c2|).
  int n_bias = 0;
  int n_theta = 360;
  int top_k = 5;
  RefineMethod refine = RefineMethod::Newton;
  int refine_iters = 50;
  int max_halvings = 50;
  bool refine_enabled = true;
  /// Maximize exactly over b for every seeded direction instead of sampling the bias grid.
  bool exact_bias = true;
  BiasRange bias;
  double bias_margin = 0.0;
  /// When positive, 1-D and axis searches only place kinks inside the point range
  /// on the lattice kink_origin + j * kink_spacing (along the active axis).
  double kink_spacing = 0.0;
  double kink_origin = 0.0;
  /// Per-angle grid size used when d >= 3.
  int coarse_angles = 8;
  long max_seeds = 200000;
  /// Parameter box [-box_half_width, box_half_width]^(d+1) for sigmoid dictionaries.
  double box_half_width = 20.0;
  int box_count = 9;
  /// Memory budget for cached sort orders of projected points.
  std::size_t sort_cache_bytes = std::size_t(768) << 20;

  int bias_count() const;
};

struct SearchResult {
  bool found = false;
  RidgeNeuron neuron;
  /// Pairing of the unsigned neuron.
  double pairing = 0.0;
  double score = 0.0;
  /// Sign that makes the pairing nonnegative.
  int sign = 1;
  bool refine_fallback = false;
  int line_searches = 0;
  long candidates = 0;
};

double score(const RidgeNeuron& g, const PairingField& field, ScoreMode mode);

/// Grid seeds: 1-D directions +-1, polar angles in 2-D, hyperspherical angles for
/// d >= 3, each crossed with the bias grid b_i = c1 + (c2 - c1) i / N_b.
std::vector<RidgeNeuron> seed_candidates(int d, const SearchConfig& config, const Activation& act);

/// omega(theta) on the unit sphere, theta of length d - 1.
Eigen::VectorXd omega_from_angles(const Eigen::Ref<const Eigen::VectorXd>& theta);
Eigen::VectorXd angles_from_omega(const Eigen::Ref<const Eigen::VectorXd>& omega);
/// d x (d-1) Jacobian of omega_from_angles.
Eigen::MatrixXd omega_jacobian(const Eigen::Ref<const Eigen::VectorXd>& theta);

struct RefineResult {
  RidgeNeuron neuron;
  double pairing = 0.0;
  bool fallback = false;
  int iterations = 0;
};

/// Local ascent of pairing^2 from the seed; never returns a worse candidate.
RefineResult refine(const RidgeNeuron& seed, const PairingField& field, const SearchConfig& config);

/// Pairing of the relu-power neuron sigma(omega . x + b) as a function of b for a
/// fixed omega: piecewise polynomial between the breakpoints -omega . x_i.
class BiasProfile {
 public:
  BiasProfile(const PairingField& field, const Eigen::Ref<const Eigen::VectorXd>& omega, int degree,
              const std::vector<std::uint32_t>* order = nullptr);

  double value(double b) const;

  struct Peak {
    double bias = 0.0;
    double value = 0.0;
  };
  /// argmax of |P(b)| over [lo, hi].
  Peak maximize(double lo, double hi) const;
  /// argmax of |P| over [lo, hi] with kinks inside the point range restricted to
  /// projections origin + j * spacing.
  Peak maximize_on_lattice(double lo, double hi, double origin, double spacing) const;
  /// argmax of |P| over the given biases (first occurrence wins ties).
  Peak best_of(const std::vector<double>& biases) const;

  /// Indices of the points sorted by projection, descending.
  static std::vector<std::uint32_t> sort_order(const PairingField& field,
                                               const Eigen::Ref<const Eigen::VectorXd>& omega);

 private:
  double eval(std::size_t groups, double b) const;
  std::size_t active_groups(double b) const;

  int degree_;
  std::vector<double> breaks_;  // distinct projections, descending
  /// Group prefix sums, accumulated in long double and stored rounded.
  std::vector<double> prefix_;
};

/// Search over a relu-power or sigmoid dictionary with cached sort orders.
class DictionarySearch {
 public:
  DictionarySearch(SearchConfig config, Activation activation, int dim);

  SearchResult operator()(const PairingField& field, ScoreMode mode);

  const SearchConfig& config() const noexcept { return config_; }

 private:
  SearchResult search_1d(const PairingField& field);
  SearchResult search_axes(const PairingField& field);
  SearchResult search_angles(const PairingField& field);
  SearchResult search_box(const PairingField& field);

  BiasProfile profile(const PairingField& field, std::size_t direction, const Eigen::VectorXd& omega);
  BiasProfile::Peak best_bias(const BiasProfile& profile, double sign) const;
  void reset_cache(const PairingField& field, std::size_t directions);

  SearchConfig config_;
  Activation activation_;
  int dim_;
  std::vector<PointSetPtr> cache_key_;
  std::vector<std::vector<std::uint32_t>> cache_;
  bool cache_enabled_ = false;
};

/// relu-power 1-D search over omega = +-1, exact in b.
SearchResult exact_1d(const PairingField& field, const SearchConfig& config, const Activation& act);
/// Search over omega = +-e_i, i = 1..d, exact in b; 2d line searches.
SearchResult axis_restricted(const PairingField& field, const SearchConfig& config, const Activation& act);

/// Exhaustive search over an explicit list of neurons.
class FiniteDictionarySearch {
 public:
  explicit FiniteDictionarySearch(std::vector<RidgeNeuron> elements) : elements_(std::move(elements)) {}
  SearchResult operator()(const PairingField& field, ScoreMode mode) const;

 private:
  std::vector<RidgeNeuron> elements_;
};

}  // namespace ridgepde
