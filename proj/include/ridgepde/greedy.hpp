#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "ridgepde/argmax.hpp"
#include "ridgepde/dictionary.hpp"
#include "ridgepde/problem.hpp"

namespace ridgepde {

using ArgmaxSolver = std::function<SearchResult(const PairingField&, ScoreMode)>;

struct OgaConfig {
  int iterations = 256;
  double gram_regularization = 1e-12;
  /// Converged when |pairing| <= stop_relative * ||y||_W^2.
  double stop_relative = 1e-14;
  int refactor_every = 64;
  int refinement_steps = 2;
  /// Budget for cached embedded columns J(g_i); the rest are recomputed.
  std::size_t cache_bytes = std::size_t(1536) << 20;
};

struct RgaConfig {
  double M = 1.0;
  int iterations = 256;
};

struct IterationRecord {
  int n = 0;
  double objective = 0.0;
  RidgeNeuron neuron;
  double pairing = 0.0;
  double l1_norm = 0.0;
  bool skipped = false;
  bool refine_fallback = false;
};

enum class StepStatus { Selected, Converged, Skipped };

/// W-least-squares projection onto a growing set of vectors through an
/// incrementally updated Cholesky factor of the Gram matrix.
class GramProjector {
 public:
  explicit GramProjector(double regularization = 1e-12, int refactor_every = 64, int refinement_steps = 2);

  /// Appends a vector given its Gram entries against the current selection, its
  /// squared norm and its pairing with the target. Returns false (leaving the
  /// selection unchanged) when it cannot be added.
  bool append(const Eigen::Ref<const Eigen::VectorXd>& cross, double self, double rhs);
  void remove_last();

  const Eigen::VectorXd& coefficients() const noexcept { return coef_; }
  Eigen::Index size() const noexcept { return rhs_.size(); }
  double shift() const noexcept { return shift_; }
  const Eigen::MatrixXd& gram() const noexcept { return gram_; }

 private:
  bool refactor();
  void solve();

  double eps_;
  int refactor_every_;
  int refinement_steps_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd rhs_;
  Eigen::VectorXd coef_;
  double shift_ = 0.0;
  int since_refactor_ = 0;
};

/// argmin_c || sum_i c_i J_i - y ||_W.
Eigen::VectorXd project(const std::vector<Eigen::VectorXd>& selected, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& w, double regularization = 1e-12);

struct OgaState {
  int n = 0;
  Expansion expansion;
  std::vector<RidgeNeuron> selected;
  std::vector<Eigen::VectorXd> columns;  // cached J(g_i), possibly fewer than selected
  GramProjector gram;
  Eigen::VectorXd embedded;  // J(u_n)
  double objective = 0.0;
  int consecutive_skips = 0;
  bool converged = false;
  std::vector<IterationRecord> history;
};

OgaState oga_init(const QuadraticObjective& obj, const OgaConfig& config);
StepStatus oga_step(OgaState& state, const QuadraticObjective& obj, const ArgmaxSolver& argmax,
                    const OgaConfig& config);

struct RgaState {
  int n = 0;
  Expansion expansion;
  Eigen::VectorXd embedded;
  double objective = 0.0;
  bool converged = false;
  std::vector<IterationRecord> history;
};

RgaState rga_init(const ConvexObjective& obj);
/// u_n = (1 - a_n) u_{n-1} - M a_n g_n with a_n = min(1, 2/n) and g_n the signed maximizer.
StepStatus rga_step(RgaState& state, const ConvexObjective& obj, const ArgmaxSolver& argmax,
                    const RgaConfig& config);

}  // namespace ridgepde
