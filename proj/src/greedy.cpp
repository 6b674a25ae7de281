#include "ridgepde/greedy.hpp"

#include <algorithm>
#include <cmath>

namespace ridgepde {

GramProjector::GramProjector(double regularization, int refactor_every, int refinement_steps)
    : eps_(regularization), refactor_every_(std::max(1, refactor_every)), refinement_steps_(refinement_steps) {
  if (!(regularization >= 0.0)) throw Error(ErrorKind::InvalidArgument, "Gram regularization must be >= 0");
}

bool GramProjector::refactor() {
  const Eigen::Index n = gram_.rows();
  Eigen::MatrixXd shifted = gram_;
  shifted.diagonal().array() += shift_;
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  if (llt.info() != Eigen::Success) return false;
  chol_ = llt.matrixL();
  since_refactor_ = 0;
  return chol_.diagonal().minCoeff() > 0.0 && n == chol_.rows();
}

void GramProjector::solve() {
  auto chol_solve = [&](const Eigen::VectorXd& b) {
    Eigen::VectorXd x = chol_.triangularView<Eigen::Lower>().solve(b);
    chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
    return x;
  };
  coef_ = chol_solve(rhs_);
  // iterative refinement against the unshifted Gram matrix
  for (int s = 0; s < refinement_steps_; ++s) coef_ += chol_solve(rhs_ - gram_ * coef_);
}

bool GramProjector::append(const Eigen::Ref<const Eigen::VectorXd>& cross, double self, double rhs) {
  const Eigen::Index n = rhs_.size();
  if (cross.size() != n) throw Error(ErrorKind::InvalidArgument, "Gram column has wrong length");
  if (!(self > 0.0) || !std::isfinite(self) || !cross.allFinite() || !std::isfinite(rhs)) return false;

  const Eigen::MatrixXd old_gram = gram_;
  const Eigen::MatrixXd old_chol = chol_;
  const double old_shift = shift_;
  gram_.conservativeResize(n + 1, n + 1);
  gram_.row(n).head(n) = cross.transpose();
  gram_.col(n).head(n) = cross;
  gram_(n, n) = self;
  rhs_.conservativeResize(n + 1);
  rhs_(n) = rhs;

  bool ok = false;
  Eigen::VectorXd l = cross;
  if (n > 0) chol_.triangularView<Eigen::Lower>().solveInPlace(l);
  const double d2 = self + shift_ - (n > 0 ? l.squaredNorm() : 0.0);
  if (d2 > eps_ * self && std::isfinite(d2)) {
    chol_.conservativeResize(n + 1, n + 1);
    chol_.row(n).head(n) = l.transpose();
    chol_.col(n).head(n).setZero();
    chol_(n, n) = std::sqrt(d2);
    ++since_refactor_;
    ok = since_refactor_ < refactor_every_ || refactor();
  }
  if (!ok && shift_ == 0.0 && eps_ > 0.0) {
    shift_ = eps_ * gram_.trace() / static_cast<double>(n + 1);
    ok = refactor();
  }
  if (!ok) {
    gram_ = old_gram;
    chol_ = old_chol;
    shift_ = old_shift;
    rhs_.conservativeResize(n);
    return false;
  }
  solve();
  return true;
}

void GramProjector::remove_last() {
  const Eigen::Index n = rhs_.size();
  if (n == 0) return;
  gram_.conservativeResize(n - 1, n - 1);
  rhs_.conservativeResize(n - 1);
  if (n - 1 == 0) {
    chol_.resize(0, 0);
    coef_.resize(0);
    return;
  }
  refactor();
  solve();
}

Eigen::VectorXd project(const std::vector<Eigen::VectorXd>& selected, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& w, double regularization) {
  if (selected.empty()) throw Error(ErrorKind::InvalidArgument, "projection needs at least one vector");
  GramProjector gram(regularization);
  for (std::size_t i = 0; i < selected.size(); ++i) {
    const Eigen::VectorXd wj = w.cwiseProduct(selected[i]);
    Eigen::VectorXd cross(static_cast<Eigen::Index>(i));
    for (std::size_t k = 0; k < i; ++k) cross(static_cast<Eigen::Index>(k)) = selected[k].dot(wj);
    if (!gram.append(cross, selected[i].dot(wj), y.dot(wj)))
      throw Error(ErrorKind::RankDeficient, "selected vector " + std::to_string(i) + " is degenerate");
  }
  return gram.coefficients();
}

namespace {

std::size_t cache_columns(const ConvexObjective& obj, std::size_t budget) {
  const std::size_t bytes = static_cast<std::size_t>(obj.embedded_size()) * sizeof(double);
  return bytes == 0 ? 0 : budget / bytes;
}

/// J(g_i), from the cache when available.
Eigen::VectorXd column(const OgaState& state, const QuadraticObjective& obj, std::size_t i) {
  if (i < state.columns.size()) return state.columns[i];
  return obj.layout().embed(state.selected[i]);
}

void rebuild_expansion(OgaState& state) {
  Expansion u;
  const Eigen::VectorXd& c = state.gram.coefficients();
  for (std::size_t i = 0; i < state.selected.size(); ++i) u.add(c(static_cast<Eigen::Index>(i)), state.selected[i]);
  state.expansion = std::move(u);
}

}  // namespace

OgaState oga_init(const QuadraticObjective& obj, const OgaConfig& config) {
  OgaState state;
  state.gram = GramProjector(config.gram_regularization, config.refactor_every, config.refinement_steps);
  state.embedded = Eigen::VectorXd::Zero(obj.embedded_size());
  state.objective = obj.value_embedded(state.embedded);
  return state;
}

StepStatus oga_step(OgaState& state, const QuadraticObjective& obj, const ArgmaxSolver& argmax,
                    const OgaConfig& config) {
  if (state.converged) return StepStatus::Converged;
  const PairingField field = obj.gradient_field(state.embedded);
  const SearchResult found = argmax(field, ScoreMode::Orthogonal);
  const double threshold = config.stop_relative * obj.target_norm2();
  if (!found.found || std::abs(found.pairing) <= threshold) {
    state.converged = true;
    return StepStatus::Converged;
  }
  const RidgeNeuron& g = found.neuron;
  const Eigen::VectorXd jg = embed(obj, g);
  const Eigen::VectorXd wj = obj.weights().cwiseProduct(jg);
  const std::size_t n = state.selected.size();
  Eigen::VectorXd cross(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) cross(static_cast<Eigen::Index>(i)) = column(state, obj, i).dot(wj);

  IterationRecord record;
  record.neuron = g;
  record.pairing = found.pairing;
  record.refine_fallback = found.refine_fallback;

  auto skip = [&]() {
    record.n = state.n;
    record.objective = state.objective;
    record.l1_norm = state.expansion.l1_norm();
    record.skipped = true;
    state.history.push_back(record);
    if (++state.consecutive_skips >= 2) state.converged = true;
    return StepStatus::Skipped;
  };

  if (!state.gram.append(cross, jg.dot(wj), obj.target().dot(wj))) return skip();
  state.selected.push_back(g);
  const bool cached = state.columns.size() == n && n < cache_columns(obj, config.cache_bytes);
  if (cached) state.columns.push_back(jg);

  Eigen::VectorXd embedded = Eigen::VectorXd::Zero(obj.embedded_size());
  const Eigen::VectorXd& c = state.gram.coefficients();
  for (std::size_t i = 0; i <= n; ++i) {
    const double ci = c(static_cast<Eigen::Index>(i));
    if (i < state.columns.size()) {
      embedded += ci * state.columns[i];
    } else if (i == n) {
      embedded += ci * jg;
    } else {
      obj.layout().add_embedded(ci, state.selected[i], embedded);
    }
  }
  const double value = obj.value_embedded(embedded);
  if (!std::isfinite(value)) throw Error(ErrorKind::NumericError, "objective is not finite at iteration " +
                                                                      std::to_string(state.n + 1));
  if (value > state.objective + 1e-12 * std::abs(state.objective)) {
    state.gram.remove_last();
    state.selected.pop_back();
    if (cached) state.columns.pop_back();
    return skip();
  }
  state.consecutive_skips = 0;
  state.embedded = std::move(embedded);
  state.objective = value;
  ++state.n;
  rebuild_expansion(state);
  record.n = state.n;
  record.objective = value;
  record.l1_norm = state.expansion.l1_norm();
  state.history.push_back(record);
  return StepStatus::Selected;
}

RgaState rga_init(const ConvexObjective& obj) {
  RgaState state;
  state.embedded = Eigen::VectorXd::Zero(obj.embedded_size());
  state.objective = obj.value_embedded(state.embedded);
  return state;
}

StepStatus rga_step(RgaState& state, const ConvexObjective& obj, const ArgmaxSolver& argmax,
                    const RgaConfig& config) {
  if (!(config.M > 0.0)) throw Error(ErrorKind::InvalidArgument, "RGA budget M must be positive");
  if (state.converged) return StepStatus::Converged;
  const PairingField field = obj.gradient_field(state.embedded);
  const SearchResult found = argmax(field, ScoreMode::Relaxed);
  if (!found.found) {
    if (field.is_zero()) {
      state.converged = true;
      return StepStatus::Converged;
    }
    throw Error(ErrorKind::DegenerateDictionary, "argmax returned no candidate at iteration " +
                                                     std::to_string(state.n + 1));
  }
  const int n = state.n + 1;
  const double alpha = std::min(1.0, 2.0 / n);
  const double step = -config.M * alpha * found.sign;
  const Eigen::VectorXd jg = embed(obj, found.neuron);
  if (alpha == 1.0) {
    state.expansion = Expansion();
    state.embedded = step * jg;
  } else {
    state.expansion.scale(1.0 - alpha);
    state.embedded = (1.0 - alpha) * state.embedded + step * jg;
  }
  state.expansion.add(step, found.neuron);
  state.n = n;
  state.objective = obj.value_embedded(state.embedded);
  IterationRecord record;
  record.n = n;
  record.objective = state.objective;
  record.neuron = found.neuron;
  record.pairing = found.pairing;
  record.l1_norm = state.expansion.l1_norm();
  record.refine_fallback = found.refine_fallback;
  state.history.push_back(record);
  return StepStatus::Selected;
}

}  // namespace ridgepde
