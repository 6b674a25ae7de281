#pragma once

#include <Eigen/Dense>

#include <memory>
#include <vector>

#include "ridgepde/dictionary.hpp"

namespace ridgepde {

/// Points (d x N) with optional outward normals (d x N, empty for interior sets).
struct PointSet {
  Eigen::MatrixXd points;
  Eigen::MatrixXd normals;

  int dim() const noexcept { return static_cast<int>(points.rows()); }
  Eigen::Index size() const noexcept { return points.cols(); }
  bool has_normals() const noexcept { return normals.size() > 0; }
};

using PointSetPtr = std::shared_ptr<const PointSet>;

/// A partial derivative d^alpha or a normal derivative d^k/dnu^k.
struct DerivativeTerm {
  enum class Kind { Partial, Normal };

  Kind kind = Kind::Partial;
  MultiIndex alpha;
  int normal_order = 0;

  static DerivativeTerm partial(MultiIndex a) { return {Kind::Partial, std::move(a), 0}; }
  static DerivativeTerm normal(int k) { return {Kind::Normal, MultiIndex(), k}; }

  int order() const noexcept { return kind == Kind::Partial ? alpha.order() : normal_order; }
};

/// Values of the derivative term of neuron g at every point of the set.
Eigen::ArrayXd term_values(const DerivativeTerm& term, const RidgeNeuron& g, const PointSet& set);

/// One derivative term with a per-point coefficient.
struct FieldTerm {
  DerivativeTerm derivative;
  Eigen::VectorXd coefficient;
};

struct FieldBlock {
  PointSetPtr points;
  std::vector<FieldTerm> terms;
};

/// Linear functional g -> sum over blocks, terms and points of
/// coefficient_i * (D g)(x_i).
struct PairingField {
  int dim = 0;
  std::vector<FieldBlock> blocks;

  int max_order() const;
  bool is_zero() const;
};

double pairing(const PairingField& field, const RidgeNeuron& g);

struct PairingDerivatives {
  double value = 0.0;
  Eigen::VectorXd d_omega;
  double d_bias = 0.0;
  double d_bias2 = 0.0;
};

/// Pairing and its derivatives in (omega, bias). For relu-power activations the
/// distributional parts at the kink are dropped.
PairingDerivatives pairing_with_derivatives(const PairingField& field, const RidgeNeuron& g);

/// Per-point coefficient of sigma^(j)(omega . x + b) for j = 0..max_order, with the
/// direction factors omega^alpha or (omega . nu)^k already applied.
std::vector<Eigen::ArrayXd> order_coefficients(const FieldBlock& block,
                                               const Eigen::Ref<const Eigen::VectorXd>& omega,
                                               int max_order);

}  // namespace ridgepde
