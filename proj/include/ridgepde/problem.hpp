#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ridgepde/dictionary.hpp"
#include "ridgepde/pairing.hpp"
#include "ridgepde/quadrature.hpp"

namespace ridgepde {

using ScalarField = std::function<double(const Eigen::VectorXd&)>;

enum class BoundaryCondition { NaturalNeumann, DirichletPenalty };

/// sum_{|alpha|=m} (-1)^m d^alpha (a_alpha d^alpha u) + a_0 u = f.
struct EllipticProblem {
  int order_m = 1;
  std::vector<std::pair<MultiIndex, ScalarField>> coeff_top;
  ScalarField coeff_zero;
  ScalarField source;
  Domain domain;
  BoundaryCondition bc = BoundaryCondition::NaturalNeumann;
  double delta = 0.0;
  /// Admissible coefficient range checked at every assembly point.
  double coeff_lower = 0.0;
  double coeff_upper = std::numeric_limits<double>::infinity();
};

/// Residual form L v = sum_alpha a_alpha d^alpha v with normal-derivative boundary rows.
struct PinnProblem {
  std::vector<std::pair<MultiIndex, ScalarField>> op;
  ScalarField source;
  std::vector<int> boundary_normal_orders;
  Domain domain;
};

/// int 1/2 |grad u|^2 + kappa cosh(u) - f u.
struct NonlinearEnergyProblem {
  double kappa = 1.0;
  ScalarField source;
  Domain domain;
};

/// One coordinate row over a point set: row_i = sum_terms coefficient_i (D v)(x_i).
struct CoordinateRow {
  std::string label;
  std::vector<FieldTerm> terms;
};

struct CoordinateBlock {
  PointSetPtr points;
  std::vector<CoordinateRow> rows;
};

/// Linear evaluation map v -> J(v), laid out block by block, row by row, point by point.
class CoordinateLayout {
 public:
  CoordinateLayout() = default;
  CoordinateLayout(int dim, std::vector<CoordinateBlock> blocks);

  int dim() const noexcept { return dim_; }
  Eigen::Index size() const noexcept { return size_; }
  int max_order() const noexcept { return max_order_; }
  const std::vector<CoordinateBlock>& blocks() const noexcept { return blocks_; }

  /// out += scale * J(g).
  void add_embedded(double scale, const RidgeNeuron& g, Eigen::Ref<Eigen::VectorXd> out) const;
  Eigen::VectorXd embed(const RidgeNeuron& g) const;

  /// Field whose pairing with g equals <J(g), c>.
  PairingField field_from_coordinates(const Eigen::Ref<const Eigen::VectorXd>& c) const;

 private:
  int dim_ = 0;
  Eigen::Index size_ = 0;
  int max_order_ = 0;
  std::vector<CoordinateBlock> blocks_;
};

/// Convex objective over expansions, seen through a linear embedding.
class ConvexObjective {
 public:
  virtual ~ConvexObjective() = default;

  virtual const CoordinateLayout& layout() const = 0;
  virtual double value_embedded(const Eigen::Ref<const Eigen::VectorXd>& v) const = 0;
  /// Field representing the derivative of the objective at v.
  virtual PairingField gradient_field(const Eigen::Ref<const Eigen::VectorXd>& v) const = 0;

  int dim() const { return layout().dim(); }
  Eigen::Index embedded_size() const { return layout().size(); }
  int max_derivative_order() const { return layout().max_order(); }
};

/// 1/2 ||J(v) - y||_W^2 + offset.
class QuadraticObjective : public ConvexObjective {
 public:
  QuadraticObjective(CoordinateLayout layout, Eigen::VectorXd weights, Eigen::VectorXd target,
                     double offset);

  const CoordinateLayout& layout() const override { return layout_; }
  double value_embedded(const Eigen::Ref<const Eigen::VectorXd>& v) const override;
  PairingField gradient_field(const Eigen::Ref<const Eigen::VectorXd>& v) const override;

  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  const Eigen::VectorXd& target() const noexcept { return target_; }
  double offset() const noexcept { return offset_; }
  /// ||y||_W^2.
  double target_norm2() const;

 private:
  CoordinateLayout layout_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd target_;
  double offset_ = 0.0;
};

/// sum_i w_i (1/2 |grad u|^2 + kappa cosh u - f u)(x_i).
class NonlinearEnergyObjective : public ConvexObjective {
 public:
  NonlinearEnergyObjective(CoordinateLayout layout, Eigen::VectorXd weights, Eigen::VectorXd source,
                           double kappa);

  const CoordinateLayout& layout() const override { return layout_; }
  double value_embedded(const Eigen::Ref<const Eigen::VectorXd>& v) const override;
  PairingField gradient_field(const Eigen::Ref<const Eigen::VectorXd>& v) const override;

  double kappa() const noexcept { return kappa_; }

 private:
  CoordinateLayout layout_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd source_;
  double kappa_;
};

QuadraticObjective assemble_energy(const EllipticProblem& p, const QuadratureRule& rule);
QuadraticObjective assemble_penalized(const EllipticProblem& p, const QuadratureRule& rule,
                                      const BoundaryRule& brule);
/// Value equals MSE_f + MSE_bc: interior rows weighted 1/N_f, boundary rows 1/N_bc
/// (1-D endpoint atoms carry weight 1 each).
QuadraticObjective assemble_pinn(const PinnProblem& p, const QuadratureRule& interior,
                                 const BoundaryRule& boundary);
NonlinearEnergyObjective assemble_nonlinear(const NonlinearEnergyProblem& p, const QuadratureRule& rule);

/// J(g). Relu-power neurons need degree >= max_derivative_order + 1.
Eigen::VectorXd embed(const ConvexObjective& obj, const RidgeNeuron& g);
Eigen::VectorXd embed_expansion(const ConvexObjective& obj, const Expansion& u);
double objective_value(const ConvexObjective& obj, const Expansion& u);
/// Derivative of the objective at u in direction g.
double residual_pairing(const ConvexObjective& obj, const Expansion& u, const RidgeNeuron& g);

/// Throws unsupported-derivative when g is not smooth enough for the objective.
void check_smoothness(const ConvexObjective& obj, const Activation& act);

}  // namespace ridgepde
