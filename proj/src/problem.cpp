#include "ridgepde/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ridgepde {

CoordinateLayout::CoordinateLayout(int dim, std::vector<CoordinateBlock> blocks)
    : dim_(dim), blocks_(std::move(blocks)) {
  for (const auto& block : blocks_) {
    if (!block.points || block.points->dim() != dim)
      throw Error(ErrorKind::InvalidArgument, "coordinate block has wrong point dimension");
    for (const auto& row : block.rows) {
      for (const auto& term : row.terms) {
        if (term.coefficient.size() != block.points->size())
          throw Error(ErrorKind::InvalidArgument, "row coefficient length does not match point count");
        max_order_ = std::max(max_order_, term.derivative.order());
      }
      size_ += block.points->size();
    }
  }
}

void CoordinateLayout::add_embedded(double scale, const RidgeNeuron& g,
                                    Eigen::Ref<Eigen::VectorXd> out) const {
  if (g.dim() != dim_) throw Error(ErrorKind::InvalidArgument, "neuron dimension does not match problem");
  std::vector<Eigen::ArrayXd> sig;
  Eigen::Index offset = 0;
  for (const auto& block : blocks_) {
    const PointSet& set = *block.points;
    const Eigen::Index n = set.size();
    int jmax = 0;
    for (const auto& row : block.rows)
      for (const auto& term : row.terms) jmax = std::max(jmax, term.derivative.order());
    const Eigen::ArrayXd t = (set.points.transpose() * g.omega).array() + g.bias;
    activation_derivatives(g.activation, t, jmax, sig);
    Eigen::ArrayXd nu;
    for (const auto& row : block.rows) {
      auto seg = out.segment(offset, n).array();
      for (const auto& term : row.terms) {
        const int j = term.derivative.order();
        if (term.derivative.kind == DerivativeTerm::Kind::Partial) {
          const double f = scale * term.derivative.alpha.monomial(g.omega);
          if (f != 0.0) seg += f * term.coefficient.array() * sig[j];
        } else {
          if (nu.size() == 0) nu = (set.normals.transpose() * g.omega).array();
          seg += scale * nu.pow(j) * term.coefficient.array() * sig[j];
        }
      }
      offset += n;
    }
  }
}

Eigen::VectorXd CoordinateLayout::embed(const RidgeNeuron& g) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(size_);
  add_embedded(1.0, g, v);
  return v;
}

PairingField CoordinateLayout::field_from_coordinates(const Eigen::Ref<const Eigen::VectorXd>& c) const {
  if (c.size() != size_) throw Error(ErrorKind::InvalidArgument, "coordinate vector has wrong length");
  PairingField field;
  field.dim = dim_;
  Eigen::Index offset = 0;
  for (const auto& block : blocks_) {
    FieldBlock fb{block.points, {}};
    const Eigen::Index n = block.points->size();
    for (const auto& row : block.rows) {
      const auto seg = c.segment(offset, n).array();
      for (const auto& term : row.terms)
        fb.terms.push_back({term.derivative, (term.coefficient.array() * seg).matrix()});
      offset += n;
    }
    field.blocks.push_back(std::move(fb));
  }
  return field;
}

QuadraticObjective::QuadraticObjective(CoordinateLayout layout, Eigen::VectorXd weights,
                                       Eigen::VectorXd target, double offset)
    : layout_(std::move(layout)), weights_(std::move(weights)), target_(std::move(target)), offset_(offset) {
  if (weights_.size() != layout_.size() || target_.size() != layout_.size())
    throw Error(ErrorKind::InvalidArgument, "weights and target must match the coordinate layout");
  if (!(weights_.array() > 0.0).all())
    throw Error(ErrorKind::InvalidArgument, "metric weights must be positive");
}

double QuadraticObjective::value_embedded(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  return 0.5 * (weights_.array() * (v - target_).array().square()).sum() + offset_;
}

PairingField QuadraticObjective::gradient_field(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  return layout_.field_from_coordinates((weights_.array() * (v - target_).array()).matrix());
}

double QuadraticObjective::target_norm2() const {
  return (weights_.array() * target_.array().square()).sum();
}

NonlinearEnergyObjective::NonlinearEnergyObjective(CoordinateLayout layout, Eigen::VectorXd weights,
                                                   Eigen::VectorXd source, double kappa)
    : layout_(std::move(layout)), weights_(std::move(weights)), source_(std::move(source)), kappa_(kappa) {
  if (!(kappa_ > 0.0)) throw Error(ErrorKind::InvalidArgument, "kappa must be positive");
  if (layout_.size() != weights_.size() * (layout_.dim() + 1))
    throw Error(ErrorKind::InvalidArgument, "energy layout must hold u and its gradient");
}

double NonlinearEnergyObjective::value_embedded(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  const Eigen::Index n = weights_.size();
  const auto u = v.head(n).array();
  Eigen::ArrayXd integrand = kappa_ * u.cosh() - source_.array() * u;
  for (int l = 0; l < layout_.dim(); ++l) integrand += 0.5 * v.segment((l + 1) * n, n).array().square();
  const double value = (weights_.array() * integrand).sum();
  if (!std::isfinite(value)) {
    std::ostringstream os;
    os << "energy overflow, max |u| = " << u.abs().maxCoeff();
    throw Error(ErrorKind::NumericError, os.str());
  }
  return value;
}

PairingField NonlinearEnergyObjective::gradient_field(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  const Eigen::Index n = weights_.size();
  Eigen::VectorXd c(v.size());
  const auto u = v.head(n).array();
  c.head(n) = (weights_.array() * (kappa_ * u.sinh() - source_.array())).matrix();
  if (!c.head(n).allFinite()) {
    std::ostringstream os;
    os << "energy gradient overflow, max |u| = " << u.abs().maxCoeff();
    throw Error(ErrorKind::NumericError, os.str());
  }
  for (int l = 0; l < layout_.dim(); ++l)
    c.segment((l + 1) * n, n) = (weights_.array() * v.segment((l + 1) * n, n).array()).matrix();
  return layout_.field_from_coordinates(c);
}

namespace {

PointSetPtr interior_points(const QuadratureRule& rule) {
  auto set = std::make_shared<PointSet>();
  set->points = rule.points;
  return set;
}

PointSetPtr boundary_points(const BoundaryRule& rule) {
  auto set = std::make_shared<PointSet>();
  set->points = rule.points;
  set->normals = rule.normals;
  return set;
}

void check_points_in_domain(const QuadratureRule& rule, const Domain& domain) {
  if (rule.dim() != domain_dim(domain))
    throw Error(ErrorKind::InvalidArgument, "rule dimension does not match the problem domain");
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    const bool inside = std::visit([&](const auto& d) { return d.contains(rule.points.col(i), 1e-9); }, domain);
    if (!inside)
      throw Error(ErrorKind::InvalidArgument, "quadrature point " + std::to_string(i) + " lies outside the domain");
  }
}

Eigen::VectorXd sample_coefficient(const ScalarField& a, const QuadratureRule& rule, const EllipticProblem& p,
                                   const std::string& name) {
  Eigen::VectorXd out(rule.size());
  Eigen::VectorXd x(rule.dim());
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    x = rule.points.col(i);
    const double v = a(x);
    if (!std::isfinite(v) || v <= 0.0 || v < p.coeff_lower || v > p.coeff_upper) {
      std::ostringstream os;
      os << "coefficient " << name << " = " << v << " at point " << i << " (" << x.transpose()
         << ") violates the positivity bounds";
      throw Error(ErrorKind::CoefficientViolation, os.str());
    }
    out(i) = v;
  }
  return out;
}

Eigen::VectorXd sample(const ScalarField& f, const Eigen::MatrixXd& points) {
  Eigen::VectorXd out(points.cols());
  Eigen::VectorXd x(points.rows());
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    x = points.col(i);
    out(i) = f(x);
    if (!std::isfinite(out(i)))
      throw Error(ErrorKind::NumericError, "source is not finite at point " + std::to_string(i));
  }
  return out;
}

std::string alpha_label(const MultiIndex& alpha) {
  std::string s = "d";
  for (int e : alpha.exponents()) s += std::to_string(e);
  return s;
}

struct EnergyParts {
  std::vector<CoordinateBlock> blocks;
  std::vector<Eigen::VectorXd> weights;
  std::vector<Eigen::VectorXd> targets;
  double offset = 0.0;
};

EnergyParts energy_parts(const EllipticProblem& p, const QuadratureRule& rule) {
  if (p.order_m < 1) throw Error(ErrorKind::InvalidArgument, "order m must be >= 1");
  if (p.coeff_top.empty()) throw Error(ErrorKind::InvalidArgument, "top-order coefficients missing");
  for (const auto& [alpha, a] : p.coeff_top)
    if (alpha.order() != p.order_m || alpha.dim() != rule.dim())
      throw Error(ErrorKind::InvalidArgument, "top-order multi-index must have |alpha| = m");
  check_points_in_domain(rule, p.domain);

  const Eigen::Index n = rule.size();
  const int d = rule.dim();
  EnergyParts parts;
  CoordinateBlock block{interior_points(rule), {}};
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

  const Eigen::VectorXd a0 = sample_coefficient(p.coeff_zero, rule, p, "a0");
  const Eigen::VectorXd f = sample(p.source, rule.points);
  block.rows.push_back({"v", {{DerivativeTerm::partial(MultiIndex::zero(d)), ones}}});
  parts.weights.push_back((rule.weights.array() * a0.array()).matrix());
  parts.targets.push_back((f.array() / a0.array()).matrix());
  parts.offset = -0.5 * (rule.weights.array() * f.array().square() / a0.array()).sum();

  for (const auto& [alpha, a] : p.coeff_top) {
    const Eigen::VectorXd aa = sample_coefficient(a, rule, p, alpha_label(alpha));
    block.rows.push_back({alpha_label(alpha), {{DerivativeTerm::partial(alpha), ones}}});
    parts.weights.push_back((rule.weights.array() * aa.array()).matrix());
    parts.targets.push_back(Eigen::VectorXd::Zero(n));
  }
  parts.blocks.push_back(std::move(block));
  return parts;
}

Eigen::VectorXd stack(const std::vector<Eigen::VectorXd>& parts) {
  Eigen::Index total = 0;
  for (const auto& p : parts) total += p.size();
  Eigen::VectorXd out(total);
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    out.segment(offset, p.size()) = p;
    offset += p.size();
  }
  return out;
}

}  // namespace

QuadraticObjective assemble_energy(const EllipticProblem& p, const QuadratureRule& rule) {
  EnergyParts parts = energy_parts(p, rule);
  return QuadraticObjective(CoordinateLayout(rule.dim(), std::move(parts.blocks)), stack(parts.weights),
                            stack(parts.targets), parts.offset);
}

QuadraticObjective assemble_penalized(const EllipticProblem& p, const QuadratureRule& rule,
                                      const BoundaryRule& brule) {
  if (!(p.delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "penalty delta must be positive");
  if (brule.dim() != rule.dim()) throw Error(ErrorKind::InvalidArgument, "boundary rule dimension mismatch");
  EnergyParts parts = energy_parts(p, rule);
  CoordinateBlock block{boundary_points(brule), {}};
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(brule.size());
  for (int k = 0; k < p.order_m; ++k) {
    block.rows.push_back({"trace" + std::to_string(k), {{DerivativeTerm::normal(k), ones}}});
    parts.weights.push_back(brule.weights / p.delta);
    parts.targets.push_back(Eigen::VectorXd::Zero(brule.size()));
  }
  parts.blocks.push_back(std::move(block));
  return QuadraticObjective(CoordinateLayout(rule.dim(), std::move(parts.blocks)), stack(parts.weights),
                            stack(parts.targets), parts.offset);
}

QuadraticObjective assemble_pinn(const PinnProblem& p, const QuadratureRule& interior,
                                 const BoundaryRule& boundary) {
  if (p.op.empty()) throw Error(ErrorKind::InvalidArgument, "PINN operator needs at least one term");
  if (!p.boundary_normal_orders.empty() && boundary.size() == 0)
    throw Error(ErrorKind::InvalidArgument, "boundary operator configured but boundary rule is empty");
  if (interior.size() == 0) throw Error(ErrorKind::InvalidArgument, "interior rule is empty");
  check_points_in_domain(interior, p.domain);

  const int d = interior.dim();
  const Eigen::Index nf = interior.size();
  std::vector<CoordinateBlock> blocks;
  std::vector<Eigen::VectorXd> weights, targets;

  CoordinateBlock inner{interior_points(interior), {}};
  CoordinateRow lv{"Lv", {}};
  for (const auto& [alpha, a] : p.op) {
    if (alpha.dim() != d) throw Error(ErrorKind::InvalidArgument, "operator multi-index dimension mismatch");
    lv.terms.push_back({DerivativeTerm::partial(alpha), sample(a, interior.points)});
  }
  inner.rows.push_back(std::move(lv));
  blocks.push_back(std::move(inner));
  weights.push_back(Eigen::VectorXd::Constant(nf, 2.0 / static_cast<double>(nf)));
  targets.push_back(sample(p.source, interior.points));

  if (!p.boundary_normal_orders.empty()) {
    const Eigen::Index nb = boundary.size();
    const double beta = d == 1 ? 1.0 : 1.0 / static_cast<double>(nb);
    CoordinateBlock outer{boundary_points(boundary), {}};
    for (int k : p.boundary_normal_orders) {
      outer.rows.push_back({"bc" + std::to_string(k), {{DerivativeTerm::normal(k), Eigen::VectorXd::Ones(nb)}}});
      weights.push_back(Eigen::VectorXd::Constant(nb, 2.0 * beta));
      targets.push_back(Eigen::VectorXd::Zero(nb));
    }
    blocks.push_back(std::move(outer));
  }
  return QuadraticObjective(CoordinateLayout(d, std::move(blocks)), stack(weights), stack(targets), 0.0);
}

NonlinearEnergyObjective assemble_nonlinear(const NonlinearEnergyProblem& p, const QuadratureRule& rule) {
  if (!(p.kappa > 0.0)) throw Error(ErrorKind::InvalidArgument, "kappa must be positive");
  check_points_in_domain(rule, p.domain);
  const int d = rule.dim();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(rule.size());
  CoordinateBlock block{interior_points(rule), {}};
  block.rows.push_back({"u", {{DerivativeTerm::partial(MultiIndex::zero(d)), ones}}});
  for (int l = 0; l < d; ++l)
    block.rows.push_back({"du" + std::to_string(l), {{DerivativeTerm::partial(MultiIndex::unit(d, l)), ones}}});
  return NonlinearEnergyObjective(CoordinateLayout(d, {std::move(block)}), rule.weights,
                                  sample(p.source, rule.points), p.kappa);
}

void check_smoothness(const ConvexObjective& obj, const Activation& act) {
  const int order = obj.max_derivative_order();
  if (act.kind == ActivationKind::ReluPower) {
    if (act.degree < order + 1)
      throw Error(ErrorKind::UnsupportedDerivative,
                  "objective uses derivatives of order " + std::to_string(order) +
                      "; relu-power degree must be at least " + std::to_string(order + 1));
  } else if (order > kMaxSigmoidOrder) {
    throw Error(ErrorKind::UnsupportedDerivative,
                "sigmoid derivatives of order " + std::to_string(order) + " are not supported");
  }
}

Eigen::VectorXd embed(const ConvexObjective& obj, const RidgeNeuron& g) {
  check_smoothness(obj, g.activation);
  return obj.layout().embed(g);
}

Eigen::VectorXd embed_expansion(const ConvexObjective& obj, const Expansion& u) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(obj.embedded_size());
  for (const auto& term : u.terms()) {
    check_smoothness(obj, term.neuron.activation);
    obj.layout().add_embedded(term.coefficient, term.neuron, v);
  }
  return v;
}

double objective_value(const ConvexObjective& obj, const Expansion& u) {
  return obj.value_embedded(embed_expansion(obj, u));
}

double residual_pairing(const ConvexObjective& obj, const Expansion& u, const RidgeNeuron& g) {
  check_smoothness(obj, g.activation);
  return pairing(obj.gradient_field(embed_expansion(obj, u)), g);
}

}  // namespace ridgepde
