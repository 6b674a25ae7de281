#include "ridgepde/pairing.hpp"

#include <algorithm>
#include <string>

namespace ridgepde {

namespace {

void check_dims(const RidgeNeuron& g, const PointSet& set) {
  if (g.dim() != set.dim())
    throw Error(ErrorKind::InvalidArgument, "neuron dimension " + std::to_string(g.dim()) +
                                                " does not match point dimension " +
                                                std::to_string(set.dim()));
}

void check_order(const Activation& act, int order) {
  if (order > act.max_derivative_order())
    throw Error(ErrorKind::UnsupportedDerivative,
                "derivative order " + std::to_string(order) + " requires a smoother activation");
}

Eigen::ArrayXd normal_projection(const PointSet& set, const Eigen::Ref<const Eigen::VectorXd>& omega) {
  if (!set.has_normals())
    throw Error(ErrorKind::InvalidArgument, "normal derivative requested on a set without normals");
  return (set.normals.transpose() * omega).array();
}

}  // namespace

Eigen::ArrayXd term_values(const DerivativeTerm& term, const RidgeNeuron& g, const PointSet& set) {
  check_dims(g, set);
  const int j = term.order();
  check_order(g.activation, j);
  const Eigen::ArrayXd t = (set.points.transpose() * g.omega).array() + g.bias;
  std::vector<Eigen::ArrayXd> sig;
  activation_derivatives(g.activation, t, j, sig);
  if (term.kind == DerivativeTerm::Kind::Partial) return term.alpha.monomial(g.omega) * sig[j];
  return normal_projection(set, g.omega).pow(j) * sig[j];
}

int PairingField::max_order() const {
  int m = 0;
  for (const auto& b : blocks)
    for (const auto& t : b.terms) m = std::max(m, t.derivative.order());
  return m;
}

bool PairingField::is_zero() const {
  for (const auto& b : blocks)
    for (const auto& t : b.terms)
      if (!t.coefficient.isZero(0.0)) return false;
  return true;
}

std::vector<Eigen::ArrayXd> order_coefficients(const FieldBlock& block,
                                               const Eigen::Ref<const Eigen::VectorXd>& omega,
                                               int max_order) {
  const Eigen::Index n = block.points->size();
  std::vector<Eigen::ArrayXd> c(static_cast<std::size_t>(max_order) + 1);
  for (auto& a : c) a.setZero(n);
  Eigen::ArrayXd nu;
  for (const auto& term : block.terms) {
    const int j = term.derivative.order();
    if (j > max_order) continue;
    if (term.derivative.kind == DerivativeTerm::Kind::Partial) {
      const double f = term.derivative.alpha.monomial(omega);
      if (f != 0.0) c[j] += f * term.coefficient.array();
    } else {
      if (nu.size() == 0) nu = normal_projection(*block.points, omega);
      c[j] += nu.pow(j) * term.coefficient.array();
    }
  }
  return c;
}

double pairing(const PairingField& field, const RidgeNeuron& g) {
  double total = 0.0;
  std::vector<Eigen::ArrayXd> sig;
  for (const auto& block : field.blocks) {
    if (block.terms.empty()) continue;
    check_dims(g, *block.points);
    int jmax = 0;
    for (const auto& term : block.terms) jmax = std::max(jmax, term.derivative.order());
    check_order(g.activation, jmax);
    const std::vector<Eigen::ArrayXd> c = order_coefficients(block, g.omega, jmax);
    const Eigen::ArrayXd t = (block.points->points.transpose() * g.omega).array() + g.bias;
    activation_derivatives(g.activation, t, jmax, sig);
    for (int j = 0; j <= jmax; ++j) total += (c[j] * sig[j]).sum();
  }
  return total;
}

PairingDerivatives pairing_with_derivatives(const PairingField& field, const RidgeNeuron& g) {
  const int d = g.dim();
  PairingDerivatives out;
  out.d_omega = Eigen::VectorXd::Zero(d);
  std::vector<Eigen::ArrayXd> sig;
  const int cap = g.activation.kind == ActivationKind::Sigmoid ? kMaxSigmoidOrder : 1 << 20;
  for (const auto& block : field.blocks) {
    if (block.terms.empty()) continue;
    const PointSet& set = *block.points;
    check_dims(g, set);
    int jmax = 0;
    for (const auto& term : block.terms) jmax = std::max(jmax, term.derivative.order());
    check_order(g.activation, jmax);
    const int top = std::min(jmax + 2, cap);
    const Eigen::ArrayXd t = (set.points.transpose() * g.omega).array() + g.bias;
    activation_derivatives(g.activation, t, top, sig);
    auto sig_at = [&](int j) -> const Eigen::ArrayXd& {
      static thread_local Eigen::ArrayXd zero;
      if (j <= top) return sig[j];
      zero.setZero(t.size());
      return zero;
    };

    Eigen::ArrayXd nu;
    for (const auto& term : block.terms) {
      const int j = term.derivative.order();
      const Eigen::ArrayXd coeff = term.coefficient.array();
      if (term.derivative.kind == DerivativeTerm::Kind::Partial) {
        const MultiIndex& alpha = term.derivative.alpha;
        const double f = alpha.monomial(g.omega);
        out.value += f * (coeff * sig[j]).sum();
        out.d_bias2 += f * (coeff * sig_at(j + 2)).sum();
        if (j > 0) {
          const double s = (coeff * sig[j]).sum();
          for (int l = 0; l < d; ++l) out.d_omega(l) += alpha.monomial_derivative(g.omega, l) * s;
        }
        if (j + 1 <= top) {
          const Eigen::ArrayXd w = f * coeff * sig_at(j + 1);
          out.d_bias += w.sum();
          out.d_omega += set.points * w.matrix();
        }
      } else {
        if (nu.size() == 0) nu = normal_projection(set, g.omega);
        const Eigen::ArrayXd f = nu.pow(j);
        out.value += (f * coeff * sig[j]).sum();
        out.d_bias2 += (f * coeff * sig_at(j + 2)).sum();
        if (j > 0) {
          const Eigen::ArrayXd df = j * nu.pow(j - 1) * coeff * sig[j];
          out.d_omega += set.normals * df.matrix();
        }
        if (j + 1 <= top) {
          const Eigen::ArrayXd w = f * coeff * sig_at(j + 1);
          out.d_bias += w.sum();
          out.d_omega += set.points * w.matrix();
        }
      }
    }
  }
  return out;
}

}  // namespace ridgepde
