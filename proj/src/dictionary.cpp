#include "ridgepde/dictionary.hpp"

#include <numeric>
#include <string>

namespace ridgepde {

Activation Activation::relu_power(int k) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "relu-power degree must be >= 1");
  return {ActivationKind::ReluPower, k};
}

void activation_derivatives(const Activation& act, const Eigen::ArrayXd& t, int max_order,
                            std::vector<Eigen::ArrayXd>& out) {
  out.resize(static_cast<std::size_t>(max_order) + 1);
  const Eigen::Index n = t.size();
  if (act.kind == ActivationKind::ReluPower) {
    const int k = act.degree;
    const Eigen::ArrayXd tp = t.max(0.0);
    // powers tp^0 .. tp^k
    std::vector<Eigen::ArrayXd> powers(static_cast<std::size_t>(k) + 1);
    powers[0] = (t > 0.0).cast<double>();
    for (int p = 1; p <= k; ++p) powers[p] = p == 1 ? tp : Eigen::ArrayXd(powers[p - 1] * tp);
    for (int j = 0; j <= max_order; ++j) {
      if (j > k) {
        out[j].setZero(n);
      } else {
        out[j] = detail::falling_factorial(k, j) * powers[k - j];
      }
    }
    return;
  }
  if (max_order > kMaxSigmoidOrder)
    throw Error(ErrorKind::UnsupportedDerivative, "sigmoid derivative order above supported maximum");
  const Eigen::ArrayXd s = 1.0 / (1.0 + (-t).exp());
  for (int j = 0; j <= max_order; ++j) {
    // Horner in s
    Eigen::ArrayXd acc = Eigen::ArrayXd::Constant(n, detail::kSigmoidPoly[j][kMaxSigmoidOrder + 1]);
    for (int q = kMaxSigmoidOrder; q >= 0; --q) acc = acc * s + detail::kSigmoidPoly[j][q];
    out[j] = std::move(acc);
  }
}

MultiIndex::MultiIndex(std::vector<int> exponents) : exponents_(std::move(exponents)) {
  for (int e : exponents_) {
    if (e < 0) throw Error(ErrorKind::InvalidArgument, "multi-index exponents must be nonnegative");
  }
  order_ = std::accumulate(exponents_.begin(), exponents_.end(), 0);
}

MultiIndex MultiIndex::unit(int dim, int axis, int power) {
  std::vector<int> e(dim, 0);
  e.at(axis) = power;
  return MultiIndex(std::move(e));
}

namespace {

void enumerate_indices(int dim, int remaining, std::vector<int>& current, int position,
                       std::vector<MultiIndex>& out) {
  if (position == dim - 1) {
    current[position] = remaining;
    out.emplace_back(current);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[position] = e;
    enumerate_indices(dim, remaining - e, current, position + 1, out);
  }
}

}  // namespace

std::vector<MultiIndex> multi_indices_of_order(int dim, int order) {
  if (dim < 1 || order < 0) throw Error(ErrorKind::InvalidArgument, "bad multi-index request");
  std::vector<MultiIndex> out;
  std::vector<int> current(dim, 0);
  enumerate_indices(dim, order, current, 0, out);
  return out;
}

double multinomial(const MultiIndex& alpha) {
  auto factorial = [](int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
  };
  double r = factorial(alpha.order());
  for (int e : alpha.exponents()) r /= factorial(e);
  return r;
}

BiasRange bias_range_for_radius(double rho) {
  if (!(rho >= 0.0) || !std::isfinite(rho))
    throw Error(ErrorKind::InvalidArgument, "domain radius must be finite and nonnegative");
  if (rho <= 1.0) return {-2.0, 2.0};
  return {-(rho + 1.0), rho + 1.0};
}

namespace {

double preactivation(const RidgeNeuron& g, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != g.omega.size()) {
    throw Error(ErrorKind::InvalidArgument, "point dimension " + std::to_string(x.size()) +
                                                " does not match neuron dimension " +
                                                std::to_string(g.omega.size()));
  }
  return g.omega.dot(x) + g.bias;
}

}  // namespace

double neuron_eval(const RidgeNeuron& g, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return activation_derivative(g.activation, preactivation(g, x), 0);
}

double neuron_partial(const RidgeNeuron& g, const Eigen::Ref<const Eigen::VectorXd>& x,
                      const MultiIndex& alpha) {
  if (alpha.dim() != g.dim())
    throw Error(ErrorKind::InvalidArgument, "multi-index dimension does not match neuron");
  const double t = preactivation(g, x);
  return alpha.monomial(g.omega) * activation_derivative(g.activation, t, alpha.order());
}

double neuron_directional(const RidgeNeuron& g, const Eigen::Ref<const Eigen::VectorXd>& x,
                          const Eigen::Ref<const Eigen::VectorXd>& direction, int order) {
  const double t = preactivation(g, x);
  return std::pow(g.omega.dot(direction), order) * activation_derivative(g.activation, t, order);
}

void Expansion::add(double coefficient, RidgeNeuron neuron) {
  if (!terms_.empty()) {
    const auto& first = terms_.front().neuron;
    if (first.dim() != neuron.dim())
      throw Error(ErrorKind::InvalidArgument, "expansion terms must share dimension");
    if (first.activation.kind != neuron.activation.kind)
      throw Error(ErrorKind::InvalidArgument, "expansion terms must share activation kind");
  }
  terms_.push_back({coefficient, std::move(neuron)});
}

void Expansion::scale(double factor) {
  for (auto& t : terms_) t.coefficient *= factor;
}

void Expansion::prune_zeros() {
  std::erase_if(terms_, [](const ExpansionTerm& t) { return t.coefficient == 0.0; });
}

double Expansion::l1_norm() const noexcept {
  double s = 0.0;
  for (const auto& t : terms_) s += std::abs(t.coefficient);
  return s;
}

Expansion concatenate(const Expansion& a, const Expansion& b) {
  Expansion out = a;
  for (const auto& t : b.terms()) out.add(t.coefficient, t.neuron);
  return out;
}

double expansion_eval(const Expansion& u, const Eigen::Ref<const Eigen::VectorXd>& x) {
  double s = 0.0;
  for (const auto& t : u.terms()) s += t.coefficient * neuron_eval(t.neuron, x);
  return s;
}

double expansion_partial(const Expansion& u, const Eigen::Ref<const Eigen::VectorXd>& x,
                         const MultiIndex& alpha) {
  double s = 0.0;
  for (const auto& t : u.terms()) s += t.coefficient * neuron_partial(t.neuron, x, alpha);
  return s;
}

Eigen::VectorXd expansion_partial_at(const Expansion& u, const Eigen::MatrixXd& points,
                                     const MultiIndex& alpha) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(points.cols());
  std::vector<Eigen::ArrayXd> sig;
  for (const auto& term : u.terms()) {
    const auto& g = term.neuron;
    if (g.dim() != points.rows() || alpha.dim() != g.dim())
      throw Error(ErrorKind::InvalidArgument, "dimension mismatch in expansion evaluation");
    if (alpha.order() > g.activation.max_derivative_order())
      throw Error(ErrorKind::UnsupportedDerivative,
                  "derivative order " + std::to_string(alpha.order()) + " not supported");
    const double factor = alpha.monomial(g.omega);
    if (factor == 0.0) continue;
    const Eigen::ArrayXd t = (points.transpose() * g.omega).array() + g.bias;
    activation_derivatives(g.activation, t, alpha.order(), sig);
    out.array() += (term.coefficient * factor) * sig[alpha.order()];
  }
  return out;
}

}  // namespace ridgepde
