#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <compare>
#include <vector>

#include "ridgepde/error.hpp"

namespace ridgepde {

enum class ActivationKind { ReluPower, Sigmoid };

/// Highest sigmoid derivative order with a precomputed polynomial.
inline constexpr int kMaxSigmoidOrder = 6;

struct Activation {
  ActivationKind kind = ActivationKind::ReluPower;
  int degree = 1;  // relu-power only

  static Activation relu_power(int k);
  static Activation sigmoid() { return {ActivationKind::Sigmoid, 0}; }

  /// Highest derivative order that neuron_partial accepts.
  int max_derivative_order() const noexcept {
    return kind == ActivationKind::ReluPower ? degree : kMaxSigmoidOrder;
  }

  bool operator==(const Activation&) const = default;
};

namespace detail {

// sigma^(j) = sum_q kSigmoidPoly[j][q] * s^q with s = sigmoid(t).
// Built from d/dt s^q = q s^q - q s^(q+1).
constexpr std::array<std::array<double, kMaxSigmoidOrder + 2>, kMaxSigmoidOrder + 1>
sigmoid_polynomials() {
  std::array<std::array<double, kMaxSigmoidOrder + 2>, kMaxSigmoidOrder + 1> p{};
  p[0][1] = 1.0;
  for (int j = 1; j <= kMaxSigmoidOrder; ++j) {
    for (int q = 1; q <= kMaxSigmoidOrder; ++q) {
      p[j][q] += q * p[j - 1][q];
      p[j][q + 1] -= q * p[j - 1][q];
    }
  }
  return p;
}

inline constexpr auto kSigmoidPoly = sigmoid_polynomials();

constexpr double falling_factorial(int k, int j) {
  double r = 1.0;
  for (int i = 0; i < j; ++i) r *= static_cast<double>(k - i);
  return r;
}

}  // namespace detail

/// j-th derivative of the activation at t. For relu-power the value at the kink
/// t = 0 is 0 for every order.
template <typename Scalar>
Scalar activation_derivative(const Activation& act, Scalar t, int order) {
  if (order < 0 || order > act.max_derivative_order()) {
    throw Error(ErrorKind::UnsupportedDerivative,
                "derivative order " + std::to_string(order) + " exceeds activation smoothness " +
                    std::to_string(act.max_derivative_order()));
  }
  if (act.kind == ActivationKind::ReluPower) {
    if (!(t > Scalar(0))) return Scalar(0);
    const int power = act.degree - order;
    Scalar value = Scalar(detail::falling_factorial(act.degree, order));
    for (int i = 0; i < power; ++i) value *= t;
    return value;
  }
  using std::exp;
  const Scalar s = Scalar(1) / (Scalar(1) + exp(-t));
  Scalar value(0);
  Scalar sq(1);
  for (int q = 0; q <= kMaxSigmoidOrder + 1; ++q) {
    value += Scalar(detail::kSigmoidPoly[order][q]) * sq;
    sq *= s;
  }
  return value;
}

/// Vectorised derivatives of orders 0..max_order. Orders above the activation's
/// smoothness are filled with zeros (the singular part of relu-power
/// derivatives is dropped); callers that need the strict contract use
/// activation_derivative.
void activation_derivatives(const Activation& act, const Eigen::ArrayXd& t, int max_order,
                            std::vector<Eigen::ArrayXd>& out);

class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents);

  static MultiIndex zero(int dim) { return MultiIndex(std::vector<int>(dim, 0)); }
  static MultiIndex unit(int dim, int axis, int power = 1);

  int dim() const noexcept { return static_cast<int>(exponents_.size()); }
  int order() const noexcept { return order_; }
  int operator[](int i) const { return exponents_[i]; }
  const std::vector<int>& exponents() const noexcept { return exponents_; }

  /// omega^alpha.
  template <typename Derived>
  typename Derived::Scalar monomial(const Eigen::MatrixBase<Derived>& omega) const {
    typename Derived::Scalar r(1);
    for (int i = 0; i < dim(); ++i)
      for (int p = 0; p < exponents_[i]; ++p) r *= omega(i);
    return r;
  }

  /// d/d omega_l of omega^alpha.
  template <typename Derived>
  typename Derived::Scalar monomial_derivative(const Eigen::MatrixBase<Derived>& omega, int l) const {
    using Scalar = typename Derived::Scalar;
    if (exponents_[l] == 0) return Scalar(0);
    Scalar r = Scalar(exponents_[l]);
    for (int i = 0; i < dim(); ++i) {
      const int p = i == l ? exponents_[i] - 1 : exponents_[i];
      for (int q = 0; q < p; ++q) r *= omega(i);
    }
    return r;
  }

  auto operator<=>(const MultiIndex& other) const { return exponents_ <=> other.exponents_; }
  bool operator==(const MultiIndex& other) const { return exponents_ == other.exponents_; }

 private:
  std::vector<int> exponents_;
  int order_ = 0;
};

/// All multi-indices of dimension `dim` with |alpha| = order, in lexicographically
/// descending order of exponents ((2,0), (1,1), (0,2) for dim 2, order 2).
std::vector<MultiIndex> multi_indices_of_order(int dim, int order);

/// 2!/alpha! style multinomial coefficient |alpha|! / prod(alpha_i!).
double multinomial(const MultiIndex& alpha);

struct RidgeNeuron {
  Eigen::VectorXd omega;
  double bias = 0.0;
  Activation activation;

  int dim() const noexcept { return static_cast<int>(omega.size()); }
};

/// Admissible bias interval [c1, c2] of a P_k^d dictionary.
struct BiasRange {
  double lower = -2.0;
  double upper = 2.0;
};

/// [-2, 2] when the domain lies in the unit ball, otherwise +-(rho + 1) where rho
/// bounds |x| over the domain.
BiasRange bias_range_for_radius(double rho);

double neuron_eval(const RidgeNeuron& g, const Eigen::Ref<const Eigen::VectorXd>& x);
double neuron_partial(const RidgeNeuron& g, const Eigen::Ref<const Eigen::VectorXd>& x,
                      const MultiIndex& alpha);
/// k-th derivative along `direction`: (omega . direction)^k sigma^(k)(omega . x + b).
double neuron_directional(const RidgeNeuron& g, const Eigen::Ref<const Eigen::VectorXd>& x,
                          const Eigen::Ref<const Eigen::VectorXd>& direction, int order);

struct ExpansionTerm {
  double coefficient = 0.0;
  RidgeNeuron neuron;
};

/// Sparse model u = sum a_i g_i over a shared activation and dimension.
class Expansion {
 public:
  Expansion() = default;

  void add(double coefficient, RidgeNeuron neuron);
  void scale(double factor);
  /// Drops terms whose coefficient is exactly zero.
  void prune_zeros();

  const std::vector<ExpansionTerm>& terms() const noexcept { return terms_; }
  std::vector<ExpansionTerm>& terms() noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  int dim() const noexcept { return terms_.empty() ? 0 : terms_.front().neuron.dim(); }

  double l1_norm() const noexcept;

 private:
  std::vector<ExpansionTerm> terms_;
};

Expansion concatenate(const Expansion& a, const Expansion& b);

double expansion_eval(const Expansion& u, const Eigen::Ref<const Eigen::VectorXd>& x);
double expansion_partial(const Expansion& u, const Eigen::Ref<const Eigen::VectorXd>& x,
                         const MultiIndex& alpha);

/// Values of d^alpha u at every column of `points` (d x N).
Eigen::VectorXd expansion_partial_at(const Expansion& u, const Eigen::MatrixXd& points,
                                     const MultiIndex& alpha);

}  // namespace ridgepde
