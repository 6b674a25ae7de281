#include "ridgepde/presets.hpp"

#include <cmath>
#include <numbers>

namespace ridgepde {

double Polynomial::operator()(double x, int order) const {
  if (order < 0) throw Error(ErrorKind::InvalidArgument, "negative derivative order");
  double v = 0.0;
  for (int i = degree(); i >= order; --i) v = v * x + c_[i] * detail::falling_factorial(i, order);
  return v;
}

Polynomial Polynomial::derivative(int order) const {
  std::vector<double> out;
  for (int i = order; i <= degree(); ++i) out.push_back(c_[i] * detail::falling_factorial(i, order));
  if (out.empty()) out.push_back(0.0);
  return Polynomial(std::move(out));
}

Polynomial Polynomial::pow(int p) const {
  Polynomial r({1.0});
  for (int i = 0; i < p; ++i) r = r * *this;
  return r;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  std::vector<double> out(a.c_.size() + b.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
  return Polynomial(std::move(out));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<double> out(std::max(a.c_.size(), b.c_.size()), 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i) out[i] += a.c_[i];
  for (std::size_t i = 0; i < b.c_.size(); ++i) out[i] += b.c_[i];
  return Polynomial(std::move(out));
}

namespace {

constexpr double kPi = std::numbers::pi;

/// d^j/dx^j cos(a x).
double cos_derivative(double a, double x, int j) { return std::pow(a, j) * std::cos(a * x + j * kPi / 2.0); }

ScalarField constant(double c) {
  return [c](const Eigen::VectorXd&) { return c; };
}

void check_order(const MultiIndex& alpha, int max_order) {
  if (alpha.order() > max_order)
    throw Error(ErrorKind::UnsupportedDerivative, "exact solution derivative order too high");
}

ExactSolution cosine_1d(double a) {
  ExactSolution s;
  s.value = [a](const Eigen::VectorXd& x) { return std::cos(a * x(0)); };
  s.partial = [a](const Eigen::VectorXd& x, const MultiIndex& alpha) { return cos_derivative(a, x(0), alpha[0]); };
  s.max_order = 8;
  return s;
}

EllipticProblem second_order_1d(ScalarField source) {
  EllipticProblem p;
  p.order_m = 1;
  p.coeff_top = {{MultiIndex::unit(1, 0), constant(1.0)}};
  p.coeff_zero = constant(1.0);
  p.source = std::move(source);
  p.domain = Box::cube(1, -1.0, 1.0);
  return p;
}

/// Sum of Gaussians s exp(-(x - c)^2 / K) and their derivatives up to order 4.
double gaussian_sum(double x, int order, double K) {
  constexpr double centers[] = {-0.5, 0.0, 0.5};
  constexpr double scales[] = {0.5, 1.0, 0.5};
  double total = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double z = x - centers[i];
    const double g = scales[i] * std::exp(-z * z / K);
    // d^j/dx^j exp(-z^2/K) = q_j(z) exp(-z^2/K)
    double q = 0.0;
    switch (order) {
      case 0: q = 1.0; break;
      case 1: q = -2.0 * z / K; break;
      case 2: q = 4.0 * z * z / (K * K) - 2.0 / K; break;
      case 3: q = -8.0 * z * z * z / (K * K * K) + 12.0 * z / (K * K); break;
      case 4: q = 16.0 * std::pow(z, 4) / std::pow(K, 4) - 48.0 * z * z / (K * K * K) + 12.0 / (K * K); break;
      default: throw Error(ErrorKind::UnsupportedDerivative, "Gaussian derivative order too high");
    }
    total += q * g;
  }
  return total;
}

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

EllipticCase ex1_neumann() {
  EllipticCase c;
  c.exact = cosine_1d(kPi);
  c.problem = second_order_1d([](const Eigen::VectorXd& x) { return (1.0 + kPi * kPi) * std::cos(kPi * x(0)); });
  return c;
}

EllipticCase ex1_dirichlet(double delta) {
  EllipticCase c;
  c.exact = cosine_1d(kPi / 2.0);
  c.problem = second_order_1d(
      [](const Eigen::VectorXd& x) { return (1.0 + kPi * kPi / 4.0) * std::cos(kPi / 2.0 * x(0)); });
  c.problem.bc = BoundaryCondition::DirichletPenalty;
  c.problem.delta = delta;
  return c;
}

PinnCase ex1_pinn() {
  const EllipticCase base = ex1_neumann();
  PinnCase c;
  c.exact = base.exact;
  c.problem.op = {{MultiIndex::unit(1, 0, 2), constant(-1.0)}, {MultiIndex::zero(1), constant(1.0)}};
  c.problem.source = base.problem.source;
  c.problem.boundary_normal_orders = {1};
  c.problem.domain = base.problem.domain;
  return c;
}

EllipticCase ex2_peaks(double K) {
  // (1 + x)^2 (1 - x^2) = (1 + x)^3 (1 - x)
  const Polynomial poly = Polynomial({1.0, 1.0}).pow(3) * Polynomial({1.0, -1.0});
  auto derivative = [poly, K](double x, int order) {
    double s = 0.0;
    for (int j = 0; j <= order; ++j) s += binom(order, j) * poly(x, j) * gaussian_sum(x, order - j, K);
    return s;
  };
  EllipticCase c;
  c.exact.value = [derivative](const Eigen::VectorXd& x) { return derivative(x(0), 0); };
  c.exact.partial = [derivative](const Eigen::VectorXd& x, const MultiIndex& alpha) {
    check_order(alpha, 4);
    return derivative(x(0), alpha[0]);
  };
  c.exact.max_order = 4;
  c.problem = second_order_1d([derivative](const Eigen::VectorXd& x) {
    return -derivative(x(0), 2) + derivative(x(0), 0);
  });
  return c;
}

EllipticCase ex3_2d() {
  const double a = 2.0 * kPi;
  EllipticCase c;
  c.exact.value = [a](const Eigen::VectorXd& x) { return std::cos(a * x(0)) * std::cos(a * x(1)); };
  c.exact.partial = [a](const Eigen::VectorXd& x, const MultiIndex& alpha) {
    return cos_derivative(a, x(0), alpha[0]) * cos_derivative(a, x(1), alpha[1]);
  };
  c.exact.max_order = 8;
  EllipticProblem& p = c.problem;
  p.order_m = 1;
  p.coeff_top = {{MultiIndex::unit(2, 0), constant(1.0)}, {MultiIndex::unit(2, 1), constant(1.0)}};
  p.coeff_zero = constant(1.0);
  p.source = [a](const Eigen::VectorXd& x) {
    return (1.0 + 2.0 * a * a) * std::cos(a * x(0)) * std::cos(a * x(1));
  };
  p.domain = Box::cube(2, 0.0, 1.0);
  return c;
}

PinnCase ex3_2d_pinn() {
  const EllipticCase base = ex3_2d();
  PinnCase c;
  c.exact = base.exact;
  c.problem.op = {{MultiIndex::unit(2, 0, 2), constant(-1.0)},
                  {MultiIndex::unit(2, 1, 2), constant(-1.0)},
                  {MultiIndex::zero(2), constant(1.0)}};
  c.problem.source = base.problem.source;
  c.problem.boundary_normal_orders = {1};
  c.problem.domain = base.problem.domain;
  return c;
}

EllipticCase ex4_biharmonic() {
  const Polynomial p = Polynomial({-1.0, 0.0, 1.0}).pow(4);
  EllipticCase c;
  c.exact.value = [p](const Eigen::VectorXd& x) { return p(x(0)) * p(x(1)); };
  c.exact.partial = [p](const Eigen::VectorXd& x, const MultiIndex& alpha) {
    return p(x(0), alpha[0]) * p(x(1), alpha[1]);
  };
  c.exact.max_order = 8;
  EllipticProblem& q = c.problem;
  q.order_m = 2;
  q.coeff_top = {{MultiIndex({2, 0}), constant(1.0)},
                 {MultiIndex({1, 1}), constant(2.0)},
                 {MultiIndex({0, 2}), constant(1.0)}};
  q.coeff_zero = constant(1.0);
  q.source = [p](const Eigen::VectorXd& x) {
    const double px = p(x(0)), py = p(x(1));
    return p(x(0), 4) * py + 2.0 * p(x(0), 2) * p(x(1), 2) + px * p(x(1), 4) + px * py;
  };
  q.domain = Box::cube(2, -1.0, 1.0);
  return c;
}

EllipticCase ex5_highdim(int dim) {
  EllipticCase c;
  c.exact.value = [](const Eigen::VectorXd& x) { return (kPi * x.array()).cos().sum(); };
  c.exact.partial = [](const Eigen::VectorXd& x, const MultiIndex& alpha) {
    if (alpha.order() == 0) return (kPi * x.array()).cos().sum();
    int axis = -1;
    for (int i = 0; i < alpha.dim(); ++i) {
      if (alpha[i] == 0) continue;
      if (axis >= 0) return 0.0;
      axis = i;
    }
    return cos_derivative(kPi, x(axis), alpha[axis]);
  };
  c.exact.max_order = 8;
  auto coefficient = [](const Eigen::VectorXd& x) { return std::sqrt(1.0 + (x.array() - 0.5).square().sum()); };
  EllipticProblem& p = c.problem;
  p.order_m = 1;
  for (int l = 0; l < dim; ++l) p.coeff_top.emplace_back(MultiIndex::unit(dim, l), coefficient);
  p.coeff_zero = constant(1.0);
  p.source = [coefficient](const Eigen::VectorXd& x) {
    const double a = coefficient(x);
    double f = 0.0;
    for (Eigen::Index l = 0; l < x.size(); ++l) {
      const double xl = x(l);
      f += kPi * (xl - 0.5) * std::sin(kPi * xl) / a + a * kPi * kPi * std::cos(kPi * xl) + std::cos(kPi * xl);
    }
    return f;
  };
  p.domain = Box::cube(dim, 0.0, 1.0);
  return c;
}

double ex6_laplacian(double r) {
  const double h = kPi / 2.0;
  // sin(h r) / r, with its series near the origin
  const double sinc = r < 1e-4 ? h - h * h * h * r * r / 6.0 : std::sin(h * r) / r;
  return -h * h * std::cos(h * r) - h * sinc;
}

NonlinearCase ex6_poisson_boltzmann(double kappa) {
  const double h = kPi / 2.0;
  NonlinearCase c;
  c.exact.value = [h](const Eigen::VectorXd& x) { return std::cos(h * x.norm()); };
  c.exact.partial = [h](const Eigen::VectorXd& x, const MultiIndex& alpha) {
    const double r = x.norm();
    if (alpha.order() == 0) return std::cos(h * r);
    if (alpha.order() > 1) throw Error(ErrorKind::UnsupportedDerivative, "exact solution derivative order too high");
    const double sinc = r < 1e-4 ? h - h * h * h * r * r / 6.0 : std::sin(h * r) / r;
    const int axis = alpha[0] == 1 ? 0 : 1;
    return -h * sinc * x(axis);
  };
  c.exact.max_order = 1;
  c.problem.kappa = kappa;
  c.problem.source = [h, kappa](const Eigen::VectorXd& x) {
    const double r = x.norm();
    return -ex6_laplacian(r) + kappa * std::sinh(std::cos(h * r));
  };
  c.problem.domain = Disk{2.0};
  return c;
}

}  // namespace ridgepde
