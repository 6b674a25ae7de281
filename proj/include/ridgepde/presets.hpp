#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "ridgepde/metrics.hpp"
#include "ridgepde/problem.hpp"

namespace ridgepde {

/// Dense univariate polynomial sum c_i x^i.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coefficients) : c_(std::move(coefficients)) {}

  double operator()(double x, int order = 0) const;
  Polynomial derivative(int order = 1) const;
  Polynomial pow(int p) const;
  int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
  const std::vector<double>& coefficients() const noexcept { return c_; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);

 private:
  std::vector<double> c_;
};

/// Elliptic problem plus analytic solution.
struct EllipticCase {
  EllipticProblem problem;
  ExactSolution exact;
};

struct PinnCase {
  PinnProblem problem;
  ExactSolution exact;
};

struct NonlinearCase {
  NonlinearEnergyProblem problem;
  ExactSolution exact;
};

/// -u'' + u = f on (-1, 1), u = cos(pi x), natural Neumann condition.
EllipticCase ex1_neumann();
/// -u'' + u = f on (-1, 1), u = cos(pi x / 2), boundary penalty delta.
EllipticCase ex1_dirichlet(double delta);
/// Residual form of ex1_neumann with u'(+-1) = 0.
PinnCase ex1_pinn();
/// Three-peak solution (1 + x)^2 (1 - x^2) (sum of Gaussians of width K).
EllipticCase ex2_peaks(double K = 0.01);
/// -Delta u + u = f on (0, 1)^2, u = cos(2 pi x) cos(2 pi y).
EllipticCase ex3_2d();
PinnCase ex3_2d_pinn();
/// Delta^2 u + u = f on (-1, 1)^2, u = (x^2 - 1)^4 (y^2 - 1)^4.
EllipticCase ex4_biharmonic();
/// -div(a grad u) + u = f on (0, 1)^10, a = sqrt(1 + |x - 1/2|^2), u = sum cos(pi x_i).
EllipticCase ex5_highdim(int dim = 10);
/// -Delta u + kappa sinh u = f on the disk of radius 2, u = cos(pi r / 2).
NonlinearCase ex6_poisson_boltzmann(double kappa = 1.0);

/// Laplacian of the ex6 solution, with the series limit at r = 0.
double ex6_laplacian(double r);

}  // namespace ridgepde
