#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ridgepde/metrics.hpp"
#include "ridgepde/presets.hpp"
#include "ridgepde/problem.hpp"

using namespace ridgepde;

namespace {

constexpr double kPi = std::numbers::pi;

RidgeNeuron neuron(double w, double b, int k = 2) {
  return {Eigen::VectorXd::Constant(1, w), b, Activation::relu_power(k)};
}

RidgeNeuron neuron2(double w0, double w1, double b, Activation act) {
  Eigen::VectorXd w(2);
  w << w0, w1;
  return {w, b, act};
}

Expansion random_expansion(std::mt19937_64& rng, int dim, int terms, Activation act) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Expansion e;
  for (int i = 0; i < terms; ++i) {
    Eigen::VectorXd w(dim);
    for (int l = 0; l < dim; ++l) w(l) = u(rng);
    w.normalize();
    e.add(u(rng), {w, u(rng), act});
  }
  return e;
}

Eigen::VectorXd point(double x) { return Eigen::VectorXd::Constant(1, x); }

/// Direct quadrature of 1/2 a(v, v) - (f, v) for -u'' + u = f.
double direct_energy_1d(const EllipticCase& c, const QuadratureRule& rule, const Expansion& v) {
  double s = 0.0;
  Eigen::VectorXd x(1);
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    x = rule.points.col(i);
    const double u = expansion_eval(v, x);
    const double du = expansion_partial(v, x, MultiIndex({1}));
    s += rule.weights(i) * (0.5 * (du * du + u * u) - c.problem.source(x) * u);
  }
  return s;
}

}  // namespace

TEST_CASE("energy target structure") {
  EllipticCase c = ex1_neumann();
  c.problem.source = [](const Eigen::VectorXd&) { return 0.0; };
  const QuadratureRule rule = gauss_grid(Box::cube(1, -1.0, 1.0), {4}, 2);
  const QuadraticObjective zero = assemble_energy(c.problem, rule);
  CHECK(zero.target().isZero(0.0));
  CHECK(zero.value_embedded(Eigen::VectorXd::Zero(zero.embedded_size())) == 0.0);

  c.problem.source = [](const Eigen::VectorXd&) { return 2.0; };
  const QuadraticObjective two = assemble_energy(c.problem, rule);
  const Eigen::Index n = rule.size();
  CHECK(two.target().head(n).isApproxToConstant(2.0));
  CHECK(two.target().tail(n).isZero(0.0));
}

TEST_CASE("coordinate layout order") {
  EllipticCase c = ex1_neumann();
  QuadratureRule rule;
  rule.points.resize(1, 2);
  rule.points << -0.5, 0.25;
  rule.weights = Eigen::VectorXd::Ones(2);
  rule.domain = c.problem.domain;
  const QuadraticObjective obj = assemble_energy(c.problem, rule);
  const RidgeNeuron g = neuron(1.0, 0.6);
  const Eigen::VectorXd v = embed(obj, g);
  REQUIRE(v.size() == 4);
  CHECK(v(0) == doctest::Approx(neuron_eval(g, point(-0.5))));
  CHECK(v(1) == doctest::Approx(neuron_eval(g, point(0.25))));
  CHECK(v(2) == doctest::Approx(neuron_partial(g, point(-0.5), MultiIndex({1}))));
  CHECK(v(3) == doctest::Approx(neuron_partial(g, point(0.25), MultiIndex({1}))));

  Expansion scaled;
  scaled.add(3.5, g);
  CHECK(embed_expansion(obj, scaled).isApprox(3.5 * v));
  CHECK(embed(obj, neuron(1.0, -2.0)).isZero(0.0));
}

TEST_CASE("property: energy equivalence against direct quadrature") {
  const EllipticCase c = ex1_neumann();
  const QuadratureRule rule = gauss_grid(Box::cube(1, -1.0, 1.0), {50}, 2);
  const QuadraticObjective obj = assemble_energy(c.problem, rule);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Expansion v = random_expansion(rng, 1, 1 + trial % 5, Activation::relu_power(2));
    const double direct = direct_energy_1d(c, rule, v);
    const double quad = objective_value(obj, v);
    CHECK(std::abs(quad - direct) <= 1e-10 * std::max(std::abs(direct), 1e-300));
  }
  // single neuron from the spec example
  Expansion one;
  one.add(1.0, neuron(1.0, 0.3));
  CHECK(objective_value(obj, one) == doctest::Approx(direct_energy_1d(c, rule, one)).epsilon(1e-10));
}

TEST_CASE("property: value differences match direct quadrature") {
  const EllipticCase c = ex3_2d();
  const QuadratureRule rule = gauss_grid(Box::cube(2, 0.0, 1.0), {6, 6}, 2);
  const QuadraticObjective obj = assemble_energy(c.problem, rule);
  std::mt19937_64 rng(17);
  auto direct = [&](const Expansion& v) {
    double s = 0.0;
    Eigen::VectorXd x(2);
    for (Eigen::Index i = 0; i < rule.size(); ++i) {
      x = rule.points.col(i);
      const double u = expansion_eval(v, x);
      const double ux = expansion_partial(v, x, MultiIndex({1, 0}));
      const double uy = expansion_partial(v, x, MultiIndex({0, 1}));
      s += rule.weights(i) * (0.5 * (ux * ux + uy * uy + u * u) - c.problem.source(x) * u);
    }
    return s;
  };
  for (int trial = 0; trial < 10; ++trial) {
    const Expansion a = random_expansion(rng, 2, 4, Activation::relu_power(2));
    const Expansion b = random_expansion(rng, 2, 3, Activation::relu_power(2));
    const double expected = direct(a) - direct(b);
    const double got = objective_value(obj, a) - objective_value(obj, b);
    CHECK(std::abs(got - expected) <= 1e-10 * std::max({std::abs(direct(a)), std::abs(direct(b))}));
  }
}

TEST_CASE("gradient pairing at zero for the energy") {
  const EllipticCase c = ex1_neumann();
  const QuadratureRule rule = gauss_grid(Box::cube(1, -1.0, 1.0), {20}, 2);
  const QuadraticObjective obj = assemble_energy(c.problem, rule);
  const RidgeNeuron g = neuron(-1.0, 0.2);
  double expected = 0.0;
  Eigen::VectorXd x(1);
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    x = rule.points.col(i);
    expected -= rule.weights(i) * c.problem.source(x) * neuron_eval(g, x);
  }
  CHECK(residual_pairing(obj, Expansion(), g) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("dirichlet penalty block") {
  const double delta = 0.1 / (16.0 * 16.0);
  const EllipticCase c = ex1_dirichlet(delta);
  const QuadratureRule rule = gauss_grid(Box::cube(1, -1.0, 1.0), {10}, 2);
  const BoundaryRule brule = boundary_rule(Box::cube(1, -1.0, 1.0), 1, 2);
  const QuadraticObjective pen = assemble_penalized(c.problem, rule, brule);
  const QuadraticObjective plain = assemble_energy(c.problem, rule);
  REQUIRE(pen.embedded_size() == plain.embedded_size() + 2);
  CHECK(pen.weights().tail(2)(0) == doctest::Approx(256.0 / 0.1));
  CHECK(pen.weights().tail(2)(1) == doctest::Approx(256.0 / 0.1));

  Expansion bump;
  bump.add(1.0, neuron(1.0, 0.5));
  const double v0 = objective_value(plain, bump);
  const double tr = std::pow(expansion_eval(bump, point(1.0)), 2) + std::pow(expansion_eval(bump, point(-1.0)), 2);
  CHECK(objective_value(pen, bump) == doctest::Approx(v0 + 0.5 * tr / delta).epsilon(1e-12));
}

TEST_CASE("penalized value with zero boundary trace equals the energy") {
  const double delta = 1e-3;
  const EllipticCase c = ex1_dirichlet(delta);
  const QuadratureRule rule = gauss_grid(Box::cube(1, -1.0, 1.0), {10}, 2);
  const BoundaryRule brule = boundary_rule(Box::cube(1, -1.0, 1.0), 1, 2);
  const QuadraticObjective pen = assemble_penalized(c.problem, rule, brule);
  const QuadraticObjective plain = assemble_energy(c.problem, rule);
  // third difference of relu^2: supported on (-0.5, 1)
  Expansion bump;
  bump.add(1.0, neuron(1.0, 0.5));
  bump.add(-3.0, neuron(1.0, 0.0));
  bump.add(3.0, neuron(1.0, -0.5));
  bump.add(-1.0, neuron(1.0, -1.0));
  REQUIRE(std::abs(expansion_eval(bump, point(1.0))) < 1e-14);
  REQUIRE(std::abs(expansion_eval(bump, point(-1.0))) < 1e-14);
  CHECK(objective_value(pen, bump) == doctest::Approx(objective_value(plain, bump)).epsilon(1e-13));
}

TEST_CASE("property: penalty grows monotonically as delta shrinks") {
  const QuadratureRule rule = gauss_grid(Box::cube(1, -1.0, 1.0), {10}, 2);
  const BoundaryRule brule = boundary_rule(Box::cube(1, -1.0, 1.0), 1, 2);
  Expansion v;
  v.add(1.0, neuron(1.0, 0.5));
  double prev = -1e300;
  for (double delta : {1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-6}) {
    const double value = objective_value(assemble_penalized(ex1_dirichlet(delta).problem, rule, brule), v);
    CHECK(value > prev);
    prev = value;
  }
  CHECK(prev > 1e5);
}

TEST_CASE("pinn loss components") {
  const PinnCase c = ex1_pinn();
  const QuadratureRule interior = monte_carlo(c.problem.domain, 200, 3);
  const BoundaryRule boundary = boundary_rule(Box::cube(1, -1.0, 1.0), 1, 2);
  const QuadraticObjective obj = assemble_pinn(c.problem, interior, boundary);

  double mse_f = 0.0;
  Eigen::VectorXd x(1);
  for (Eigen::Index i = 0; i < interior.size(); ++i) {
    x = interior.points.col(i);
    mse_f += std::pow(c.problem.source(x), 2);
  }
  mse_f /= static_cast<double>(interior.size());
  CHECK(objective_value(obj, Expansion()) == doctest::Approx(mse_f).epsilon(1e-13));

  std::mt19937_64 rng(8);
  const Expansion v = random_expansion(rng, 1, 4, Activation::relu_power(3));
  double expected = 0.0;
  for (Eigen::Index i = 0; i < interior.size(); ++i) {
    x = interior.points.col(i);
    const double r = -expansion_partial(v, x, MultiIndex({2})) + expansion_eval(v, x) - c.problem.source(x);
    expected += r * r;
  }
  expected /= static_cast<double>(interior.size());
  expected += std::pow(expansion_partial(v, point(-1.0), MultiIndex({1})), 2) +
              std::pow(expansion_partial(v, point(1.0), MultiIndex({1})), 2);
  CHECK(objective_value(obj, v) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("pinn loss vanishes at a representable solution") {
  std::mt19937_64 rng(21);
  const Expansion u = random_expansion(rng, 1, 5, Activation::relu_power(3));
  PinnProblem p;
  p.op = {{MultiIndex({2}), [](const Eigen::VectorXd&) { return -1.0; }},
          {MultiIndex({0}), [](const Eigen::VectorXd&) { return 1.0; }}};
  p.source = [u](const Eigen::VectorXd& x) { return -expansion_partial(u, x, MultiIndex({2})) + expansion_eval(u, x); };
  p.domain = Box::cube(1, -1.0, 1.0);
  const QuadratureRule interior = monte_carlo(p.domain, 100, 4);
  const QuadraticObjective obj = assemble_pinn(p, interior, BoundaryRule{});
  CHECK(std::abs(objective_value(obj, u)) < 1e-24);
}

TEST_CASE("smoothness gate") {
  const QuadratureRule rule = gauss_grid(Box::cube(1, -1.0, 1.0), {4}, 2);
  const QuadraticObjective obj = assemble_energy(ex1_neumann().problem, rule);
  try {
    embed(obj, neuron(1.0, 0.0, 1));
    FAIL("expected unsupported derivative");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedDerivative);
  }
  const PinnCase pc = ex1_pinn();
  const QuadraticObjective pinn =
      assemble_pinn(pc.problem, monte_carlo(pc.problem.domain, 20, 1), boundary_rule(Box::cube(1, -1.0, 1.0), 1, 2));
  CHECK_THROWS_AS(check_smoothness(pinn, Activation::relu_power(2)), Error);
  CHECK_NOTHROW(check_smoothness(pinn, Activation::relu_power(3)));
}

TEST_CASE("nonlinear objective at zero") {
  NonlinearEnergyProblem p;
  p.kappa = 1.0;
  p.source = [](const Eigen::VectorXd&) { return 0.0; };
  p.domain = Disk{2.0};
  const QuadratureRule rule = disk_polar_rule(Disk{2.0}, 8, 32, 2);
  const NonlinearEnergyObjective obj = assemble_nonlinear(p, rule);
  CHECK(objective_value(obj, Expansion()) == doctest::Approx(4.0 * kPi).epsilon(1e-12));
  const RidgeNeuron g = neuron2(0.6, 0.8, 0.1, Activation::sigmoid());
  CHECK(residual_pairing(obj, Expansion(), g) == 0.0);
}

TEST_CASE("property: nonlinear gradient pairing matches finite differences") {
  const NonlinearCase c = ex6_poisson_boltzmann();
  const QuadratureRule rule = monte_carlo(c.problem.domain, 2000, 12);
  const NonlinearEnergyObjective obj = assemble_nonlinear(c.problem, rule);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double eps = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    const Expansion base = random_expansion(rng, 2, 3, Activation::sigmoid());
    const RidgeNeuron g = neuron2(u(rng), u(rng), u(rng), Activation::sigmoid());
    Expansion plus = base, minus = base;
    plus.add(eps, g);
    minus.add(-eps, g);
    const double fd = (objective_value(obj, plus) - objective_value(obj, minus)) / (2.0 * eps);
    const double exact = residual_pairing(obj, base, g);
    CHECK(std::abs(fd - exact) <= 1e-5 * std::max(std::abs(exact), 1.0));
  }
}

TEST_CASE("property: nonlinear objective is convex along random chords") {
  const NonlinearCase c = ex6_poisson_boltzmann();
  const QuadratureRule rule = monte_carlo(c.problem.domain, 1000, 2);
  const NonlinearEnergyObjective obj = assemble_nonlinear(c.problem, rule);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    Expansion a = random_expansion(rng, 2, 3, Activation::sigmoid());
    Expansion b = random_expansion(rng, 2, 3, Activation::sigmoid());
    const double va = objective_value(obj, a), vb = objective_value(obj, b);
    a.scale(0.5);
    b.scale(0.5);
    CHECK(objective_value(obj, concatenate(a, b)) <= 0.5 * va + 0.5 * vb + 1e-12);
  }
}

TEST_CASE("biharmonic bilinear form on x^2 y^2") {
  EllipticCase c = ex4_biharmonic();
  ExactSolution u;
  u.value = [](const Eigen::VectorXd& x) { return x(0) * x(0) * x(1) * x(1); };
  u.partial = [](const Eigen::VectorXd& x, const MultiIndex& a) {
    auto d = [](double t, int k) { return k == 0 ? t * t : k == 1 ? 2 * t : k == 2 ? 2.0 : 0.0; };
    return d(x(0), a[0]) * d(x(1), a[1]);
  };
  u.max_order = 2;
  const QuadratureRule rule = gauss_grid(Box::cube(2, -1.0, 1.0), {2, 2}, 2);
  const ErrorMap e = error_norms(Expansion(), u, rule, c.problem);
  // a(u, u) = 32/5 + 128/9 and (u, u) = 4/25
  CHECK(e.at("energy") * e.at("energy") == doctest::Approx(32.0 / 5.0 + 128.0 / 9.0 + 4.0 / 25.0).epsilon(1e-13));
}

namespace {

/// Richardson-extrapolated central second difference along `axis`.
template <typename F>
double second_difference(const F& f, const Eigen::VectorXd& x, int axis, double h) {
  auto d2 = [&](double s) {
    Eigen::VectorXd p = x, m = x;
    p(axis) += s;
    m(axis) -= s;
    return (f(p) - 2.0 * f(x) + f(m)) / (s * s);
  };
  return (4.0 * d2(h / 2) - d2(h)) / 3.0;
}

/// Richardson-extrapolated d/dx_l (a d/dx_l u) by nested central differences.
template <typename A, typename U>
double flux_difference(const A& a, const U& u, const Eigen::VectorXd& x, int axis, double h) {
  auto div = [&](double s) {
    auto flux = [&](double shift) {
      Eigen::VectorXd c = x, p = x, m = x;
      c(axis) += shift;
      p(axis) += shift + s / 2;
      m(axis) += shift - s / 2;
      return a(c) * (u(p) - u(m)) / s;
    };
    return (flux(s / 2) - flux(-s / 2)) / s;
  };
  return (4.0 * div(h / 2) - div(h)) / 3.0;
}

void check_residual(double lhs, double f) { CHECK(std::abs(lhs - f) <= 1e-6 * std::max(1.0, std::abs(f))); }

}  // namespace

TEST_CASE("property: manufactured sources match finite-difference operators") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-0.9, 0.9);

  const EllipticCase e1 = ex1_neumann();
  const EllipticCase e2 = ex2_peaks();
  for (const auto& [c, h] : {std::pair{&e1, 1e-2}, std::pair{&e2, 2e-3}}) {
    for (int i = 0; i < 20; ++i) {
      const Eigen::VectorXd x = point(u(rng));
      const double lap = second_difference(c->exact.value, x, 0, h);
      check_residual(-lap + c->exact.value(x), c->problem.source(x));
    }
  }

  const EllipticCase e3 = ex3_2d();
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd x(2);
    x << 0.5 + 0.5 * u(rng), 0.5 + 0.5 * u(rng);
    const double lap = second_difference(e3.exact.value, x, 0, 1e-2) + second_difference(e3.exact.value, x, 1, 1e-2);
    check_residual(-lap + e3.exact.value(x), e3.problem.source(x));
  }

  const EllipticCase e5 = ex5_highdim(10);
  const auto& a = e5.problem.coeff_top.front().second;
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd x(10);
    for (int l = 0; l < 10; ++l) x(l) = 0.5 + 0.5 * u(rng);
    double div = 0.0;
    for (int l = 0; l < 10; ++l) div += flux_difference(a, e5.exact.value, x, l, 1e-2);
    check_residual(-div + e5.exact.value(x), e5.problem.source(x));
  }

  const EllipticCase e4 = ex4_biharmonic();
  const auto& ex = e4.exact;
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd x(2);
    x << u(rng), u(rng);
    auto lap = [&](const Eigen::VectorXd& y) {
      return second_difference(ex.value, y, 0, 1e-2) + second_difference(ex.value, y, 1, 1e-2);
    };
    const double bih = second_difference(lap, x, 0, 2e-2) + second_difference(lap, x, 1, 2e-2);
    CHECK(std::abs(bih + ex.value(x) - e4.problem.source(x)) <= 1e-4 * std::max(1.0, std::abs(e4.problem.source(x))));
    const double analytic = ex.partial(x, MultiIndex({4, 0})) + 2 * ex.partial(x, MultiIndex({2, 2})) +
                            ex.partial(x, MultiIndex({0, 4}));
    CHECK(e4.problem.source(x) == doctest::Approx(analytic + ex.value(x)).epsilon(1e-12));
    for (const MultiIndex& alpha : {MultiIndex({2, 0}), MultiIndex({0, 2})}) {
      const int axis = alpha[0] == 2 ? 0 : 1;
      check_residual(second_difference(ex.value, x, axis, 1e-2), ex.partial(x, alpha));
      auto second = [&](const Eigen::VectorXd& y) { return ex.partial(y, alpha); };
      check_residual(second_difference(second, x, axis, 1e-2), ex.partial(x, MultiIndex({2 * alpha[0], 2 * alpha[1]})));
    }
  }

  const NonlinearCase e6 = ex6_poisson_boltzmann();
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd x(2);
    x << 1.4 * u(rng), 1.4 * u(rng);
    const double lap = second_difference(e6.exact.value, x, 0, 1e-2) + second_difference(e6.exact.value, x, 1, 1e-2);
    check_residual(-lap + std::sinh(e6.exact.value(x)), e6.problem.source(x));
  }
  CHECK(ex6_laplacian(0.0) == doctest::Approx(-2.0 * std::pow(kPi / 2.0, 2)).epsilon(1e-15));
}
