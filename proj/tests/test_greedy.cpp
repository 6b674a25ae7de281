#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "ridgepde/greedy.hpp"
#include "ridgepde/metrics.hpp"
#include "ridgepde/presets.hpp"

using namespace ridgepde;

namespace {

RidgeNeuron neuron(double w, double b) { return {Eigen::VectorXd::Constant(1, w), b, Activation::relu_power(2)}; }

/// L2 fit of a sparse relu^2 expansion on [-1, 1]: value row only, zero offset.
struct Synthetic {
  Expansion truth;
  std::vector<RidgeNeuron> dictionary;
  std::unique_ptr<QuadraticObjective> objective;
};

Synthetic make_synthetic() {
  Synthetic s;
  for (int i = 0; i <= 20; ++i) {
    const double b = -1.0 + 0.1 * i;
    s.dictionary.push_back(neuron(1.0, b));
    s.dictionary.push_back(neuron(-1.0, b));
  }
  s.truth.add(0.8, s.dictionary[6]);
  s.truth.add(-0.5, s.dictionary[13]);
  s.truth.add(0.3, s.dictionary[21]);
  s.truth.add(-0.25, s.dictionary[30]);
  s.truth.add(0.15, s.dictionary[37]);

  const QuadratureRule rule = gauss_grid(Box::cube(1, -1.0, 1.0), {20}, 2);
  auto points = std::make_shared<PointSet>();
  points->points = rule.points;
  CoordinateLayout layout(1, {{points, {{"v", {{DerivativeTerm::partial(MultiIndex({0})), Eigen::VectorXd::Ones(rule.size())}}}}}});
  const Eigen::VectorXd y = expansion_partial_at(s.truth, rule.points, MultiIndex({0}));
  s.objective = std::make_unique<QuadraticObjective>(std::move(layout), rule.weights, y, 0.0);
  return s;
}

ArgmaxSolver finite_solver(const std::vector<RidgeNeuron>& dict) {
  auto search = std::make_shared<FiniteDictionarySearch>(dict);
  return [search](const PairingField& f, ScoreMode m) { return (*search)(f, m); };
}

ArgmaxSolver exact_solver(int dim = 1) {
  SearchConfig config;
  config.mode = SearchMode::Exact1d;
  auto search = std::make_shared<DictionarySearch>(config, Activation::relu_power(2), dim);
  return [search](const PairingField& f, ScoreMode m) { return (*search)(f, m); };
}

}  // namespace

TEST_CASE("projection toy cases") {
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(3);
  Eigen::VectorXd y(3);
  y << 1.0, 2.0, -1.0;
  const Eigen::VectorXd c = project({y}, y, w);
  CHECK(c(0) == doctest::Approx(1.0).epsilon(1e-12));

  Eigen::VectorXd a(3), b(3);
  a << 1.0, 0.0, 0.0;
  b << 0.0, 1.0, 1.0;
  const Eigen::VectorXd cab = project({a, b}, y, w);
  CHECK(cab(0) == doctest::Approx(y.dot(a) / a.squaredNorm()).epsilon(1e-12));
  CHECK(cab(1) == doctest::Approx(y.dot(b) / b.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("property: projection residual is W-orthogonal to the selection") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd y(20), w(20);
    for (int i = 0; i < 20; ++i) {
      y(i) = n01(rng);
      w(i) = 0.5 + std::abs(n01(rng));
    }
    std::vector<Eigen::VectorXd> J;
    for (int k = 0; k < 5; ++k) {
      Eigen::VectorXd v(20);
      for (int i = 0; i < 20; ++i) v(i) = n01(rng);
      J.push_back(v);
    }
    const Eigen::VectorXd c = project(J, y, w);
    Eigen::VectorXd r = -y;
    for (int k = 0; k < 5; ++k) r += c(k) * J[k];
    auto wnorm = [&](const Eigen::VectorXd& v) { return std::sqrt(v.dot(w.cwiseProduct(v))); };
    for (const auto& j : J) CHECK(std::abs(r.dot(w.cwiseProduct(j))) <= 1e-8 * wnorm(y) * wnorm(j));

    // normal-equation oracle
    Eigen::MatrixXd A(20, 5);
    for (int k = 0; k < 5; ++k) A.col(k) = J[k];
    const Eigen::MatrixXd G = A.transpose() * w.asDiagonal() * A;
    const Eigen::VectorXd direct = G.ldlt().solve(A.transpose() * w.asDiagonal() * y);
    CHECK((c - direct).norm() <= 1e-8 * direct.norm());
  }
}

TEST_CASE("gram projector append and remove") {
  GramProjector g;
  Eigen::VectorXd empty(0);
  REQUIRE(g.append(empty, 2.0, 4.0));
  CHECK(g.coefficients()(0) == doctest::Approx(2.0));
  Eigen::VectorXd cross(1);
  cross << 0.0;
  REQUIRE(g.append(cross, 1.0, 3.0));
  CHECK(g.coefficients()(1) == doctest::Approx(3.0));
  g.remove_last();
  CHECK(g.size() == 1);
  CHECK(g.coefficients()(0) == doctest::Approx(2.0));
}

TEST_CASE("OGA toy with two orthogonal elements") {
  auto points = std::make_shared<PointSet>();
  points->points.resize(1, 2);
  points->points << 0.5, -0.5;
  CoordinateLayout layout(1, {{points, {{"v", {{DerivativeTerm::partial(MultiIndex({0})), Eigen::VectorXd::Ones(2)}}}}}});
  // relu^2 neurons (1, 0) and (-1, 0) embed to (0.25, 0) and (0, 0.25)
  Eigen::VectorXd y(2);
  y << 1.0, 0.0;
  const QuadraticObjective obj(std::move(layout), Eigen::VectorXd::Ones(2), y, 0.0);
  const std::vector<RidgeNeuron> dict = {neuron(-1.0, 0.0), neuron(1.0, 0.0)};
  OgaConfig config;
  OgaState s = oga_init(obj, config);
  REQUIRE(oga_step(s, obj, finite_solver(dict), config) == StepStatus::Selected);
  CHECK(s.selected.front().omega(0) == 1.0);
  CHECK(s.objective == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(s.objective) < 1e-15);
  CHECK(oga_step(s, obj, finite_solver(dict), config) == StepStatus::Converged);

  const PairingField zero = obj.gradient_field(embed(obj, neuron(1.0, 0.0)) * 4.0);
  CHECK(score(dict[0], zero, ScoreMode::Orthogonal) == 0.0);
  const PairingField at0 = obj.gradient_field(Eigen::VectorXd::Zero(2));
  CHECK(score(dict[1], at0, ScoreMode::Orthogonal) < score(dict[0], at0, ScoreMode::Orthogonal));
}

TEST_CASE("property: OGA recovers a sparse expansion over a finite dictionary") {
  Synthetic s = make_synthetic();
  OgaConfig config;
  OgaState state = oga_init(*s.objective, config);
  const ArgmaxSolver solve = finite_solver(s.dictionary);
  int steps = 0;
  while (steps < 25 && state.objective > 1e-10) {
    if (oga_step(state, *s.objective, solve, config) == StepStatus::Converged) break;
    ++steps;
  }
  CHECK(state.objective <= 1e-10);
  CHECK(steps <= 25);
}

TEST_CASE("property: RGA gap decays at least like n^-0.8 on the synthetic") {
  Synthetic s = make_synthetic();
  RgaConfig config;
  config.M = 2.0 * s.truth.l1_norm();
  RgaState state = rga_init(*s.objective);
  const ArgmaxSolver solve = finite_solver(s.dictionary);
  std::vector<double> ns, gaps;
  for (int n = 1; n <= 512; ++n) {
    REQUIRE(rga_step(state, *s.objective, solve, config) == StepStatus::Selected);
    CHECK(state.expansion.l1_norm() <= config.M * (1.0 + 1e-12));
    if (n >= 8 && (n & (n - 1)) == 0) {
      ns.push_back(n);
      gaps.push_back(state.objective);
    }
  }
  const auto slope = fitted_order(ns, gaps);
  REQUIRE(slope.has_value());
  CHECK(*slope >= 0.8);
}

TEST_CASE("RGA step identities") {
  Synthetic s = make_synthetic();
  RgaConfig config;
  config.M = 3.0;
  RgaState state = rga_init(*s.objective);
  const ArgmaxSolver solve = finite_solver(s.dictionary);

  auto expected_sign = [&](const RgaState& st) {
    return solve(s.objective->gradient_field(st.embedded), ScoreMode::Relaxed);
  };

  SearchResult r1 = expected_sign(state);
  rga_step(state, *s.objective, solve, config);
  REQUIRE(state.expansion.size() == 1);
  CHECK(state.expansion.terms()[0].coefficient == -config.M * r1.sign);
  CHECK(state.expansion.l1_norm() == config.M);

  SearchResult r2 = expected_sign(state);
  rga_step(state, *s.objective, solve, config);
  REQUIRE(state.expansion.size() == 1);
  CHECK(state.expansion.terms()[0].coefficient == -config.M * r2.sign);
  CHECK(state.expansion.terms()[0].neuron.bias == r2.neuron.bias);

  const Expansion u2 = state.expansion;
  SearchResult r3 = expected_sign(state);
  rga_step(state, *s.objective, solve, config);
  REQUIRE(state.expansion.size() == 2);
  CHECK(state.expansion.terms()[0].coefficient == doctest::Approx(u2.terms()[0].coefficient / 3.0).epsilon(1e-15));
  CHECK(state.expansion.terms()[1].coefficient == doctest::Approx(-2.0 * config.M / 3.0 * r3.sign).epsilon(1e-15));
  CHECK(state.expansion.l1_norm() <= config.M * (1.0 + 1e-12));
  CHECK(embed_expansion(*s.objective, state.expansion).isApprox(state.embedded, 1e-12));
}

TEST_CASE("property: OGA monotonicity and orthogonality on Example 1") {
  const EllipticCase c = ex1_neumann();
  const QuadratureRule rule = gauss_grid(Box::cube(1, -1.0, 1.0), {200}, 2);
  const QuadraticObjective obj = assemble_energy(c.problem, rule);
  OgaConfig config;
  OgaState state = oga_init(obj, config);
  const ArgmaxSolver solve = exact_solver();
  double prev = state.objective;
  auto wnorm = [&](const Eigen::VectorXd& v) { return std::sqrt(v.dot(obj.weights().cwiseProduct(v))); };
  for (int n = 0; n < 40; ++n) {
    const StepStatus st = oga_step(state, obj, solve, config);
    if (st == StepStatus::Converged) break;
    CHECK(state.objective <= prev + 1e-12 * std::abs(prev));
    prev = state.objective;
    const Eigen::VectorXd r = state.embedded - obj.target();
    for (const auto& g : state.selected) {
      const Eigen::VectorXd j = embed(obj, g);
      CHECK(std::abs(r.dot(obj.weights().cwiseProduct(j))) <= 1e-8 * wnorm(r) * wnorm(j));
    }
  }
  CHECK(state.n >= 30);

  // the residual pairing vanishes on every selected element
  for (const auto& g : state.selected) {
    const double p = residual_pairing(obj, state.expansion, g);
    CHECK(std::abs(p) <= 1e-8 * std::sqrt(obj.target_norm2()) * wnorm(embed(obj, g)));
  }
}

TEST_CASE("OGA re-selection leaves the objective unchanged") {
  Synthetic s = make_synthetic();
  OgaConfig config;
  OgaState state = oga_init(*s.objective, config);
  const ArgmaxSolver solve = finite_solver(s.dictionary);
  oga_step(state, *s.objective, solve, config);
  oga_step(state, *s.objective, solve, config);
  const double before = state.objective;
  const RidgeNeuron again = state.selected.front();
  const ArgmaxSolver repeat = [again](const PairingField&, ScoreMode) {
    SearchResult r;
    r.found = true;
    r.neuron = again;
    r.pairing = 1.0;
    return r;
  };
  const StepStatus st = oga_step(state, *s.objective, repeat, config);
  CHECK(st != StepStatus::Converged);
  CHECK(state.objective == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("Example 1 early iterations converge at the expected orders") {
  const EllipticCase c = ex1_neumann();
  const QuadratureRule rule = gauss_grid(Box::cube(1, -1.0, 1.0), {4000}, 2);
  const QuadratureRule fine = gauss_grid(Box::cube(1, -1.0, 1.0), {8000}, 2);
  const QuadraticObjective obj = assemble_energy(c.problem, rule);
  OgaConfig config;
  SearchConfig sc;
  sc.mode = SearchMode::Exact1d;
  sc.kink_spacing = 2.0 / 4000;
  sc.kink_origin = -1.0;
  auto search = std::make_shared<DictionarySearch>(sc, Activation::relu_power(2), 1);
  const ArgmaxSolver solve = [search](const PairingField& f, ScoreMode m) { return (*search)(f, m); };
  OgaState state = oga_init(obj, config);
  std::vector<double> values;
  ErrorMap e16, e32;
  for (int n = 1; n <= 64; ++n) {
    oga_step(state, obj, solve, config);
    if (n == 16) e16 = error_norms(state.expansion, c.exact, fine, 1);
    if (n == 32) e32 = error_norms(state.expansion, c.exact, fine, 1);
    if (n == 16 || n == 32 || n == 64) values.push_back(state.objective);
  }
  CHECK(values[1] < values[0]);
  CHECK(values[2] < values[1]);
  const double l2 = *convergence_order(16, e16.at("L2"), 32, e32.at("L2"));
  const double h1 = *convergence_order(16, e16.at("H1"), 32, e32.at("H1"));
  CHECK(l2 == doctest::Approx(3.35).epsilon(0.15));
  CHECK(h1 == doctest::Approx(2.24).epsilon(0.15));
}
