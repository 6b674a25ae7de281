#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ridgepde/dictionary.hpp"
#include "ridgepde/problem.hpp"
#include "ridgepde/quadrature.hpp"

namespace ridgepde {

struct ExactSolution {
  ScalarField value;
  /// d^alpha u for |alpha| <= max_order.
  std::function<double(const Eigen::VectorXd&, const MultiIndex&)> partial;
  int max_order = 1;
};

using ErrorMap = std::map<std::string, double>;

/// L2, H1_semi, H1 and, for max_order >= 2, H2_semi errors.
ErrorMap error_norms(const Expansion& u, const ExactSolution& exact, const QuadratureRule& fine, int max_order);

/// Sobolev errors up to order m plus the energy norm sqrt(a(e, e)); with a penalty
/// and a boundary rule also the a,delta norm (key energy_penalized).
ErrorMap error_norms(const Expansion& u, const ExactSolution& exact, const QuadratureRule& fine,
                     const EllipticProblem& problem, const BoundaryRule* fine_boundary = nullptr);

/// log(e_prev / e_curr) / log(n_curr / n_prev); absent for nonpositive errors.
std::optional<double> convergence_order(double n_prev, double e_prev, double n_curr, double e_curr);

/// Least-squares slope of -log(e) against log(n).
std::optional<double> fitted_order(const std::vector<double>& n, const std::vector<double>& errors);

struct ReportRow {
  int n = 0;
  std::map<std::string, double> errors;
  std::map<std::string, std::optional<double>> orders;
};

struct ConvergenceReport {
  std::string preset;
  std::vector<std::string> columns;
  std::vector<ReportRow> rows;
  std::vector<std::pair<std::string, std::string>> metadata;

  std::vector<double> column(const std::string& name) const;
  std::vector<double> ns() const;
  void set_meta(const std::string& key, const std::string& value);
  std::optional<std::string> meta(const std::string& key) const;
};

/// Fills the order of every column between consecutive rows.
ConvergenceReport order_table(std::vector<std::string> columns, std::vector<ReportRow> rows);

/// (R(u_n) - R(u)) / (R(0) - R(u)).
double relative_gap(double value_n, double value_exact, double value_zero);
double relative_gap(const ConvexObjective& obj, const Expansion& u_n, double value_exact);

}  // namespace ridgepde
