#include "ridgepde/metrics.hpp"

#include <cmath>
#include <sstream>

namespace ridgepde {

namespace {

/// Weighted sum of squared differences d^alpha (u - exact) over the rule.
double squared_error(const Expansion& u, const ExactSolution& exact, const QuadratureRule& fine,
                     const MultiIndex& alpha, const Eigen::VectorXd* coefficient = nullptr) {
  const Eigen::VectorXd approx = u.empty() ? Eigen::VectorXd::Zero(fine.size())
                                           : expansion_partial_at(u, fine.points, alpha);
  double s = 0.0;
  Eigen::VectorXd x(fine.dim());
  for (Eigen::Index i = 0; i < fine.size(); ++i) {
    x = fine.points.col(i);
    const double e = approx(i) - exact.partial(x, alpha);
    if (!std::isfinite(e)) {
      std::ostringstream os;
      os << "error is not finite at point " << i << " (" << x.transpose() << ")";
      throw Error(ErrorKind::NumericError, os.str());
    }
    s += fine.weights(i) * (coefficient ? (*coefficient)(i) : 1.0) * e * e;
  }
  return s;
}

Eigen::VectorXd sample_field(const ScalarField& a, const Eigen::MatrixXd& points) {
  Eigen::VectorXd out(points.cols());
  Eigen::VectorXd x(points.rows());
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    x = points.col(i);
    out(i) = a(x);
  }
  return out;
}

/// sum_i w_i (d^k/dnu^k (u - exact))(x_i)^2 using the multinomial expansion of the
/// directional derivative.
double squared_trace_error(const Expansion& u, const ExactSolution& exact, const BoundaryRule& rule, int k) {
  const int d = rule.dim();
  const std::vector<MultiIndex> indices = multi_indices_of_order(d, k);
  Eigen::VectorXd diff = Eigen::VectorXd::Zero(rule.size());
  Eigen::VectorXd x(d);
  for (const auto& alpha : indices) {
    const double mult = multinomial(alpha);
    const Eigen::VectorXd approx = u.empty() ? Eigen::VectorXd::Zero(rule.size())
                                             : expansion_partial_at(u, rule.points, alpha);
    for (Eigen::Index i = 0; i < rule.size(); ++i) {
      x = rule.points.col(i);
      const double nu_alpha = alpha.monomial(rule.normals.col(i));
      if (nu_alpha == 0.0) continue;
      diff(i) += mult * nu_alpha * (approx(i) - exact.partial(x, alpha));
    }
  }
  return (rule.weights.array() * diff.array().square()).sum();
}

}  // namespace

ErrorMap error_norms(const Expansion& u, const ExactSolution& exact, const QuadratureRule& fine, int max_order) {
  if (max_order > exact.max_order)
    throw Error(ErrorKind::InvalidArgument, "exact solution lacks derivatives of the requested order");
  const int d = fine.dim();
  ErrorMap out;
  std::vector<double> semi(static_cast<std::size_t>(max_order) + 1, 0.0);
  for (int k = 0; k <= max_order; ++k)
    for (const auto& alpha : multi_indices_of_order(d, k)) semi[k] += squared_error(u, exact, fine, alpha);
  out["L2"] = std::sqrt(semi[0]);
  if (max_order >= 1) {
    out["H1_semi"] = std::sqrt(semi[1]);
    out["H1"] = std::sqrt(semi[0] + semi[1]);
  }
  if (max_order >= 2) out["H2_semi"] = std::sqrt(semi[2]);
  return out;
}

ErrorMap error_norms(const Expansion& u, const ExactSolution& exact, const QuadratureRule& fine,
                     const EllipticProblem& problem, const BoundaryRule* fine_boundary) {
  ErrorMap out = error_norms(u, exact, fine, problem.order_m);
  const int d = fine.dim();
  const Eigen::VectorXd a0 = sample_field(problem.coeff_zero, fine.points);
  double energy = squared_error(u, exact, fine, MultiIndex::zero(d), &a0);
  for (const auto& [alpha, a] : problem.coeff_top) {
    const Eigen::VectorXd aa = sample_field(a, fine.points);
    energy += squared_error(u, exact, fine, alpha, &aa);
  }
  out["energy"] = std::sqrt(energy);
  if (problem.bc == BoundaryCondition::DirichletPenalty && fine_boundary) {
    double penalty = 0.0;
    for (int k = 0; k < problem.order_m; ++k) penalty += squared_trace_error(u, exact, *fine_boundary, k);
    out["energy_penalized"] = std::sqrt(energy + penalty / problem.delta);
  }
  return out;
}

std::optional<double> convergence_order(double n_prev, double e_prev, double n_curr, double e_curr) {
  if (!(e_prev > 0.0) || !(e_curr > 0.0) || !(n_prev > 0.0) || !(n_curr > n_prev)) return std::nullopt;
  return std::log(e_prev / e_curr) / std::log(n_curr / n_prev);
}

std::optional<double> fitted_order(const std::vector<double>& n, const std::vector<double>& errors) {
  if (n.size() != errors.size()) throw Error(ErrorKind::InvalidArgument, "fit inputs differ in length");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] > 0.0 && errors[i] > 0.0) {
      x.push_back(std::log(n[i]));
      y.push_back(std::log(errors[i]));
    }
  }
  if (x.size() < 2) return std::nullopt;
  const double m = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  return -sxy / sxx;
}

std::vector<double> ConvergenceReport::column(const std::string& name) const {
  std::vector<double> out;
  for (const auto& r : rows) {
    const auto it = r.errors.find(name);
    out.push_back(it == r.errors.end() ? std::nan("") : it->second);
  }
  return out;
}

std::vector<double> ConvergenceReport::ns() const {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.n);
  return out;
}

void ConvergenceReport::set_meta(const std::string& key, const std::string& value) {
  for (auto& [k, v] : metadata) {
    if (k == key) {
      v = value;
      return;
    }
  }
  metadata.emplace_back(key, value);
}

std::optional<std::string> ConvergenceReport::meta(const std::string& key) const {
  for (const auto& [k, v] : metadata)
    if (k == key) return v;
  return std::nullopt;
}

ConvergenceReport order_table(std::vector<std::string> columns, std::vector<ReportRow> rows) {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].n <= rows[i - 1].n) throw Error(ErrorKind::InvalidArgument, "n must be strictly increasing");
  ConvergenceReport report;
  report.columns = std::move(columns);
  report.rows = std::move(rows);
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    auto& row = report.rows[i];
    for (const auto& c : report.columns) {
      if (i == 0) {
        row.orders[c] = std::nullopt;
        continue;
      }
      const auto& prev = report.rows[i - 1].errors;
      const auto& curr = row.errors;
      const auto a = prev.find(c);
      const auto b = curr.find(c);
      row.orders[c] = (a == prev.end() || b == curr.end())
                          ? std::nullopt
                          : convergence_order(report.rows[i - 1].n, a->second, row.n, b->second);
    }
  }
  return report;
}

double relative_gap(double value_n, double value_exact, double value_zero) {
  const double denom = value_zero - value_exact;
  if (denom == 0.0 || !std::isfinite(denom))
    throw Error(ErrorKind::InvalidArgument, "relative gap undefined: R(0) equals R(u)");
  return (value_n - value_exact) / denom;
}

double relative_gap(const ConvexObjective& obj, const Expansion& u_n, double value_exact) {
  return relative_gap(objective_value(obj, u_n), value_exact, objective_value(obj, Expansion()));
}

}  // namespace ridgepde
