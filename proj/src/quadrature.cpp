#include "ridgepde/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace ridgepde {

Box Box::cube(int dim, double lo, double hi) {
  return {Eigen::VectorXd::Constant(dim, lo), Eigen::VectorXd::Constant(dim, hi)};
}

double Box::volume() const { return (upper - lower).prod(); }

double Box::boundary_measure() const {
  const Eigen::VectorXd len = upper - lower;
  if (dim() == 1) return 2.0;
  double s = 0.0;
  for (int i = 0; i < dim(); ++i) s += 2.0 * len.prod() / len(i);
  return s;
}

double Box::radius() const {
  double r2 = 0.0;
  for (int i = 0; i < dim(); ++i) r2 += std::max(lower(i) * lower(i), upper(i) * upper(i));
  return std::sqrt(r2);
}

bool Box::contains(const Eigen::Ref<const Eigen::VectorXd>& x, double tol) const {
  return ((x - lower).array() >= -tol).all() && ((upper - x).array() >= -tol).all();
}

double Disk::volume() const { return std::numbers::pi * radius * radius; }

bool Disk::contains(const Eigen::Ref<const Eigen::VectorXd>& x, double tol) const {
  return x.norm() <= radius + tol;
}

int domain_dim(const Domain& domain) {
  return std::visit([](const auto& d) { return d.dim(); }, domain);
}

double domain_volume(const Domain& domain) {
  return std::visit([](const auto& d) { return d.volume(); }, domain);
}

double domain_radius(const Domain& domain) {
  if (const auto* box = std::get_if<Box>(&domain)) return box->radius();
  return std::get<Disk>(domain).radius;
}

BiasRange bias_range_for(const Domain& domain) { return bias_range_for_radius(domain_radius(domain)); }

std::string describe(const Domain& domain) {
  std::ostringstream os;
  if (const auto* box = std::get_if<Box>(&domain)) {
    os << "box";
    for (int i = 0; i < box->dim(); ++i) os << (i ? "x" : " ") << "[" << box->lower(i) << "," << box->upper(i) << "]";
  } else {
    os << "disk radius " << std::get<Disk>(domain).radius;
  }
  return os.str();
}

namespace {

void check_box(const Box& box) {
  if (box.lower.size() != box.upper.size() || box.dim() < 1)
    throw Error(ErrorKind::InvalidArgument, "box bounds must have matching positive dimension");
  if (!box.lower.allFinite() || !box.upper.allFinite())
    throw Error(ErrorKind::InvalidArgument, "box bounds must be finite");
  if (((box.upper - box.lower).array() <= 0.0).any())
    throw Error(ErrorKind::InvalidArgument, "box is empty");
}

constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
                           59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131};

}  // namespace

GaussLegendre1d gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "Gauss-Legendre needs at least one node");
  GaussLegendre1d rule{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // three-term recurrence for P_n and its derivative
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // final derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) {
      dp = 1.0;
    } else {
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes(i) = -x;
    rule.nodes(n - 1 - i) = x;
    rule.weights(i) = w;
    rule.weights(n - 1 - i) = w;
  }
  if (n % 2 == 1) rule.nodes(n / 2) = 0.0;
  return rule;
}

QuadratureRule gauss_grid(const Box& box, const std::vector<int>& cells_per_dim, int t) {
  check_box(box);
  if (t < 0) throw Error(ErrorKind::InvalidArgument, "Gauss order t must be >= 0");
  const int d = box.dim();
  if (static_cast<int>(cells_per_dim.size()) != d)
    throw Error(ErrorKind::InvalidArgument, "cells_per_dim must have one entry per dimension");
  for (int c : cells_per_dim)
    if (c < 1) throw Error(ErrorKind::InvalidArgument, "each dimension needs at least one cell");

  const GaussLegendre1d gl = gauss_legendre(t + 1);
  // 1-D composite rules per axis
  std::vector<Eigen::VectorXd> nodes(d), weights(d);
  for (int a = 0; a < d; ++a) {
    const int cells = cells_per_dim[a];
    const double h = (box.upper(a) - box.lower(a)) / cells;
    nodes[a].resize(static_cast<Eigen::Index>(cells) * (t + 1));
    weights[a].resize(nodes[a].size());
    for (int c = 0; c < cells; ++c) {
      const double left = box.lower(a) + c * h;
      for (int q = 0; q <= t; ++q) {
        nodes[a](c * (t + 1) + q) = left + 0.5 * h * (gl.nodes(q) + 1.0);
        weights[a](c * (t + 1) + q) = 0.5 * h * gl.weights(q);
      }
    }
  }
  Eigen::Index total = 1;
  for (int a = 0; a < d; ++a) total *= nodes[a].size();

  QuadratureRule rule;
  rule.points.resize(d, total);
  rule.weights.resize(total);
  rule.tag = DomainTag::Box;
  rule.domain = box;
  std::vector<Eigen::Index> idx(d, 0);
  for (Eigen::Index p = 0; p < total; ++p) {
    double w = 1.0;
    for (int a = 0; a < d; ++a) {
      rule.points(a, p) = nodes[a](idx[a]);
      w *= weights[a](idx[a]);
    }
    rule.weights(p) = w;
    // first axis fastest
    for (int a = 0; a < d; ++a) {
      if (++idx[a] < nodes[a].size()) break;
      idx[a] = 0;
    }
  }
  return rule;
}

double radical_inverse(std::uint64_t index, int base) {
  double inv_base = 1.0 / base;
  double scale = inv_base;
  double r = 0.0;
  while (index > 0) {
    r += static_cast<double>(index % base) * scale;
    index /= base;
    scale *= inv_base;
  }
  return r;
}

QuadratureRule halton(const Box& box, Eigen::Index count, std::uint64_t first_index) {
  check_box(box);
  const int d = box.dim();
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "Halton rule needs at least one point");
  if (d > static_cast<int>(std::size(kPrimes)))
    throw Error(ErrorKind::InvalidArgument, "dimension exceeds the supported Halton bases");
  QuadratureRule rule;
  rule.points.resize(d, count);
  rule.weights = Eigen::VectorXd::Constant(count, box.volume() / static_cast<double>(count));
  rule.domain = box;
  const Eigen::VectorXd len = box.upper - box.lower;
  for (Eigen::Index i = 0; i < count; ++i) {
    const std::uint64_t index = first_index + static_cast<std::uint64_t>(i);
    for (int a = 0; a < d; ++a)
      rule.points(a, i) = box.lower(a) + len(a) * radical_inverse(index, kPrimes[a]);
  }
  return rule;
}

UniformSource::UniformSource(std::uint64_t seed) : engine_(seed) {}

double UniformSource::next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

QuadratureRule monte_carlo(const Domain& domain, Eigen::Index count, std::uint64_t seed) {
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "Monte-Carlo rule needs at least one point");
  UniformSource rng(seed);
  QuadratureRule rule;
  rule.domain = domain;
  const int d = domain_dim(domain);
  rule.points.resize(d, count);
  rule.weights = Eigen::VectorXd::Constant(count, domain_volume(domain) / static_cast<double>(count));
  if (const auto* box = std::get_if<Box>(&domain)) {
    check_box(*box);
    rule.tag = DomainTag::Box;
    for (Eigen::Index i = 0; i < count; ++i)
      for (int a = 0; a < d; ++a)
        rule.points(a, i) = box->lower(a) + (box->upper(a) - box->lower(a)) * rng.next();
  } else {
    const double radius = std::get<Disk>(domain).radius;
    if (!(radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "disk radius must be positive");
    rule.tag = DomainTag::Disk;
    for (Eigen::Index i = 0; i < count; ++i) {
      const double r = radius * std::sqrt(rng.next());
      const double theta = 2.0 * std::numbers::pi * rng.next();
      rule.points(0, i) = r * std::cos(theta);
      rule.points(1, i) = r * std::sin(theta);
    }
  }
  return rule;
}

QuadratureRule disk_polar_rule(const Disk& disk, int radial_cells, int angles, int t) {
  if (radial_cells < 1 || angles < 1 || t < 0 || !(disk.radius > 0.0))
    throw Error(ErrorKind::InvalidArgument, "bad disk rule parameters");
  const GaussLegendre1d gl = gauss_legendre(t + 1);
  const Eigen::Index count = static_cast<Eigen::Index>(radial_cells) * (t + 1) * angles;
  QuadratureRule rule;
  rule.tag = DomainTag::Disk;
  rule.domain = disk;
  rule.points.resize(2, count);
  rule.weights.resize(count);
  const double h = disk.radius / radial_cells;
  const double dtheta = 2.0 * std::numbers::pi / angles;
  Eigen::Index p = 0;
  for (int c = 0; c < radial_cells; ++c) {
    for (int q = 0; q <= t; ++q) {
      const double r = c * h + 0.5 * h * (gl.nodes(q) + 1.0);
      const double wr = 0.5 * h * gl.weights(q) * r;
      for (int j = 0; j < angles; ++j) {
        const double theta = (j + 0.5) * dtheta;
        rule.points(0, p) = r * std::cos(theta);
        rule.points(1, p) = r * std::sin(theta);
        rule.weights(p) = wr * dtheta;
        ++p;
      }
    }
  }
  return rule;
}

BoundaryRule boundary_rule(const Box& box, int cells_per_edge, int t) {
  check_box(box);
  const int d = box.dim();
  BoundaryRule rule;
  rule.box = box;
  if (d == 1) {
    rule.points.resize(1, 2);
    rule.points << box.lower(0), box.upper(0);
    rule.weights = Eigen::VectorXd::Ones(2);
    rule.normals.resize(1, 2);
    rule.normals << -1.0, 1.0;
    return rule;
  }
  if (d != 2)
    throw Error(ErrorKind::UnsupportedDomain,
                "exact boundary rules exist for d <= 2; use sampled_boundary in higher dimensions");
  if (cells_per_edge < 1 || t < 0)
    throw Error(ErrorKind::InvalidArgument, "bad boundary rule parameters");

  const GaussLegendre1d gl = gauss_legendre(t + 1);
  const Eigen::Index per_edge = static_cast<Eigen::Index>(cells_per_edge) * (t + 1);
  rule.points.resize(2, 4 * per_edge);
  rule.normals.resize(2, 4 * per_edge);
  rule.weights.resize(4 * per_edge);
  Eigen::Index p = 0;
  // faces: x = lower, x = upper, y = lower, y = upper
  for (int axis = 0; axis < 2; ++axis) {
    const int along = 1 - axis;
    const double h = (box.upper(along) - box.lower(along)) / cells_per_edge;
    for (int side = 0; side < 2; ++side) {
      const double fixed = side == 0 ? box.lower(axis) : box.upper(axis);
      for (int c = 0; c < cells_per_edge; ++c) {
        for (int q = 0; q <= t; ++q) {
          rule.points(axis, p) = fixed;
          rule.points(along, p) = box.lower(along) + c * h + 0.5 * h * (gl.nodes(q) + 1.0);
          rule.weights(p) = 0.5 * h * gl.weights(q);
          rule.normals(axis, p) = side == 0 ? -1.0 : 1.0;
          rule.normals(along, p) = 0.0;
          ++p;
        }
      }
    }
  }
  return rule;
}

BoundaryRule sampled_boundary(const Box& box, Eigen::Index per_face, std::uint64_t seed) {
  check_box(box);
  if (per_face < 1) throw Error(ErrorKind::InvalidArgument, "need at least one sample per face");
  const int d = box.dim();
  UniformSource rng(seed);
  BoundaryRule rule;
  rule.box = box;
  const Eigen::Index count = 2 * d * per_face;
  rule.points.resize(d, count);
  rule.normals = Eigen::MatrixXd::Zero(d, count);
  rule.weights.resize(count);
  const Eigen::VectorXd len = box.upper - box.lower;
  Eigen::Index p = 0;
  for (int axis = 0; axis < d; ++axis) {
    const double face = d == 1 ? 1.0 : len.prod() / len(axis);
    for (int side = 0; side < 2; ++side) {
      for (Eigen::Index i = 0; i < per_face; ++i) {
        for (int a = 0; a < d; ++a) {
          if (a == axis) {
            rule.points(a, p) = side == 0 ? box.lower(a) : box.upper(a);
          } else {
            rule.points(a, p) = box.lower(a) + len(a) * rng.next();
          }
        }
        rule.normals(axis, p) = side == 0 ? -1.0 : 1.0;
        rule.weights(p) = face / static_cast<double>(per_face);
        ++p;
      }
    }
  }
  return rule;
}

namespace {

template <typename Rule>
double integrate_points(const Rule& rule, const std::function<double(const Eigen::VectorXd&)>& f) {
  double s = 0.0;
  Eigen::VectorXd x(rule.points.rows());
  for (Eigen::Index i = 0; i < rule.points.cols(); ++i) {
    x = rule.points.col(i);
    const double v = f(x);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "integrand is not finite at point index " << i << " (" << x.transpose() << ")";
      throw Error(ErrorKind::NumericError, os.str());
    }
    s += rule.weights(i) * v;
  }
  return s;
}

}  // namespace

double integrate(const QuadratureRule& rule, const std::function<double(const Eigen::VectorXd&)>& f) {
  return integrate_points(rule, f);
}

double integrate(const BoundaryRule& rule, const std::function<double(const Eigen::VectorXd&)>& f) {
  return integrate_points(rule, f);
}

}  // namespace ridgepde
