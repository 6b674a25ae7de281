#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "ridgepde/dictionary.hpp"

namespace ridgepde {

/// Axis-aligned box [lower, upper] in R^d.
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static Box cube(int dim, double lo, double hi);

  int dim() const noexcept { return static_cast<int>(lower.size()); }
  double volume() const;
  double boundary_measure() const;
  /// max |x| over the corners.
  double radius() const;
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x, double tol = 1e-12) const;
};

/// Disk of the given radius centred at the origin of R^2.
struct Disk {
  double radius = 1.0;

  int dim() const noexcept { return 2; }
  double volume() const;
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x, double tol = 1e-12) const;
};

using Domain = std::variant<Box, Disk>;

int domain_dim(const Domain& domain);
double domain_volume(const Domain& domain);
double domain_radius(const Domain& domain);
BiasRange bias_range_for(const Domain& domain);
std::string describe(const Domain& domain);

enum class DomainTag { Box, Disk, BoxBoundary };

struct QuadratureRule {
  Eigen::MatrixXd points;  // d x N
  Eigen::VectorXd weights;
  DomainTag tag = DomainTag::Box;
  Domain domain;

  int dim() const noexcept { return static_cast<int>(points.rows()); }
  Eigen::Index size() const noexcept { return points.cols(); }
};

struct BoundaryRule {
  Eigen::MatrixXd points;   // d x N
  Eigen::VectorXd weights;
  Eigen::MatrixXd normals;  // d x N, outward unit normals
  Box box;

  int dim() const noexcept { return static_cast<int>(points.rows()); }
  Eigen::Index size() const noexcept { return points.cols(); }
};

/// Gauss-Legendre nodes and weights on [-1, 1] with n points.
struct GaussLegendre1d {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
GaussLegendre1d gauss_legendre(int n);

/// Composite tensor-product Gauss rule: (t+1)^d nodes in each of the
/// prod(cells) cells; exact for per-variable degree <= 2t+1 on every cell.
QuadratureRule gauss_grid(const Box& box, const std::vector<int>& cells_per_dim, int t);

/// First N Halton points starting at sequence index `first_index` (index 0 is the
/// origin), mapped affinely to the box, with equal weights |box| / N.
QuadratureRule halton(const Box& box, Eigen::Index count, std::uint64_t first_index = 1);

/// Radical inverse of `index` in `base`.
double radical_inverse(std::uint64_t index, int base);

/// Uniform i.i.d. samples on a box or disk with weights |domain| / N. Disk samples
/// use the polar map r = R sqrt(u), theta = 2 pi v.
QuadratureRule monte_carlo(const Domain& domain, Eigen::Index count, std::uint64_t seed);

/// Deterministic polar rule on a disk: Gauss-Legendre in the radius over
/// `radial_cells` cells of t+1 nodes (weighted by r) times `angles` equispaced angles.
QuadratureRule disk_polar_rule(const Disk& disk, int radial_cells, int angles, int t);

/// Exact boundary rule: d = 1 gives the endpoints with weight 1; d = 2 places a
/// composite Gauss rule with `cells_per_edge` cells on every edge.
BoundaryRule boundary_rule(const Box& box, int cells_per_edge, int t);

/// Uniform random samples on every face of the box (open faces), `per_face` each,
/// weights |face| / per_face.
BoundaryRule sampled_boundary(const Box& box, Eigen::Index per_face, std::uint64_t seed);

/// sum w_i f(x_i). Throws numeric-error naming the first point where f is not finite.
double integrate(const QuadratureRule& rule,
                 const std::function<double(const Eigen::VectorXd&)>& f);
double integrate(const BoundaryRule& rule,
                 const std::function<double(const Eigen::VectorXd&)>& f);

/// Uniform [0, 1) double from a 64-bit engine, identical across standard libraries.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed);
  double next();

 private:
  std::mt19937_64 engine_;
};

}  // namespace ridgepde
