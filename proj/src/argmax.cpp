#include "ridgepde/argmax.hpp"

#include <unsupported/Eigen/Polynomials>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>

namespace ridgepde {

int SearchConfig::bias_count() const {
  if (n_bias > 0) return n_bias;
  const double c = std::max(std::abs(bias.lower), std::abs(bias.upper));
  return std::max(1, static_cast<int>(std::lround(200.0 * c)));
}

double score(const RidgeNeuron& g, const PairingField& field, ScoreMode mode) {
  const double p = pairing(field, g);
  return mode == ScoreMode::Orthogonal ? -0.5 * p * p : -p;
}

namespace {

std::vector<double> bias_grid(const SearchConfig& config) {
  const int nb = config.bias_count();
  std::vector<double> b(static_cast<std::size_t>(nb) + 1);
  for (int i = 0; i <= nb; ++i)
    b[i] = config.bias.lower + (config.bias.upper - config.bias.lower) * i / nb;
  return b;
}

/// Directions of the angular seed grid: polar angles in 2-D, hyperspherical for d >= 3.
std::vector<Eigen::VectorXd> angle_directions(int d, const SearchConfig& config) {
  std::vector<Eigen::VectorXd> dirs;
  if (d == 2) {
    for (int j = 0; j < config.n_theta; ++j) {
      const double th = 2.0 * std::numbers::pi * j / config.n_theta;
      Eigen::VectorXd w(2);
      w << std::cos(th), std::sin(th);
      dirs.push_back(w);
    }
    return dirs;
  }
  const int n = std::max(1, std::min(config.n_theta, config.coarse_angles));
  double count = std::pow(static_cast<double>(n), d - 1);
  if (count > static_cast<double>(config.max_seeds))
    throw Error(ErrorKind::InvalidArgument,
                "hyperspherical seed grid too large for d = " + std::to_string(d) +
                    "; use the axis-restricted dictionary");
  std::vector<int> idx(d - 1, 0);
  Eigen::VectorXd theta(d - 1);
  for (long c = 0; c < static_cast<long>(count); ++c) {
    for (int a = 0; a < d - 1; ++a)
      theta(a) = a == d - 2 ? 2.0 * std::numbers::pi * idx[a] / n : std::numbers::pi * (idx[a] + 0.5) / n;
    dirs.push_back(omega_from_angles(theta));
    for (int a = 0; a < d - 1; ++a) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
  return dirs;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

std::vector<RidgeNeuron> seed_candidates(int d, const SearchConfig& config, const Activation& act) {
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be >= 1");
  std::vector<Eigen::VectorXd> dirs;
  if (d == 1) {
    dirs.push_back(Eigen::VectorXd::Constant(1, -1.0));
    dirs.push_back(Eigen::VectorXd::Constant(1, 1.0));
  } else if (config.mode == SearchMode::AxisRestricted) {
    for (int i = 0; i < d; ++i)
      for (double s : {1.0, -1.0}) dirs.push_back(s * Eigen::VectorXd::Unit(d, i));
  } else {
    dirs = angle_directions(d, config);
  }
  std::vector<RidgeNeuron> out;
  const std::vector<double> biases = bias_grid(config);
  out.reserve(dirs.size() * biases.size());
  for (const auto& w : dirs)
    for (double b : biases) out.push_back({w, b, act});
  return out;
}

Eigen::VectorXd omega_from_angles(const Eigen::Ref<const Eigen::VectorXd>& theta) {
  const int d = static_cast<int>(theta.size()) + 1;
  Eigen::VectorXd w(d);
  double prod = 1.0;
  for (int i = 0; i < d - 1; ++i) {
    w(i) = prod * std::cos(theta(i));
    prod *= std::sin(theta(i));
  }
  w(d - 1) = prod;
  return w;
}

Eigen::VectorXd angles_from_omega(const Eigen::Ref<const Eigen::VectorXd>& omega) {
  const int d = static_cast<int>(omega.size());
  Eigen::VectorXd theta(d - 1);
  for (int i = 0; i < d - 2; ++i) theta(i) = std::atan2(omega.tail(d - i - 1).norm(), omega(i));
  theta(d - 2) = std::atan2(omega(d - 1), omega(d - 2));
  return theta;
}

Eigen::MatrixXd omega_jacobian(const Eigen::Ref<const Eigen::VectorXd>& theta) {
  const int d = static_cast<int>(theta.size()) + 1;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(d, d - 1);
  for (int k = 0; k < d - 1; ++k) {
    // differentiate every component with respect to theta_k
    for (int i = k; i < d; ++i) {
      double v = 1.0;
      for (int m = 0; m < std::min(i, d - 1); ++m) v *= m == k ? std::cos(theta(m)) : std::sin(theta(m));
      if (i < d - 1) v *= i == k ? -std::sin(theta(i)) : std::cos(theta(i));
      jac(i, k) = v;
    }
  }
  return jac;
}

namespace {

struct LocalModel {
  double p = 0.0;
  Eigen::VectorXd grad;
  double pbb = 0.0;
};

/// Parameterization of the neuron in local refinement coordinates; the bias is
/// always the last coordinate.
struct Chart {
  std::function<RidgeNeuron(const Eigen::VectorXd&)> neuron;
  std::function<Eigen::VectorXd(const PairingDerivatives&, const Eigen::VectorXd&)> gradient;
  std::function<void(Eigen::VectorXd&)> clamp;
};

LocalModel local_model(const PairingField& field, const Chart& chart, const Eigen::VectorXd& z) {
  const RidgeNeuron g = chart.neuron(z);
  const PairingDerivatives pd = pairing_with_derivatives(field, g);
  return {pd.value, chart.gradient(pd, z), pd.d_bias2};
}

bool finite(const LocalModel& m) { return std::isfinite(m.p) && m.grad.allFinite() && std::isfinite(m.pbb); }

RefineResult refine_in_chart(const RidgeNeuron& seed, const Eigen::VectorXd& z0, const Chart& chart,
                             const PairingField& field, const SearchConfig& config) {
  RefineResult out{seed, pairing(field, seed), false, 0};
  if (!config.refine_enabled || config.refine_iters <= 0) return out;
  const Eigen::Index nz = z0.size();
  Eigen::VectorXd z = z0;
  chart.clamp(z);
  double best = std::abs(pairing(field, chart.neuron(z)));
  if (!(best >= std::abs(out.pairing))) {
    z = z0;
    best = std::abs(out.pairing);
  }
  const double h = 1e-6;
  for (int iter = 0; iter < config.refine_iters; ++iter) {
    LocalModel m = local_model(field, chart, z);
    if (!finite(m)) {
      out.fallback = true;
      return {seed, pairing(field, seed), true, iter};
    }
    if (m.grad.norm() == 0.0) break;
    const double s = m.p >= 0.0 ? 1.0 : -1.0;
    Eigen::VectorXd step;
    if (config.refine == RefineMethod::Newton) {
      Eigen::MatrixXd hess(nz, nz);
      for (Eigen::Index k = 0; k + 1 < nz; ++k) {
        Eigen::VectorXd zp = z, zm = z;
        zp(k) += h;
        zm(k) -= h;
        const LocalModel mp = local_model(field, chart, zp);
        const LocalModel mm = local_model(field, chart, zm);
        hess.col(k) = (mp.grad - mm.grad) / (2.0 * h);
      }
      hess(nz - 1, nz - 1) = m.pbb;
      for (Eigen::Index k = 0; k + 1 < nz; ++k) hess(k, nz - 1) = hess(nz - 1, k);
      hess = 0.5 * (hess + hess.transpose()).eval();
      if (!hess.allFinite()) {
        return {seed, pairing(field, seed), true, iter};
      }
      // Newton on s * P requires -s * H positive definite
      Eigen::LLT<Eigen::MatrixXd> llt(-s * hess);
      if (llt.info() == Eigen::Success) step = llt.solve(s * m.grad);
    }
    if (step.size() == 0 || !step.allFinite()) step = s * m.grad * (0.25 / m.grad.norm());

    bool improved = false;
    double tau = 1.0;
    Eigen::VectorXd trial;
    double trial_value = 0.0;
    for (int halving = 0; halving <= config.max_halvings; ++halving, tau *= 0.5) {
      trial = z + tau * step;
      chart.clamp(trial);
      trial_value = std::abs(pairing(field, chart.neuron(trial)));
      if (std::isfinite(trial_value) && trial_value > best) {
        improved = true;
        break;
      }
    }
    out.iterations = iter + 1;
    if (!improved) break;
    const double gain = trial_value - best;
    const double moved = (trial - z).norm();
    z = trial;
    best = trial_value;
    if (gain <= 1e-15 * best || moved < 1e-14) break;
  }
  const RidgeNeuron g = chart.neuron(z);
  const double p = pairing(field, g);
  if (std::abs(p) >= std::abs(out.pairing)) {
    out.neuron = g;
    out.pairing = p;
  }
  return out;
}

Chart bias_chart(const RidgeNeuron& seed, const SearchConfig& config) {
  Chart c;
  c.neuron = [seed](const Eigen::VectorXd& z) {
    RidgeNeuron g = seed;
    g.bias = z(0);
    return g;
  };
  c.gradient = [](const PairingDerivatives& pd, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Constant(1, pd.d_bias);
  };
  const double lo = config.bias.lower - config.bias_margin, hi = config.bias.upper + config.bias_margin;
  c.clamp = [lo, hi](Eigen::VectorXd& z) { z(0) = std::clamp(z(0), lo, hi); };
  return c;
}

Chart angle_chart(const RidgeNeuron& seed, const SearchConfig& config) {
  const int d = seed.dim();
  const Activation act = seed.activation;
  Chart c;
  c.neuron = [d, act](const Eigen::VectorXd& z) {
    return RidgeNeuron{omega_from_angles(z.head(d - 1)), z(d - 1), act};
  };
  c.gradient = [d](const PairingDerivatives& pd, const Eigen::VectorXd& z) {
    Eigen::VectorXd g(d);
    g.head(d - 1) = omega_jacobian(z.head(d - 1)).transpose() * pd.d_omega;
    g(d - 1) = pd.d_bias;
    return g;
  };
  const double lo = config.bias.lower - config.bias_margin, hi = config.bias.upper + config.bias_margin;
  c.clamp = [d, lo, hi](Eigen::VectorXd& z) { z(d - 1) = std::clamp(z(d - 1), lo, hi); };
  return c;
}

Chart box_chart(const RidgeNeuron& seed, const SearchConfig& config) {
  const int d = seed.dim();
  const Activation act = seed.activation;
  Chart c;
  c.neuron = [d, act](const Eigen::VectorXd& z) { return RidgeNeuron{z.head(d), z(d), act}; };
  c.gradient = [d](const PairingDerivatives& pd, const Eigen::VectorXd&) {
    Eigen::VectorXd g(d + 1);
    g.head(d) = pd.d_omega;
    g(d) = pd.d_bias;
    return g;
  };
  const double w = config.box_half_width;
  c.clamp = [w](Eigen::VectorXd& z) { z = z.cwiseMax(-w).cwiseMin(w); };
  return c;
}

RefineResult refine_bias_only(const RidgeNeuron& seed, const PairingField& field, const SearchConfig& config) {
  return refine_in_chart(seed, Eigen::VectorXd::Constant(1, seed.bias), bias_chart(seed, config), field, config);
}

}  // namespace

RefineResult refine(const RidgeNeuron& seed, const PairingField& field, const SearchConfig& config) {
  const int d = seed.dim();
  if (seed.activation.kind == ActivationKind::Sigmoid) {
    Eigen::VectorXd z(d + 1);
    z << seed.omega, seed.bias;
    return refine_in_chart(seed, z, box_chart(seed, config), field, config);
  }
  if (d == 1) return refine_bias_only(seed, field, config);
  Eigen::VectorXd z(d);
  z << angles_from_omega(seed.omega), seed.bias;
  return refine_in_chart(seed, z, angle_chart(seed, config), field, config);
}

BiasProfile::BiasProfile(const PairingField& field, const Eigen::Ref<const Eigen::VectorXd>& omega, int degree,
                         const std::vector<std::uint32_t>* order)
    : degree_(degree) {
  if (degree < 1) throw Error(ErrorKind::InvalidArgument, "bias profile needs a relu-power degree >= 1");
  const int k = degree;
  // projections and per-order coefficients over all blocks
  Eigen::Index total = 0;
  for (const auto& block : field.blocks) total += block.points->size();
  const std::size_t width = static_cast<std::size_t>(k) + 1;
  Eigen::ArrayXd p(total);
  // row-major (point, order) so each point's coefficients are contiguous
  Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> c(total, static_cast<Eigen::Index>(width));
  Eigen::Index offset = 0;
  for (const auto& block : field.blocks) {
    const Eigen::Index n = block.points->size();
    p.segment(offset, n) = (block.points->points.transpose() * omega).array();
    const std::vector<Eigen::ArrayXd> cj = order_coefficients(block, omega, k);
    for (int j = 0; j <= k; ++j) c.col(j).segment(offset, n) = cj[j];
    offset += n;
  }

  std::vector<std::uint32_t> local;
  if (!order) {
    local = sort_order(field, omega);
    order = &local;
  }
  if (order->size() != static_cast<std::size_t>(total))
    throw Error(ErrorKind::InvalidArgument, "sort order does not match the field");

  // A_e(i) = sum_j k!/(k-j)! C_j(i) binom(k-j, e) p_i^(k-j-e), so P(b) = sum_e b^e sum_active A_e
  std::vector<double> coef(width * width, 0.0);  // coef[j * width + e]
  for (int j = 0; j <= k; ++j)
    for (int e = 0; e <= k - j; ++e)
      coef[j * width + e] = detail::falling_factorial(k, j) * binomial(k - j, e);

  std::vector<long double> acc(width, 0.0L);
  std::vector<double> powers(width);
  breaks_.clear();
  breaks_.reserve(static_cast<std::size_t>(total));
  prefix_.resize(width * (static_cast<std::size_t>(total) + 1));
  std::fill(prefix_.begin(), prefix_.begin() + static_cast<std::ptrdiff_t>(width), 0.0);
  std::size_t groups = 0;
  const std::size_t count = order->size();
  for (std::size_t r = 0; r < count; ++r) {
    const std::uint32_t i = (*order)[r];
    if (r + 16 < count) {
      const std::uint32_t ahead = (*order)[r + 16];
      __builtin_prefetch(c.data() + static_cast<std::size_t>(ahead) * width);
      __builtin_prefetch(p.data() + ahead);
    }
    const double pi = p(i);
    const double* ci = c.data() + static_cast<std::size_t>(i) * width;
    powers[0] = 1.0;
    for (int q = 1; q <= k; ++q) powers[q] = powers[q - 1] * pi;
    for (int j = 0; j <= k; ++j) {
      if (ci[j] == 0.0) continue;
      const double* cj = coef.data() + j * width;
      const int n = k - j;
      for (int e = 0; e <= n; ++e) acc[e] += cj[e] * ci[j] * powers[n - e];
    }
    if (r + 1 == count || p((*order)[r + 1]) != pi) {
      breaks_.push_back(pi);
      ++groups;
      double* dst = prefix_.data() + groups * width;
      for (std::size_t e = 0; e < width; ++e) dst[e] = static_cast<double>(acc[e]);
    }
  }
  prefix_.resize(width * (groups + 1));
}

std::vector<std::uint32_t> BiasProfile::sort_order(const PairingField& field,
                                                   const Eigen::Ref<const Eigen::VectorXd>& omega) {
  Eigen::Index total = 0;
  for (const auto& block : field.blocks) total += block.points->size();
  Eigen::ArrayXd p(total);
  Eigen::Index offset = 0;
  for (const auto& block : field.blocks) {
    const Eigen::Index n = block.points->size();
    p.segment(offset, n) = (block.points->points.transpose() * omega).array();
    offset += n;
  }
  std::vector<std::uint32_t> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return p(a) > p(b) || (p(a) == p(b) && a < b);
  });
  return order;
}

double BiasProfile::eval(std::size_t groups, double b) const {
  const std::size_t width = static_cast<std::size_t>(degree_) + 1;
  const double* s = prefix_.data() + groups * width;
  double v = s[degree_];
  for (int e = degree_ - 1; e >= 0; --e) v = v * b + s[e];
  return v;
}

std::size_t BiasProfile::active_groups(double b) const {
  const auto it = std::partition_point(breaks_.begin(), breaks_.end(), [b](double q) { return q > -b; });
  return static_cast<std::size_t>(it - breaks_.begin());
}

double BiasProfile::value(double b) const { return static_cast<double>(eval(active_groups(b), b)); }

BiasProfile::Peak BiasProfile::best_of(const std::vector<double>& biases) const {
  Peak best{biases.empty() ? 0.0 : biases.front(), 0.0};
  double best_abs = -1.0;
  for (double b : biases) {
    const double v = value(b);
    if (std::abs(v) > best_abs) {
      best_abs = std::abs(v);
      best = {b, v};
    }
  }
  return best;
}

namespace {

/// Real roots of sum_e c_e x^e inside (lo, hi).
void roots_in(const std::vector<double>& c, double lo, double hi, std::vector<double>& out) {
  out.clear();
  int deg = static_cast<int>(c.size()) - 1;
  while (deg >= 0 && c[deg] == 0.0L) --deg;
  if (deg <= 0) return;
  auto push = [&](double x) {
    if (x > lo && x < hi) out.push_back(static_cast<double>(x));
  };
  if (deg == 1) {
    push(-c[0] / c[1]);
    return;
  }
  if (deg == 2) {
    const double a = c[2], b = c[1], cc = c[0];
    const double disc = b * b - 4.0 * a * cc;
    if (disc < 0.0L) return;
    const double q = -0.5 * (b + (b >= 0.0 ? 1.0 : -1.0) * std::sqrt(disc));
    if (q != 0.0L) push(cc / q);
    push(q / a);
    return;
  }
  Eigen::VectorXd coeffs(deg + 1);
  for (int e = 0; e <= deg; ++e) coeffs(e) = static_cast<double>(c[e]);
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
  solver.compute(coeffs);
  std::vector<double> real;
  solver.realRoots(real, 1e-9 * std::max(1.0, std::abs(hi - lo)));
  for (double x : real) push(x);
}

}  // namespace

BiasProfile::Peak BiasProfile::maximize(double lo, double hi) const {
  if (!(lo <= hi)) throw Error(ErrorKind::InvalidArgument, "empty bias interval");
  const std::size_t m = breaks_.size();
  const double inf = std::numeric_limits<double>::infinity();
  Peak best{lo, 0.0};
  double best_abs = -1.0;
  auto consider = [&](std::size_t groups, double b_eval, double b_report) {
    const double v = eval(groups, b_eval);
    if (std::abs(v) > best_abs) {
      best_abs = std::abs(v);
      best = {b_report, static_cast<double>(v)};
    }
  };
  std::vector<double> deriv(static_cast<std::size_t>(degree_));
  std::vector<double> roots;
  const std::size_t width = static_cast<std::size_t>(degree_) + 1;
  // first interval whose right end reaches lo
  std::size_t r = active_groups(lo);
  for (; r <= m; ++r) {
    const double left = r == 0 ? -inf : -breaks_[r - 1];
    const double right = r == m ? inf : -breaks_[r];
    if (left >= hi) break;
    const double a = std::max(left, lo);
    const double z = std::min(right, hi);
    if (a > z) continue;
    if (left >= lo) {
      const double nudge = std::min(1e-13 * std::max(1.0, std::abs(left)), 0.5 * (z - left));
      consider(r, left, nudge > 0.0 ? left + nudge : left);
    } else {
      consider(r, lo, lo);
    }
    consider(r, z, z);
    if (r == 0 || degree_ < 2) continue;
    const double* s = prefix_.data() + r * width;
    for (int e = 0; e < degree_; ++e) deriv[e] = (e + 1) * s[e + 1];
    roots_in(deriv, a, z, roots);
    for (double x : roots) consider(r, x, x);
  }
  return best;
}

BiasProfile::Peak BiasProfile::maximize_on_lattice(double lo, double hi, double origin, double spacing) const {
  if (!(spacing > 0.0)) throw Error(ErrorKind::InvalidArgument, "kink spacing must be positive");
  if (!(lo <= hi)) throw Error(ErrorKind::InvalidArgument, "empty bias interval");
  if (breaks_.empty()) return {lo, 0.0};
  const double qmax = breaks_.front(), qmin = breaks_.back();
  Peak best{lo, 0.0};
  auto take = [&](const Peak& p) {
    if (std::abs(p.value) > std::abs(best.value)) best = p;
  };
  // kink beyond every point: the profile is one polynomial piece
  if (lo < -qmax) take(maximize(lo, std::min(hi, -qmax)));
  if (hi > -qmin) take(maximize(std::max(lo, -qmin), hi));
  const double j0 = std::ceil((qmin - origin) / spacing - 1e-9);
  const double j1 = std::floor((qmax - origin) / spacing + 1e-9);
  for (double j = j0; j <= j1; ++j) {
    const double b = -(origin + j * spacing);
    if (b < lo || b > hi) continue;
    const double v = value(b);
    if (std::abs(v) > std::abs(best.value)) best = {b, v};
  }
  return best;
}

DictionarySearch::DictionarySearch(SearchConfig config, Activation activation, int dim)
    : config_(std::move(config)), activation_(activation), dim_(dim) {
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be >= 1");
  if (config_.top_k < 1) throw Error(ErrorKind::InvalidArgument, "top_k must be >= 1");
  if (config_.n_theta < 1 || config_.bias_count() < 1)
    throw Error(ErrorKind::InvalidArgument, "grid counts must be >= 1");
  if (!(config_.bias.lower < config_.bias.upper))
    throw Error(ErrorKind::InvalidArgument, "bias range must be nonempty");
  if (config_.mode == SearchMode::Exact1d && dim != 1)
    throw Error(ErrorKind::InvalidArgument, "exact-1d search requires d = 1");
  if (activation_.kind == ActivationKind::Sigmoid && config_.mode != SearchMode::GridRefine)
    throw Error(ErrorKind::InvalidArgument, "sigmoid dictionaries support grid-refine search only");
}

void DictionarySearch::reset_cache(const PairingField& field, std::size_t directions) {
  std::vector<PointSetPtr> key;
  std::size_t total = 0;
  for (const auto& block : field.blocks) {
    key.push_back(block.points);
    total += static_cast<std::size_t>(block.points->size());
  }
  const bool same = key.size() == cache_key_.size() &&
                    std::equal(key.begin(), key.end(), cache_key_.begin()) && cache_.size() == directions;
  if (same) return;
  cache_key_ = std::move(key);
  cache_.assign(directions, {});
  cache_enabled_ = total * directions * sizeof(std::uint32_t) <= config_.sort_cache_bytes;
}

BiasProfile DictionarySearch::profile(const PairingField& field, std::size_t direction,
                                      const Eigen::VectorXd& omega) {
  if (!cache_enabled_) return BiasProfile(field, omega, activation_.degree);
  auto& order = cache_[direction];
  if (order.empty()) order = BiasProfile::sort_order(field, omega);
  return BiasProfile(field, omega, activation_.degree, &order);
}

BiasProfile::Peak DictionarySearch::best_bias(const BiasProfile& profile, double sign) const {
  if (config_.exact_bias && config_.kink_spacing > 0.0 && sign != 0.0)
    return profile.maximize_on_lattice(config_.bias.lower, config_.bias.upper, sign * config_.kink_origin,
                                       config_.kink_spacing);
  if (config_.exact_bias) return profile.maximize(config_.bias.lower, config_.bias.upper);
  return profile.best_of(bias_grid(config_));
}

SearchResult DictionarySearch::search_1d(const PairingField& field) {
  reset_cache(field, 2);
  SearchResult best;
  double best_abs = -1.0;
  for (std::size_t dir = 0; dir < 2; ++dir) {
    const Eigen::VectorXd omega = Eigen::VectorXd::Constant(1, dir == 0 ? 1.0 : -1.0);
    const BiasProfile prof = profile(field, dir, omega);
    const BiasProfile::Peak peak = best_bias(prof, omega(0));
    RidgeNeuron g{omega, peak.bias, activation_};
    double p = pairing(field, g);
    bool fallback = false;
    if (!config_.exact_bias && config_.refine_enabled) {
      const RefineResult rr = refine_bias_only(g, field, config_);
      g = rr.neuron;
      p = rr.pairing;
      fallback = rr.fallback;
    }
    ++best.line_searches;
    if (std::abs(p) > best_abs) {
      best_abs = std::abs(p);
      best.neuron = g;
      best.pairing = p;
      best.refine_fallback = fallback;
    }
  }
  best.candidates = 2;
  return best;
}

SearchResult DictionarySearch::search_axes(const PairingField& field) {
  reset_cache(field, 2 * static_cast<std::size_t>(dim_));
  SearchResult best;
  double best_abs = -1.0;
  for (int axis = 0; axis < dim_; ++axis) {
    for (int s = 0; s < 2; ++s) {
      const std::size_t dir = 2 * static_cast<std::size_t>(axis) + s;
      const Eigen::VectorXd omega = (s == 0 ? 1.0 : -1.0) * Eigen::VectorXd::Unit(dim_, axis);
      const BiasProfile prof = profile(field, dir, omega);
      const BiasProfile::Peak peak = best_bias(prof, s == 0 ? 1.0 : -1.0);
      RidgeNeuron g{omega, peak.bias, activation_};
      double p = pairing(field, g);
      bool fallback = false;
      if (!config_.exact_bias && config_.refine_enabled) {
        const RefineResult rr = refine_bias_only(g, field, config_);
        g = rr.neuron;
        p = rr.pairing;
        fallback = rr.fallback;
      }
      ++best.line_searches;
      if (std::abs(p) > best_abs) {
        best_abs = std::abs(p);
        best.neuron = g;
        best.pairing = p;
        best.refine_fallback = fallback;
      }
    }
  }
  best.candidates = 2L * dim_;
  return best;
}

namespace {

struct Seed {
  std::size_t index;
  RidgeNeuron neuron;
  double value;
};

SearchResult refine_seeds(std::vector<Seed> seeds, const PairingField& field, const SearchConfig& config) {
  std::stable_sort(seeds.begin(), seeds.end(),
                   [](const Seed& a, const Seed& b) { return std::abs(a.value) > std::abs(b.value); });
  if (seeds.size() > static_cast<std::size_t>(config.top_k)) seeds.resize(static_cast<std::size_t>(config.top_k));
  SearchResult best;
  double best_abs = -1.0;
  for (const auto& seed : seeds) {
    RefineResult rr = refine(seed.neuron, field, config);
    if (std::abs(rr.pairing) > best_abs) {
      best_abs = std::abs(rr.pairing);
      best.neuron = rr.neuron;
      best.pairing = rr.pairing;
      best.refine_fallback = rr.fallback;
    }
  }
  return best;
}

}  // namespace

SearchResult DictionarySearch::search_angles(const PairingField& field) {
  const std::vector<Eigen::VectorXd> dirs = angle_directions(dim_, config_);
  reset_cache(field, dirs.size());
  std::vector<Seed> all;
  all.reserve(dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const BiasProfile prof = profile(field, i, dirs[i]);
    const BiasProfile::Peak peak = best_bias(prof, 0.0);
    all.push_back({i, {dirs[i], peak.bias, activation_}, peak.value});
  }
  std::vector<Seed> seeds;
  if (dim_ == 2 && all.size() >= 3) {
    // angular local maxima keep the refined seeds on distinct peaks
    const std::size_t n = all.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double v = std::abs(all[i].value);
      if (v >= std::abs(all[(i + n - 1) % n].value) && v >= std::abs(all[(i + 1) % n].value))
        seeds.push_back(all[i]);
    }
  }
  if (seeds.empty()) seeds = all;
  // re-score seeds directly so the profile only ranks
  for (auto& s : seeds) s.value = pairing(field, s.neuron);
  SearchResult best = refine_seeds(std::move(seeds), field, config_);
  best.line_searches = static_cast<int>(dirs.size());
  best.candidates = static_cast<long>(dirs.size());
  return best;
}

SearchResult DictionarySearch::search_box(const PairingField& field) {
  const int params = dim_ + 1;
  const int n = std::max(1, config_.box_count);
  const double w = config_.box_half_width;
  const double count = std::pow(static_cast<double>(n), params);
  if (count > static_cast<double>(config_.max_seeds))
    throw Error(ErrorKind::InvalidArgument, "parameter box grid too large");
  std::vector<Seed> seeds;
  seeds.reserve(static_cast<std::size_t>(count));
  std::vector<int> idx(params, 0);
  for (long c = 0; c < static_cast<long>(count); ++c) {
    Eigen::VectorXd z(params);
    for (int a = 0; a < params; ++a) z(a) = n == 1 ? 0.0 : -w + 2.0 * w * idx[a] / (n - 1);
    RidgeNeuron g{z.head(dim_), z(dim_), activation_};
    const double p = pairing(field, g);
    seeds.push_back({static_cast<std::size_t>(c), std::move(g), p});
    for (int a = 0; a < params; ++a) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
  SearchResult best = refine_seeds(std::move(seeds), field, config_);
  best.candidates = static_cast<long>(count);
  return best;
}

SearchResult DictionarySearch::operator()(const PairingField& field, ScoreMode mode) {
  if (field.dim != dim_) throw Error(ErrorKind::InvalidArgument, "field dimension does not match the search");
  if (field.is_zero()) return {};
  SearchResult r;
  if (activation_.kind == ActivationKind::Sigmoid) {
    r = search_box(field);
  } else if (config_.mode == SearchMode::AxisRestricted) {
    r = search_axes(field);
  } else if (dim_ == 1) {
    r = search_1d(field);
  } else {
    r = search_angles(field);
  }
  r.found = r.pairing != 0.0 && std::isfinite(r.pairing);
  r.sign = r.pairing >= 0.0 ? 1 : -1;
  r.score = mode == ScoreMode::Orthogonal ? -0.5 * r.pairing * r.pairing : -std::abs(r.pairing);
  return r;
}

SearchResult exact_1d(const PairingField& field, const SearchConfig& config, const Activation& act) {
  SearchConfig c = config;
  c.mode = SearchMode::Exact1d;
  c.exact_bias = true;
  DictionarySearch search(c, act, field.dim);
  return search(field, ScoreMode::Orthogonal);
}

SearchResult axis_restricted(const PairingField& field, const SearchConfig& config, const Activation& act) {
  SearchConfig c = config;
  c.mode = SearchMode::AxisRestricted;
  DictionarySearch search(c, act, field.dim);
  return search(field, ScoreMode::Orthogonal);
}

SearchResult FiniteDictionarySearch::operator()(const PairingField& field, ScoreMode mode) const {
  if (elements_.empty()) throw Error(ErrorKind::DegenerateDictionary, "finite dictionary is empty");
  SearchResult best;
  double best_abs = -1.0;
  for (const auto& g : elements_) {
    const double p = pairing(field, g);
    if (std::abs(p) > best_abs) {
      best_abs = std::abs(p);
      best.neuron = g;
      best.pairing = p;
    }
  }
  best.candidates = static_cast<long>(elements_.size());
  best.found = best.pairing != 0.0;
  best.sign = best.pairing >= 0.0 ? 1 : -1;
  best.score = mode == ScoreMode::Orthogonal ? -0.5 * best.pairing * best.pairing : -std::abs(best.pairing);
  return best;
}

}  // namespace ridgepde
