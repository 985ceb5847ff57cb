#include "clab/weight.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace clab {

namespace {

std::string node_text(const ScalarField& f, int i) {
  std::ostringstream s;
  s.precision(17);
  s << "node " << i << " (x' = " << f.coordinate(0, i) << ")";
  return s.str();
}

std::function<double(double)> piecewise_linear(const ScalarField& v) {
  const Axis ax = v.grid().xp;
  std::vector<double> y(v.values().begin(), v.values().end());
  return [ax, y](double x) {
    const double r = (x - ax.lo) / ax.h;
    int i = static_cast<int>(std::floor(r));
    i = std::clamp(i, 0, ax.n - 2);
    const double w = std::clamp(r - i, 0.0, 1.0);
    if (w == 0.0) return y[static_cast<std::size_t>(i)];
    if (w == 1.0) return y[static_cast<std::size_t>(i + 1)];
    return (1.0 - w) * y[static_cast<std::size_t>(i)] + w * y[static_cast<std::size_t>(i + 1)];
  };
}

/// Nodes of an axis inside [lo, hi] plus the two bounds themselves.
std::vector<double> sample_points(const Axis& ax, double lo, double hi) {
  std::vector<double> p{lo, hi};
  for (int i = 0; i < ax.n; ++i) {
    const double x = ax.node(i);
    if (x > lo && x < hi) p.push_back(x);
  }
  return p;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

void check_D0(const CylinderGeometry& g, Interval d0) {
  const double tol = 1e-12 * std::max(1.0, std::abs(g.d_hi - g.d_lo));
  if (!(d0.lo < d0.hi)) throw WeightError("D0", "D0 must be a non-empty interval");
  if (d0.lo < g.d_lo - tol || d0.hi > g.d_hi + tol) {
    throw WeightError("D0", "D0 must lie inside the closure of D");
  }
  const double gamma = g.gamma_coordinate();
  const double opposite = g.opposite_coordinate();
  const bool touches_gamma = std::abs((g.gamma_side == GammaSide::Hi ? d0.hi : d0.lo) - gamma) <= tol;
  const bool touches_opposite =
      std::abs((g.gamma_side == GammaSide::Hi ? d0.lo : d0.hi) - opposite) <= tol;
  if (touches_opposite) {
    throw WeightError("D0", "the closure of D0 may meet the boundary of D only on Gamma");
  }
  if (!touches_gamma) {
    throw WeightError("D0", "D0 must share the Gamma endpoint with D");
  }
}

}  // namespace

// --- base function -----------------------------------------------------------

BaseFunction build_d(const CylinderGeometry& geometry) {
  geometry.validate();
  const double lo = geometry.d_lo;
  const double len = geometry.d_hi - geometry.d_lo;
  BaseFunction d;
  if (geometry.gamma_side == GammaSide::Hi) {
    d.eval = [lo, len](double x) { return (x - lo) / len; };
    d.description = "affine, zero at d_lo";
  } else {
    d.eval = [lo, len](double x) { return 1.0 - (x - lo) / len; };
    d.description = "affine, zero at d_hi";
  }
  d.values = ScalarField::sample(geometry, FieldKind::CrossSection,
                                 [&](double x, double, double) { return d.eval(x); });
  // Pin the off-Gamma node to exactly zero.
  d.values(geometry.opposite_index(), 0, 0) = 0.0;
  validate_d(d);
  return d;
}

BaseFunction build_d(const CylinderGeometry& geometry, const std::vector<double>& values,
                     std::optional<Interval> d0) {
  geometry.validate();
  BaseFunction d;
  d.values = ScalarField(geometry, FieldKind::CrossSection);
  if (values.size() != d.values.size()) {
    throw WeightError("shape", "user-supplied d has " + std::to_string(values.size()) +
                                   " values, the cross-section grid has " +
                                   std::to_string(d.values.size()));
  }
  std::copy(values.begin(), values.end(), d.values.values().begin());
  d.eval = piecewise_linear(d.values);
  d.description = "user supplied";
  validate_d(d, d0);
  return d;
}

void validate_d(const BaseFunction& d, std::optional<Interval> d0) {
  const ScalarField& v = d.values;
  if (!v.all_finite()) throw WeightError("finite", "d has non-finite values");
  const int n = v.extent(0);
  const double scale = v.max_abs();
  for (int i = 0; i < n; ++i) {
    if (v(i, 0, 0) < 0.0) {
      throw WeightError("nonnegative", "d >= 0 on the closure of D fails at " + node_text(v, i));
    }
  }
  const int opp = v.geometry().opposite_index();
  if (std::abs(v(opp, 0, 0)) > 1e-12 * scale) {
    throw WeightError("vanishes_off_gamma",
                      "d = 0 on the boundary outside Gamma fails at " + node_text(v, opp));
  }
  const ScalarField g = dxp(v);
  for (int i = 0; i < n; ++i) {
    if (!(std::abs(g(i, 0, 0)) > 0.0)) {
      throw WeightError("gradient", "|grad d| > 0 on the closure of D fails at " + node_text(v, i));
    }
  }
  if (d0) {
    for (double x : sample_points(v.grid().xp, d0->lo, d0->hi)) {
      if (!(d.eval(x) > 0.0)) {
        throw WeightError("positive_on_D0",
                          "d > 0 on the closure of D0 fails at x' = " + fmt(x));
      }
    }
  }
}

// --- plan --------------------------------------------------------------------

double WeightPlan::psi(double xp, double xn, double t) const {
  return d.eval(xp) - alpha * xn * xn - beta * t * t;
}

double WeightPlan::phi(double xp, double xn, double t) const {
  return std::exp(lambda * psi(xp, xn, t));
}

ScalarField WeightPlan::phi_field(const CylinderGeometry& g) const {
  if (g.d_lo != geometry.d_lo || g.d_hi != geometry.d_hi) {
    throw GridError("phi_field: geometry has a different cross-section than the plan");
  }
  return ScalarField::sample(g, FieldKind::SpaceTime,
                             [this](double xp, double xn, double t) { return phi(xp, xn, t); });
}

std::array<bool, 3> WeightPlan::derived_inequalities() const {
  const double rhs = d0 - beta * delta0 * delta0;
  return {d1 - beta * geometry.delta * geometry.delta < rhs, 0.0 < rhs,
          d1 - alpha * geometry.ell * geometry.ell < rhs};
}

SigmaValues compute_sigmas(const BaseFunction& d, const CylinderGeometry& g, double lambda,
                           double alpha, double beta, double delta0, Interval d0) {
  const Grid grid = build_grid(g);
  const auto xs = sample_points(grid.xp, g.d_lo, g.d_hi);
  // psi is even in x_n, so |x_n| over the half-axis covers (-ell, ell).
  const auto xn = sample_points(build_grid([&] {
                                  CylinderGeometry h = g;
                                  h.extended = false;
                                  return h;
                                }())
                                    .xn,
                                0.0, g.ell);
  const auto ts = sample_points(grid.t, -g.delta, g.delta);
  auto phi = [&](double x, double z, double t) {
    return std::exp(lambda * (d.eval(x) - alpha * z * z - beta * t * t));
  };

  SigmaValues s;
  s.terminal = -1.0;
  for (double x : xs) {
    for (double z : xn) s.terminal = std::max(s.terminal, phi(x, z, g.delta));
  }
  s.off_gamma = -1.0;
  const double xo = g.opposite_coordinate();
  for (double z : xn) {
    for (double t : ts) s.off_gamma = std::max(s.off_gamma, phi(xo, z, t));
  }
  s.far_face = -1.0;
  for (double x : xs) {
    for (double t : ts) s.far_face = std::max(s.far_face, phi(x, g.ell, t));
  }
  s.sigma1 = std::max({s.terminal, s.off_gamma, s.far_face});

  s.sigma0 = std::numeric_limits<double>::infinity();
  for (double x : sample_points(grid.xp, d0.lo, d0.hi)) {
    for (double t : sample_points(grid.t, -delta0, delta0)) s.sigma0 = std::min(s.sigma0, phi(x, 0.0, t));
  }
  return s;
}

WeightPlan plan_parameters(const BaseFunction& d, const CylinderGeometry& geometry,
                           const PlanRequest& request) {
  geometry.validate();
  if (!(request.lambda > 0.0)) throw WeightError("lambda", "lambda must be positive");
  if (!(request.margin > 1.0)) throw WeightError("margin", "margin must exceed 1");
  check_D0(geometry, request.D0);
  validate_d(d, request.D0);

  WeightPlan p;
  p.geometry = geometry;
  p.geometry.extended = false;
  p.d = d;
  p.lambda = request.lambda;
  p.margin = request.margin;
  p.D0_lo = request.D0.lo;
  p.D0_hi = request.D0.hi;

  const Grid grid = build_grid(p.geometry);
  p.d0 = std::numeric_limits<double>::infinity();
  for (double x : sample_points(grid.xp, request.D0.lo, request.D0.hi)) p.d0 = std::min(p.d0, d.eval(x));
  p.d1 = -std::numeric_limits<double>::infinity();
  double dmin = std::numeric_limits<double>::infinity();
  for (double x : sample_points(grid.xp, geometry.d_lo, geometry.d_hi)) {
    p.d1 = std::max(p.d1, d.eval(x));
    dmin = std::min(dmin, d.eval(x));
  }
  if (!(p.d0 > 0.0)) throw WeightError("d0", "min of d over the closure of D0 must be positive");

  const double delta = geometry.delta;
  p.delta0_sup = std::sqrt(p.d0 / p.d1) * delta;
  if (request.delta0) {
    const double r = *request.delta0;
    if (!(r > 0.0) || !(r < p.delta0_sup)) {
      throw WeightError("delta0", "delta0 = " + fmt(r) +
                                      " violates 0 < delta0 < sqrt(min_D0 d / max_D d) * delta = " +
                                      fmt(p.delta0_sup));
    }
    p.delta0 = r;
  } else {
    p.delta0 = 0.99 * p.delta0_sup;
  }

  p.beta_lo = (p.d1 - p.d0) / (delta * delta - p.delta0 * p.delta0);
  p.beta_hi = p.d0 / (p.delta0 * p.delta0);
  if (!(p.beta_lo < p.beta_hi)) {
    throw WeightError("beta", "empty beta window: (d1 - d0)/(delta^2 - delta0^2) = " +
                                  fmt(p.beta_lo) + " is not below d0/delta0^2 = " + fmt(p.beta_hi));
  }
  p.beta = 0.5 * (p.beta_lo + p.beta_hi);
  if (!(p.beta > 0.0)) throw WeightError("beta", "beta must be positive");
  p.alpha_inf = (p.d1 - p.d0 + p.beta * p.delta0 * p.delta0) / (geometry.ell * geometry.ell);
  p.alpha = p.margin * p.alpha_inf;
  if (!(p.alpha > 0.0)) throw WeightError("alpha", "alpha must be positive");

  const auto ineq = p.derived_inequalities();
  const char* names[3] = {"d1 - beta delta^2 < d0 - beta delta0^2", "0 < d0 - beta delta0^2",
                          "d1 - alpha ell^2 < d0 - beta delta0^2"};
  for (int i = 0; i < 3; ++i) {
    if (!ineq[static_cast<std::size_t>(i)]) {
      throw WeightError("derived", std::string("derived inequality fails: ") + names[i]);
    }
  }

  p.sigma_parts = compute_sigmas(d, p.geometry, p.lambda, p.alpha, p.beta, p.delta0, request.D0);
  p.sigma0 = p.sigma_parts.sigma0;
  p.sigma1 = p.sigma_parts.sigma1;
  p.c0 = std::exp(p.lambda * (dmin - p.beta * delta * delta));
  if (!(p.sigma1 < p.sigma0)) {
    throw WeightError("sigma_gap", "weight gap is not strict on this grid: sigma1 = " +
                                       fmt(p.sigma1) + ", sigma0 = " + fmt(p.sigma0));
  }
  if (request.refine_check) {
    const SigmaValues r = compute_sigmas(d, p.geometry.refined(), p.lambda, p.alpha, p.beta,
                                         p.delta0, request.D0);
    const double m0 = std::abs(r.sigma0 - p.sigma0) / p.sigma0;
    const double m1 = std::abs(r.sigma1 - p.sigma1) / p.sigma1;
    if (m0 > 0.01 || m1 > 0.01) {
      p.warnings.push_back("sigma values move by more than 1% under grid refinement (sigma0: " +
                           fmt(m0) + ", sigma1: " + fmt(m1) + ")");
    }
  }
  return p;
}

// --- region family -----------------------------------------------------------

RegionFamilyResult region_family(const CylinderGeometry& geometry,
                                 const RegionFamilyRequest& request) {
  geometry.validate();
  if (!(request.delta1 > 0.0) || !(request.delta1 < geometry.delta)) {
    throw WeightError("delta1", "delta1 must satisfy 0 < delta1 < delta");
  }
  const double tol = 1e-12 * std::max(1.0, std::abs(geometry.d_hi - geometry.d_lo));
  if (std::abs(request.x0_prime - geometry.gamma_coordinate()) > tol) {
    throw WeightError("x0_prime", "x0' must be the Gamma endpoint of D");
  }
  if (!(request.epsilon0 > 0.0) || !(request.kappa0 > 0.0)) {
    throw WeightError("epsilon0", "epsilon0 and kappa0 must be positive");
  }
  const double h = build_grid(geometry).xp.h;
  const bool hi = geometry.gamma_side == GammaSide::Hi;
  const double target = std::pow(request.delta1 / geometry.delta, 2);

  RegionFamilyResult out;
  for (double eps = request.epsilon0;; eps *= 0.5) {
    const double width = std::min(2.0 * eps, geometry.d_hi - geometry.d_lo);
    const int cells = static_cast<int>(std::lround(width / h));
    if (cells < 4) {
      throw WeightError("epsilon", "no epsilon in the halving sequence satisfies the ratio "
                                   "condition before D_tilde drops below 4 grid cells");
    }
    out.tested_epsilons.push_back(eps);
    CylinderGeometry sub = geometry;
    sub.extended = false;
    sub.nx_prime = cells + 1;
    const double w = cells * h;
    if (hi) {
      sub.d_hi = geometry.d_hi;
      sub.d_lo = geometry.d_hi - w;
    } else {
      sub.d_lo = geometry.d_lo;
      sub.d_hi = geometry.d_lo + w;
    }
    const Interval d1 = hi ? Interval{sub.d_hi - 0.5 * w, sub.d_hi}
                           : Interval{sub.d_lo, sub.d_lo + 0.5 * w};
    const double kappa = request.kappa0 * request.epsilon0 / eps;
    const double start = hi ? sub.d_lo : sub.d_hi;
    BaseFunction d;
    d.eval = [start, w, kappa](double x) {
      return std::tanh(kappa * std::abs(x - start) / w) / std::tanh(kappa);
    };
    d.description = "tanh profile, kappa = " + fmt(kappa);
    d.values = ScalarField::sample(sub, FieldKind::CrossSection,
                                   [&](double x, double, double) { return d.eval(x); });
    validate_d(d, d1);

    const Grid g = build_grid(sub);
    double dmin = std::numeric_limits<double>::infinity();
    for (double x : sample_points(g.xp, d1.lo, d1.hi)) dmin = std::min(dmin, d.eval(x));
    double dmax = 0.0;
    for (double x : sample_points(g.xp, sub.d_lo, sub.d_hi)) dmax = std::max(dmax, d.eval(x));
    const double ratio = dmin / dmax;
    if (target < ratio && ratio < 1.0) {
      out.epsilon = eps;
      out.D_tilde = sub;
      out.D1 = d1;
      out.ratio = ratio;
      PlanRequest pr;
      pr.D0 = d1;
      pr.delta0 = request.delta1;
      pr.lambda = request.lambda;
      pr.margin = request.margin;
      out.plan = plan_parameters(d, sub, pr);
      return out;
    }
  }
}

// --- decay integral and exponent ---------------------------------------------

DecayIntegral decay_integral(const WeightPlan& plan, double s) {
  if (!(s >= 0.0)) throw WeightError("s", "decay integral needs s >= 0");
  CylinderGeometry g = plan.geometry;
  g.extended = false;
  const Grid half = build_grid(g);
  const int n = half.xn.n;
  const int m = 2 * n - 1;
  const double h = half.xn.h;
  std::vector<double> z(static_cast<std::size_t>(m));
  for (int j = 0; j < n; ++j) {
    z[static_cast<std::size_t>(n - 1 + j)] = half.xn.node(j);
    z[static_cast<std::size_t>(n - 1 - j)] = -half.xn.node(j);
  }
  // h * (sum f - (f_first + f_last)/2): integrates 1 to h (m - 1) = 2 ell.
  auto trapz = [&](auto&& f) {
    double acc = 0.0;
    for (int j = 0; j < m; ++j) acc += f(z[static_cast<std::size_t>(j)]);
    acc -= 0.5 * (f(z.front()) + f(z.back()));
    return h * acc;
  };

  DecayIntegral out;
  out.h = h;
  out.value = -1.0;
  for (int i = 0; i < half.xp.n; ++i) {
    const double x = half.xp.node(i);
    for (int k = 0; k < half.t.n; ++k) {
      const double t = half.t.node(k);
      const double centre = plan.phi(x, 0.0, t);
      const double v = trapz([&](double zz) { return std::exp(2.0 * s * (plan.phi(x, zz, t) - centre)); });
      out.value = std::max(out.value, v);
    }
  }
  const double rate = 2.0 * s * plan.c0;
  const double la = plan.lambda * plan.alpha;
  auto envelope = [&](double zz) { return std::exp(-rate * (-std::expm1(-la * zz * zz))); };
  out.envelope_discrete = trapz(envelope);
  out.envelope_reference = 2.0 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                                     envelope, 0.0, g.ell, 15, 1e-14);
  return out;
}

double holder_exponent(double sigma0, double sigma1, double C1) {
  if (!(sigma1 > 0.0) || !(sigma0 > sigma1)) {
    throw WeightError("sigma_gap", "holder exponent needs sigma0 > sigma1 > 0");
  }
  if (!(C1 > 0.0)) throw WeightError("C1", "holder exponent needs C1 > 0");
  const double gap = sigma0 - sigma1;
  return gap / (C1 + gap);
}

}  // namespace clab
