#include "clab/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace clab {

// --- profiles ----------------------------------------------------------------

double AxialProfile::value(double z) const {
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * z + coeffs[k];
  return acc;
}

double AxialProfile::d1(double z) const {
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 1;) acc = acc * z + static_cast<double>(k) * coeffs[k];
  return acc;
}

double AxialProfile::d2(double z) const {
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 2;) {
    acc = acc * z + static_cast<double>(k * (k - 1)) * coeffs[k];
  }
  return acc;
}

double AxialProfile::d3(double z) const {
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 3;) {
    acc = acc * z + static_cast<double>(k * (k - 1) * (k - 2)) * coeffs[k];
  }
  return acc;
}

double SeparableProfile::value(double x, double t) const {
  return c + amp * std::exp(kappa * t) * std::cos(omega * x + phase);
}

double SeparableProfile::dx(double x, double t) const {
  return -amp * omega * std::exp(kappa * t) * std::sin(omega * x + phase);
}

double SeparableProfile::dxx(double x, double t) const {
  return -amp * omega * omega * std::exp(kappa * t) * std::cos(omega * x + phase);
}

double SeparableProfile::dt(double x, double t) const {
  return amp * kappa * std::exp(kappa * t) * std::cos(omega * x + phase);
}

double SeparableProfile::min_abs(double x_lo, double x_hi, double delta) const {
  constexpr int n = 257;
  double m = std::numeric_limits<double>::infinity();
  bool pos = false, neg = false;
  for (int i = 0; i < n; ++i) {
    const double x = x_lo + (x_hi - x_lo) * i / (n - 1);
    for (int k = 0; k < n; ++k) {
      const double v = value(x, -delta + 2.0 * delta * k / (n - 1));
      m = std::min(m, std::abs(v));
      pos = pos || v > 0.0;
      neg = neg || v < 0.0;
    }
  }
  return pos && neg ? 0.0 : m;
}

double SeparableProfile::max_abs(double x_lo, double x_hi, double delta) const {
  constexpr int n = 257;
  double m = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = x_lo + (x_hi - x_lo) * i / (n - 1);
    for (int k = 0; k < n; ++k) m = std::max(m, std::abs(value(x, -delta + 2.0 * delta * k / (n - 1))));
  }
  return m;
}

namespace {

std::string profile_text(const SeparableProfile& p) {
  std::ostringstream s;
  s.precision(17);
  s << p.c << " + " << p.amp << "*exp(" << p.kappa << "*t)*cos(" << p.omega << "*x' + " << p.phase
    << ")";
  return s.str();
}

}  // namespace

std::string Recipe::text() const {
  std::ostringstream s;
  s.precision(17);
  s << "a(x_n) =";
  for (std::size_t k = 0; k < a.coeffs.size(); ++k) s << (k ? " + " : " ") << a.coeffs[k] << "*x_n^" << k;
  s << "; b = " << profile_text(b) << "; f = " << profile_text(f_target)
    << "; p0 = " << profile_text(p0);
  return s.str();
}

// --- bundle ------------------------------------------------------------------

std::vector<std::pair<std::string, ScalarField*>> BoundaryBundle::fields() {
  return {{"y", &y},       {"y_xp", &y_xp}, {"y_n", &y_n}, {"y_t", &y_t},
          {"y_nn", &y_nn}, {"y_nt", &y_nt}, {"y_tt", &y_tt}};
}

std::vector<std::pair<std::string, const ScalarField*>> BoundaryBundle::fields() const {
  return {{"y", &y},       {"y_xp", &y_xp}, {"y_n", &y_n}, {"y_t", &y_t},
          {"y_nn", &y_nn}, {"y_nt", &y_nt}, {"y_tt", &y_tt}};
}

BoundaryBundle BoundaryBundle::operator-(const BoundaryBundle& other) const {
  BoundaryBundle out = *this;
  auto a = out.fields();
  auto b = other.fields();
  for (std::size_t i = 0; i < a.size(); ++i) *a[i].second -= *b[i].second;
  out.noise_level = 0.0;
  return out;
}

BoundaryBundle make_bundle(const ScalarField& y) {
  if (y.kind() != FieldKind::SpaceTime) throw ProblemError("bundle source must be a space-time field");
  BoundaryBundle b;
  b.y = trace(y, Face::GammaSide);
  b.y_xp = trace(dxp(y), Face::GammaSide);
  b.y_n = dxn(b.y);
  b.y_t = dt(b.y);
  b.y_nn = dxn2(b.y);
  b.y_nt = dt(b.y_n);
  b.y_tt = differentiate(b.y, 2, 2);
  return b;
}

double compute_data_functional(const BoundaryBundle& b) {
  const auto w = trapezoid_weights(b.y, Region::all());
  const auto y = b.y.values();
  const auto yx = b.y_xp.values();
  const auto yn = b.y_n.values();
  const auto yt = b.y_t.values();
  const auto ynn = b.y_nn.values();
  const auto ynt = b.y_nt.values();
  const auto ytt = b.y_tt.values();
  double gradient_part = 0.0;
  double surface_part = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    gradient_part += w[i] * (yx[i] * yx[i] + yn[i] * yn[i] + yt[i] * yt[i] + y[i] * y[i]);
    surface_part += w[i] * (y[i] * y[i] + yn[i] * yn[i] + yt[i] * yt[i] + ynn[i] * ynn[i] +
                            ynt[i] * ynt[i] + ytt[i] * ytt[i]);
  }
  return std::sqrt(gradient_part + surface_part);
}

namespace {

/// Squared L2 norms of y and of grad_{x,t} y over one face.
std::pair<double, double> face_norms_sq(const ScalarField& y, const ScalarField& yxp,
                                        const ScalarField& yxn, const ScalarField& yt, Face face) {
  const ScalarField v = trace(y, face);
  const ScalarField gx = trace(yxp, face);
  const ScalarField gn = trace(yxn, face);
  const ScalarField gt = trace(yt, face);
  const auto w = trapezoid_weights(v, Region::all());
  double l2 = 0.0;
  double grad = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double a = v.values()[i];
    const double bx = gx.values()[i];
    const double bn = gn.values()[i];
    const double bt = gt.values()[i];
    l2 += w[i] * a * a;
    grad += w[i] * (bx * bx + bn * bn + bt * bt);
  }
  return {l2, grad};
}

}  // namespace

double compute_apriori_bound(const ScalarField& y) {
  if (y.kind() != FieldKind::SpaceTime) throw ProblemError("a priori bound needs a space-time field");
  const Region all = Region::all();
  const ScalarField yxp = dxp(y);
  const ScalarField yxn = dxn(y);
  const ScalarField yt = dt(y);

  const double terminal = discrete_norm(trace(y, Face::TPlusDelta), all, NormKind::H1Surface) +
                          discrete_norm(trace(y, Face::TMinusDelta), all, NormKind::H1Surface);

  const auto g = face_norms_sq(y, yxp, yxn, yt, Face::GammaSide);
  const auto o = face_norms_sq(y, yxp, yxn, yt, Face::OppositeSide);
  const double lateral = std::sqrt(g.first + o.first) + std::sqrt(g.second + o.second);

  double h2 = 0.0;
  for (Face f : {Face::GammaSide, Face::OppositeSide, Face::XnZero, Face::XnEll}) {
    const double n = discrete_norm(trace(y, f), all, NormKind::H2Surface);
    h2 += n * n;
  }
  const double surface = std::sqrt(h2);

  const auto top = face_norms_sq(y, yxp, yxn, yt, Face::XnEll);
  const double far = std::sqrt(top.first) + std::sqrt(top.second);

  return terminal + lateral + surface + far;
}

// --- instances ---------------------------------------------------------------

ProblemInstance make_instance(const CylinderGeometry& geometry, const Recipe& recipe) {
  geometry.validate();
  if (geometry.extended) throw ProblemError("instances live on the half cylinder (extended = false)");
  const auto& c = recipe.a.coeffs;
  auto coeff = [&](std::size_t k) { return k < c.size() ? c[k] : 0.0; };
  if (coeff(0) != 0.0 || coeff(1) != 0.0) {
    throw ProblemError("axial profile must satisfy a(0) = a'(0) = 0");
  }
  if (coeff(2) == 0.0) {
    throw ProblemError("axial profile must satisfy a''(0) != 0; otherwise R vanishes on x_n = 0");
  }
  const double xl = geometry.d_lo;
  const double xh = geometry.d_hi;
  const double dl = geometry.delta;
  if (!(recipe.b.min_abs(xl, xh, dl) > 1e-12 * recipe.b.max_abs(xl, xh, dl))) {
    throw ProblemError("profile b vanishes on the closure of D x (-delta, delta)");
  }
  if (!(recipe.f_target.min_abs(xl, xh, dl) > 1e-12 * recipe.f_target.max_abs(xl, xh, dl))) {
    throw ProblemError("target source factor f vanishes on the closure of D x (-delta, delta)");
  }

  const Recipe& r = recipe;
  ProblemInstance p;
  p.geometry = geometry;
  p.u = ScalarField::sample(geometry, FieldKind::SpaceTime, [&](double x, double z, double t) {
    return r.a.value(z) * r.b.value(x, t);
  });
  p.y = ScalarField::sample(geometry, FieldKind::SpaceTime, [&](double x, double z, double t) {
    return r.a.d1(z) * r.b.value(x, t);
  });
  p.f = ScalarField::sample(geometry, FieldKind::CrossSectionTime,
                            [&](double x, double, double t) { return r.f_target.value(x, t); });
  p.p0 = ScalarField::sample(geometry, FieldKind::CrossSectionTime,
                             [&](double x, double, double t) { return r.p0.value(x, t); });
  p.R = ScalarField::sample(geometry, FieldKind::SpaceTime, [&](double x, double z, double t) {
    const double a = r.a.value(z);
    const double bv = r.b.value(x, t);
    const double rhs = a * r.b.dt(x, t) - a * r.b.dxx(x, t) - r.a.d2(z) * bv - r.p0.value(x, t) * a * bv;
    return rhs / r.f_target.value(x, t);
  });
  p.data = make_bundle(p.y);
  p.D_of_u = compute_data_functional(p.data);
  p.M = compute_apriori_bound(p.y);
  p.provenance = "recipe: " + recipe.text();
  return p;
}

ProblemInstance add_noise(const ProblemInstance& instance, double level, std::uint64_t seed) {
  if (!(level >= 0.0)) throw ProblemError("noise level must be nonnegative");
  ProblemInstance out = instance;
  out.data.noise_level = level;
  out.data.seed = seed;
  if (level > 0.0) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& [name, field] : out.data.fields()) {
      const double scale = level * field->max_abs();
      for (double& v : field->values()) v += scale * normal(gen);
    }
  }
  out.D_of_u = compute_data_functional(out.data);
  std::ostringstream s;
  s.precision(17);
  s << instance.provenance << "; noise level " << level << ", seed " << seed;
  out.provenance = s.str();
  return out;
}

ProblemInstance coefficient_reduction(const ScalarField& v_p, const ScalarField& v_q,
                                      const ScalarField& p, const ScalarField& q, double alpha0) {
  if (v_p.kind() != FieldKind::SpaceTime || !v_p.same_layout(v_q)) {
    throw ProblemError("v(p) and v(q) must be space-time fields on the same grid");
  }
  if (p.kind() != FieldKind::CrossSectionTime || !p.same_layout(q) ||
      !(p.geometry() == v_p.geometry())) {
    throw ProblemError("p and q must be cross-section-time fields on the grid of v");
  }
  if (v_p.geometry().extended) throw ProblemError("instances live on the half cylinder (extended = false)");

  auto mismatch = [](const ScalarField& a, const ScalarField& b) {
    const ScalarField ta = trace(a, Face::XnZero);
    const ScalarField tb = trace(b, Face::XnZero);
    const double scale = std::max({a.max_abs(), b.max_abs(), std::numeric_limits<double>::min()});
    return (ta - tb).max_abs() / scale;
  };
  const double m0 = mismatch(v_p, v_q);
  const double m1 = mismatch(dxn(v_p), dxn(v_q));
  if (m0 > 1e-10 || m1 > 1e-10) {
    std::ostringstream s;
    s << "Cauchy data of v(p) and v(q) at x_n = 0 differ (value: " << m0 << ", normal derivative: "
      << m1 << ", relative)";
    throw ProblemError(s.str());
  }
  const ScalarField face = trace(v_q, Face::XnZero);
  double min_face = std::numeric_limits<double>::infinity();
  for (double v : face.values()) min_face = std::min(min_face, std::abs(v));
  if (!(min_face >= alpha0)) {
    std::ostringstream s;
    s << "|v(q)(x',0,t)| >= alpha0 = " << alpha0 << " fails: min |v(q)| on x_n = 0 is " << min_face;
    throw ProblemError(s.str());
  }

  ProblemInstance out;
  out.geometry = v_p.geometry();
  out.u = v_p - v_q;
  out.y = dxn(out.u);
  out.R = v_q;
  out.f = p - q;
  out.p0 = p;
  out.data = make_bundle(out.y);
  out.D_of_u = compute_data_functional(out.data);
  out.M = compute_apriori_bound(out.y);
  out.provenance = "coefficient reduction u = v(p) - v(q)";
  return out;
}

InstanceChecks check_instance(const ProblemInstance& p) {
  InstanceChecks c;
  const ScalarField ut = dt(p.u);
  const ScalarField lap = laplacian(p.u);
  const ScalarField pu = broadcast(p.p0, FieldKind::SpaceTime).hadamard(p.u);
  const ScalarField rf = p.R.hadamard(broadcast(p.f, FieldKind::SpaceTime));
  const auto e = p.u.extents();
  double scale = 0.0;
  double worst = 0.0;
  for (int i = 1; i < e[0] - 1; ++i) {
    for (int j = 1; j < e[1] - 1; ++j) {
      for (int k = 1; k < e[2] - 1; ++k) {
        scale = std::max({scale, std::abs(ut(i, j, k)), std::abs(lap(i, j, k)), std::abs(pu(i, j, k)),
                          std::abs(rf(i, j, k))});
        worst = std::max(worst, std::abs(ut(i, j, k) - lap(i, j, k) - pu(i, j, k) - rf(i, j, k)));
      }
    }
  }
  c.residual = scale > 0.0 ? worst / scale : worst;
  const Grid& g = p.u.grid();
  const double h = std::max({g.xp.h, g.xn.h, g.t.h});
  c.residual_bound = 10.0 * h * h;
  const double umax = p.u.max_abs();
  const double ymax = p.y.max_abs();
  c.trace_u = umax > 0.0 ? trace(p.u, Face::XnZero).max_abs() / umax : 0.0;
  c.trace_y = ymax > 0.0 ? trace(p.y, Face::XnZero).max_abs() / ymax : 0.0;
  const ScalarField rf0 = trace(p.R, Face::XnZero);
  c.min_abs_R_face = std::numeric_limits<double>::infinity();
  for (double v : rf0.values()) c.min_abs_R_face = std::min(c.min_abs_R_face, std::abs(v));
  return c;
}

}  // namespace clab
