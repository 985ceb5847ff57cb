#include "clab/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace clab {

namespace {

constexpr int kMinNodes = 4;

void fnv_mix(std::uint64_t& h, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) {
    h ^= (v >> (8 * b)) & 0xffu;
    h *= 0x100000001b3ULL;
  }
}

FieldKind kind_from_axes(const std::array<bool, 3>& a) {
  if (a[0] && a[1] && a[2]) return FieldKind::SpaceTime;
  if (a[0] && a[1]) return FieldKind::SpaceOnly;
  if (a[0] && a[2]) return FieldKind::CrossSectionTime;
  if (a[1] && a[2]) return FieldKind::LateralFace;
  if (a[0]) return FieldKind::CrossSection;
  if (a[1]) return FieldKind::AxialLine;
  throw GridError("no field kind depends on time only");
}

const Axis& grid_axis(const Grid& g, int axis) {
  switch (axis) {
    case 0: return g.xp;
    case 1: return g.xn;
    default: return g.t;
  }
}

}  // namespace

// --- geometry ----------------------------------------------------------------

void CylinderGeometry::validate() const {
  for (double v : {d_lo, d_hi, ell, delta}) {
    if (!std::isfinite(v)) throw GridError("geometry extents must be finite");
  }
  if (!(d_lo < d_hi)) throw GridError("cross-section requires d_lo < d_hi");
  if (!(ell > 0.0)) throw GridError("axial length ell must be positive");
  if (!(delta > 0.0)) throw GridError("time half-width delta must be positive");
  if (nx_prime < kMinNodes || nx_n < kMinNodes || nt < kMinNodes) {
    throw GridError("every grid count must be at least 4");
  }
}

CylinderGeometry CylinderGeometry::refined() const {
  CylinderGeometry g = *this;
  g.nx_prime = 2 * nx_prime - 1;
  g.nx_n = 2 * nx_n - 1;
  g.nt = 2 * nt - 1;
  return g;
}

std::uint64_t CylinderGeometry::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : {d_lo, d_hi, ell, delta}) fnv_mix(h, std::bit_cast<std::uint64_t>(v));
  fnv_mix(h, gamma_side == GammaSide::Hi ? 1u : 0u);
  for (int n : {nx_prime, nx_n, nt}) fnv_mix(h, static_cast<std::uint64_t>(n));
  fnv_mix(h, extended ? 1u : 0u);
  return h;
}

Axis Axis::make(double lo, double hi, int n) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw GridError("axis extent must be finite and non-degenerate");
  }
  if (n < 2) throw GridError("axis needs at least two nodes");
  return Axis{lo, hi, n, (hi - lo) / (n - 1)};
}

double Axis::node(int i) const {
  if (i == 0) return lo;
  if (i == n - 1) return hi;
  // Symmetric axes get exactly mirrored coordinates.
  if (lo == -hi) return hi * static_cast<double>(2 * i - (n - 1)) / static_cast<double>(n - 1);
  return lo + i * h;
}

std::vector<double> Axis::nodes() const {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = node(i);
  return x;
}

Grid build_grid(const CylinderGeometry& geometry) {
  geometry.validate();
  return Grid{geometry, Axis::make(geometry.d_lo, geometry.d_hi, geometry.nx_prime),
              Axis::make(geometry.axial_lo(), geometry.ell, geometry.nx_n),
              Axis::make(-geometry.delta, geometry.delta, geometry.nt)};
}

// --- fields ------------------------------------------------------------------

std::array<bool, 3> axes_present(FieldKind kind) {
  switch (kind) {
    case FieldKind::SpaceTime: return {true, true, true};
    case FieldKind::SpaceOnly: return {true, true, false};
    case FieldKind::CrossSectionTime: return {true, false, true};
    case FieldKind::LateralFace: return {false, true, true};
    case FieldKind::CrossSection: return {true, false, false};
    case FieldKind::AxialLine: return {false, true, false};
  }
  return {false, false, false};
}

std::string to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::SpaceTime: return "space_time";
    case FieldKind::SpaceOnly: return "space_only";
    case FieldKind::CrossSectionTime: return "cross_section_time";
    case FieldKind::LateralFace: return "lateral_face";
    case FieldKind::CrossSection: return "cross_section";
    case FieldKind::AxialLine: return "axial_line";
  }
  return "?";
}

ScalarField::ScalarField(const CylinderGeometry& geometry, FieldKind kind)
    : geometry_(geometry), grid_(build_grid(geometry)), kind_(kind) {
  const auto present = axes_present(kind);
  for (int a = 0; a < 3; ++a) {
    extents_[static_cast<std::size_t>(a)] =
        present[static_cast<std::size_t>(a)] ? grid_axis(grid_, a).n : 1;
  }
  values_.assign(static_cast<std::size_t>(extents_[0]) * static_cast<std::size_t>(extents_[1]) *
                     static_cast<std::size_t>(extents_[2]),
                 0.0);
}

double ScalarField::coordinate(int axis, int i) const {
  if (!axes_present(kind_)[static_cast<std::size_t>(axis)]) return 0.0;
  return grid_axis(grid_, axis).node(i);
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

bool ScalarField::same_layout(const ScalarField& other) const {
  return kind_ == other.kind_ && geometry_ == other.geometry_;
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  if (!same_layout(other)) throw GridError("field layouts differ");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  if (!same_layout(other)) throw GridError("field layouts differ");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

ScalarField ScalarField::hadamard(const ScalarField& other) const {
  if (!same_layout(other)) throw GridError("field layouts differ");
  ScalarField out = *this;
  for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] *= other.values_[i];
  return out;
}

ScalarField broadcast(const ScalarField& f, FieldKind kind) {
  const auto from = axes_present(f.kind());
  const auto to = axes_present(kind);
  for (int a = 0; a < 3; ++a) {
    if (from[static_cast<std::size_t>(a)] && !to[static_cast<std::size_t>(a)]) {
      throw GridError("broadcast target lacks an axis of the source field");
    }
  }
  ScalarField out(f.geometry(), kind);
  const auto e = out.extents();
  for (int i = 0; i < e[0]; ++i) {
    for (int j = 0; j < e[1]; ++j) {
      for (int k = 0; k < e[2]; ++k) {
        out(i, j, k) = f(from[0] ? i : 0, from[1] ? j : 0, from[2] ? k : 0);
      }
    }
  }
  return out;
}

// --- extensions --------------------------------------------------------------

int axial_zero_index(const CylinderGeometry& geometry) {
  if (!geometry.extended) return 0;
  if (geometry.nx_n % 2 == 0) {
    throw GridError("extended axial grid with an even node count has no node at x_n = 0");
  }
  return (geometry.nx_n - 1) / 2;
}

namespace {

ScalarField mirror(const ScalarField& u, double sign) {
  if (u.geometry().extended) throw GridError("field is already on the extended cylinder");
  if (!axes_present(u.kind())[1]) throw GridError("field does not depend on x_n");
  CylinderGeometry g = u.geometry();
  g.extended = true;
  g.nx_n = 2 * u.geometry().nx_n - 1;
  ScalarField out(g, u.kind());
  const int n = u.geometry().nx_n;
  const int c = n - 1;
  const auto e = u.extents();
  for (int i = 0; i < e[0]; ++i) {
    for (int m = 0; m < n; ++m) {
      for (int k = 0; k < e[2]; ++k) {
        const double v = u(i, m, k);
        out(i, c + m, k) = v;
        out(i, c - m, k) = m == 0 ? v : sign * v;
      }
    }
  }
  return out;
}

}  // namespace

ScalarField even_extend(const ScalarField& u) { return mirror(u, 1.0); }

ScalarField odd_extend(const ScalarField& y) {
  const double tol = 1e-12 * y.max_abs();
  const auto e = y.extents();
  if (!y.geometry().extended && axes_present(y.kind())[1]) {
    for (int i = 0; i < e[0]; ++i) {
      for (int k = 0; k < e[2]; ++k) {
        if (std::abs(y(i, 0, k)) > tol) {
          std::ostringstream msg;
          msg << "odd extension needs a vanishing trace at x_n = 0; node (" << i << ", 0, " << k
              << ") holds " << y(i, 0, k);
          throw GridError(msg.str());
        }
      }
    }
  }
  ScalarField out = mirror(y, -1.0);
  const int c = y.geometry().nx_n - 1;
  for (int i = 0; i < e[0]; ++i) {
    for (int k = 0; k < e[2]; ++k) out(i, c, k) = 0.0;
  }
  return out;
}

ScalarField restrict_to_half(const ScalarField& u) {
  if (!u.geometry().extended) throw GridError("field is not on the extended cylinder");
  const int c = axial_zero_index(u.geometry());
  CylinderGeometry g = u.geometry();
  g.extended = false;
  g.nx_n = c + 1;
  ScalarField out(g, u.kind());
  const auto e = out.extents();
  const bool axial = axes_present(u.kind())[1];
  for (int i = 0; i < e[0]; ++i) {
    for (int j = 0; j < e[1]; ++j) {
      for (int k = 0; k < e[2]; ++k) out(i, j, k) = u(i, axial ? c + j : 0, k);
    }
  }
  return out;
}

// --- finite differences ------------------------------------------------------

StencilRow first_derivative_row(int n, double h, int i) {
  const double s = 1.0 / (2.0 * h);
  if (i == 0) return {0, 3, {-3.0 * s, 4.0 * s, -1.0 * s, 0.0}};
  if (i == n - 1) return {n - 3, 3, {1.0 * s, -4.0 * s, 3.0 * s, 0.0}};
  return {i - 1, 3, {-s, 0.0, s, 0.0}};
}

StencilRow second_derivative_row(int n, double h, int i) {
  const double s = 1.0 / (h * h);
  if (i == 0) return {0, 4, {2.0 * s, -5.0 * s, 4.0 * s, -1.0 * s}};
  if (i == n - 1) return {n - 4, 4, {-1.0 * s, 4.0 * s, -5.0 * s, 2.0 * s}};
  return {i - 1, 3, {s, -2.0 * s, s, 0.0}};
}

ScalarField differentiate(const ScalarField& u, int axis, int order) {
  if (axis < 0 || axis > 2) throw GridError("axis must be 0, 1 or 2");
  if (!axes_present(u.kind())[static_cast<std::size_t>(axis)]) {
    throw GridError("field of kind " + to_string(u.kind()) + " has no axis " +
                    std::to_string(axis));
  }
  const int n = u.extent(axis);
  if (n < kMinNodes) throw GridError("grid too coarse for finite differences (< 4 nodes)");
  const double h = grid_axis(u.grid(), axis).h;
  std::vector<StencilRow> rows(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    rows[static_cast<std::size_t>(i)] =
        order == 1 ? first_derivative_row(n, h, i) : second_derivative_row(n, h, i);
  }
  ScalarField out(u.geometry(), u.kind());
  const auto e = u.extents();
  std::array<int, 3> idx{};
  for (idx[0] = 0; idx[0] < e[0]; ++idx[0]) {
    for (idx[1] = 0; idx[1] < e[1]; ++idx[1]) {
      for (idx[2] = 0; idx[2] < e[2]; ++idx[2]) {
        const StencilRow& r = rows[static_cast<std::size_t>(idx[static_cast<std::size_t>(axis)])];
        std::array<int, 3> src = idx;
        double acc = 0.0;
        for (int m = 0; m < r.count; ++m) {
          src[static_cast<std::size_t>(axis)] = r.first + m;
          acc += r.coef[static_cast<std::size_t>(m)] * u(src[0], src[1], src[2]);
        }
        out(idx[0], idx[1], idx[2]) = acc;
      }
    }
  }
  return out;
}

ScalarField laplacian(const ScalarField& u) { return dxp2(u) + dxn2(u); }

std::vector<ScalarField> grad_xt(const ScalarField& u) {
  std::vector<ScalarField> g;
  const auto present = axes_present(u.kind());
  for (int a = 0; a < 3; ++a) {
    if (present[static_cast<std::size_t>(a)]) g.push_back(differentiate(u, a, 1));
  }
  return g;
}

// --- traces ------------------------------------------------------------------

std::string to_string(Face face) {
  switch (face) {
    case Face::XnZero: return "xn_zero";
    case Face::XnEll: return "xn_ell";
    case Face::XnNegEll: return "xn_neg_ell";
    case Face::GammaSide: return "gamma_side";
    case Face::OppositeSide: return "opposite_side";
    case Face::TPlusDelta: return "t_plus_delta";
    case Face::TMinusDelta: return "t_minus_delta";
  }
  return "?";
}

ScalarField trace(const ScalarField& u, Face face) {
  const CylinderGeometry& g = u.geometry();
  int axis = 0;
  int index = 0;
  switch (face) {
    case Face::XnZero: axis = 1; index = axial_zero_index(g); break;
    case Face::XnEll: axis = 1; index = g.nx_n - 1; break;
    case Face::XnNegEll:
      if (!g.extended) throw GridError("face x_n = -ell exists only on the extended cylinder");
      axis = 1;
      index = 0;
      break;
    case Face::GammaSide: axis = 0; index = g.gamma_index(); break;
    case Face::OppositeSide: axis = 0; index = g.opposite_index(); break;
    case Face::TPlusDelta: axis = 2; index = g.nt - 1; break;
    case Face::TMinusDelta: axis = 2; index = 0; break;
  }
  auto present = axes_present(u.kind());
  if (!present[static_cast<std::size_t>(axis)]) {
    throw GridError("face " + to_string(face) + " is not present for a field of kind " +
                    to_string(u.kind()));
  }
  present[static_cast<std::size_t>(axis)] = false;
  ScalarField out(g, kind_from_axes(present));
  const auto e = out.extents();
  for (int i = 0; i < e[0]; ++i) {
    for (int j = 0; j < e[1]; ++j) {
      for (int k = 0; k < e[2]; ++k) {
        std::array<int, 3> src{i, j, k};
        src[static_cast<std::size_t>(axis)] = index;
        out(i, j, k) = u(src[0], src[1], src[2]);
      }
    }
  }
  return out;
}

// --- quadrature --------------------------------------------------------------

std::vector<double> trapezoid_weights_1d(const Axis& axis, int i0, int i1) {
  std::vector<double> w(static_cast<std::size_t>(axis.n), 0.0);
  for (int i = i0; i <= i1; ++i) w[static_cast<std::size_t>(i)] = axis.h;
  w[static_cast<std::size_t>(i0)] = 0.5 * axis.h;
  w[static_cast<std::size_t>(i1)] = 0.5 * axis.h;
  return w;
}

std::vector<double> trapezoid_weights(const ScalarField& f, const Region& region) {
  const auto present = axes_present(f.kind());
  std::array<std::vector<double>, 3> w1;
  for (int a = 0; a < 3; ++a) {
    const auto sa = static_cast<std::size_t>(a);
    if (!present[sa]) {
      w1[sa] = {1.0};
      continue;
    }
    const Axis& ax = grid_axis(f.grid(), a);
    const double tol = 1e-12 * std::max({1.0, std::abs(ax.lo), std::abs(ax.hi)});
    int i0 = ax.n;
    int i1 = -1;
    for (int i = 0; i < ax.n; ++i) {
      const double x = ax.node(i);
      if (x >= region.lo[sa] - tol && x <= region.hi[sa] + tol) {
        i0 = std::min(i0, i);
        i1 = std::max(i1, i);
      }
    }
    if (i1 - i0 < 1) throw GridError("empty region: fewer than two nodes along axis " + std::to_string(a));
    w1[sa] = trapezoid_weights_1d(ax, i0, i1);
  }
  std::vector<double> w(f.size());
  const auto e = f.extents();
  for (int i = 0; i < e[0]; ++i) {
    for (int j = 0; j < e[1]; ++j) {
      for (int k = 0; k < e[2]; ++k) {
        w[f.index(i, j, k)] = w1[0][static_cast<std::size_t>(i)] *
                              w1[1][static_cast<std::size_t>(j)] *
                              w1[2][static_cast<std::size_t>(k)];
      }
    }
  }
  return w;
}

double integrate(const ScalarField& f, const Region& region) {
  const auto w = trapezoid_weights(f, region);
  const auto v = f.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * v[i];
  return acc;
}

double discrete_norm(const ScalarField& u, const Region& region, NormKind kind) {
  const auto w = trapezoid_weights(u, region);
  std::vector<double> acc_terms(u.size(), 0.0);
  auto add_sq = [&](const ScalarField& f) {
    const auto v = f.values();
    for (std::size_t i = 0; i < v.size(); ++i) acc_terms[i] += v[i] * v[i];
  };
  add_sq(u);
  if (kind != NormKind::L2) {
    const auto present = axes_present(u.kind());
    std::vector<int> axes;
    for (int a = 0; a < 3; ++a) {
      if (present[static_cast<std::size_t>(a)]) axes.push_back(a);
    }
    std::vector<ScalarField> first;
    for (int a : axes) first.push_back(differentiate(u, a, 1));
    for (const auto& f : first) add_sq(f);
    if (kind == NormKind::H2Surface) {
      for (std::size_t p = 0; p < axes.size(); ++p) {
        add_sq(differentiate(u, axes[p], 2));
        for (std::size_t q = p + 1; q < axes.size(); ++q) add_sq(differentiate(first[p], axes[q], 1));
      }
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) total += w[i] * acc_terms[i];
  return std::sqrt(total);
}

}  // namespace clab
