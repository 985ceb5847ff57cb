#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace clab {

/// Raised when a geometry, field or region violates its contract.
class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class GammaSide { Lo, Hi };

/// Cross-section D = (d_lo, d_hi), axial range (0, ell) or (-ell, ell) when
/// `extended`, time window (-delta, delta). Gamma is one endpoint of D.
struct CylinderGeometry {
  double d_lo = 0.0;
  double d_hi = 1.0;
  double ell = 1.0;
  double delta = 1.0;
  GammaSide gamma_side = GammaSide::Hi;
  int nx_prime = 17;
  int nx_n = 17;
  int nt = 17;
  bool extended = false;

  void validate() const;

  double axial_lo() const { return extended ? -ell : 0.0; }
  double gamma_coordinate() const { return gamma_side == GammaSide::Hi ? d_hi : d_lo; }
  double opposite_coordinate() const { return gamma_side == GammaSide::Hi ? d_lo : d_hi; }
  /// Node index of Gamma / the opposite endpoint on the x' axis.
  int gamma_index() const { return gamma_side == GammaSide::Hi ? nx_prime - 1 : 0; }
  int opposite_index() const { return gamma_side == GammaSide::Hi ? 0 : nx_prime - 1; }

  /// Same extents, every grid count refined to 2n-1 (spacing halved).
  CylinderGeometry refined() const;
  /// FNV-1a hash of all fields, used to reference grids in reports.
  std::uint64_t hash() const;

  bool operator==(const CylinderGeometry&) const = default;
};

/// Uniform endpoint-inclusive axis.
struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  int n = 2;
  double h = 1.0;

  static Axis make(double lo, double hi, int n);
  double node(int i) const;
  std::vector<double> nodes() const;
};

/// Node coordinates and spacings of a geometry.
struct Grid {
  CylinderGeometry geometry;
  Axis xp;
  Axis xn;
  Axis t;
};

Grid build_grid(const CylinderGeometry& geometry);

/// Which of the (x', x_n, t) axes a field depends on.
enum class FieldKind {
  SpaceTime,         // (x', x_n, t)
  SpaceOnly,         // (x', x_n)
  CrossSectionTime,  // (x', t)
  LateralFace,       // (x_n, t): traces on x' = const
  CrossSection,      // (x')
  AxialLine,         // (x_n)
};

std::array<bool, 3> axes_present(FieldKind kind);
std::string to_string(FieldKind kind);

/// Real values on the nodes of a geometry's grid. Storage is a dense
/// (x', x_n, t) array with absent axes collapsed to extent 1.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(const CylinderGeometry& geometry, FieldKind kind);

  template <typename Fn>
  static ScalarField sample(const CylinderGeometry& geometry, FieldKind kind, Fn&& fn);

  const CylinderGeometry& geometry() const { return geometry_; }
  FieldKind kind() const { return kind_; }
  const Grid& grid() const { return grid_; }
  std::array<int, 3> extents() const { return extents_; }
  int extent(int axis) const { return extents_[static_cast<std::size_t>(axis)]; }
  std::size_t size() const { return values_.size(); }

  std::size_t index(int ip, int in, int k) const {
    return (static_cast<std::size_t>(ip) * static_cast<std::size_t>(extents_[1]) +
            static_cast<std::size_t>(in)) *
               static_cast<std::size_t>(extents_[2]) +
           static_cast<std::size_t>(k);
  }
  double& operator()(int ip, int in, int k) { return values_[index(ip, in, k)]; }
  double operator()(int ip, int in, int k) const { return values_[index(ip, in, k)]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  /// Coordinate of node i along axis a (0: x', 1: x_n, 2: t).
  double coordinate(int axis, int i) const;

  double max_abs() const;
  bool all_finite() const;
  bool same_layout(const ScalarField& other) const;

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double c);
  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double c, ScalarField a) { return a *= c; }
  friend ScalarField operator*(ScalarField a, double c) { return a *= c; }
  /// Pointwise product; layouts must match.
  ScalarField hadamard(const ScalarField& other) const;

 private:
  CylinderGeometry geometry_;
  Grid grid_;
  FieldKind kind_ = FieldKind::SpaceTime;
  std::array<int, 3> extents_{1, 1, 1};
  std::vector<double> values_;
};

template <typename Fn>
ScalarField ScalarField::sample(const CylinderGeometry& geometry, FieldKind kind, Fn&& fn) {
  ScalarField f(geometry, kind);
  for (int i = 0; i < f.extents_[0]; ++i) {
    const double xp = f.coordinate(0, i);
    for (int j = 0; j < f.extents_[1]; ++j) {
      const double xn = f.coordinate(1, j);
      for (int k = 0; k < f.extents_[2]; ++k) {
        f(i, j, k) = fn(xp, xn, f.coordinate(2, k));
      }
    }
  }
  return f;
}

/// Broadcast a lower-dimensional field along its missing axes onto `kind`.
ScalarField broadcast(const ScalarField& f, FieldKind kind);

// --- extensions across x_n = 0 ---------------------------------------------

/// Mirror a field on the half cylinder to (-ell, ell): value(-x_n) = value(x_n).
ScalarField even_extend(const ScalarField& u);
/// Antisymmetric mirror; the input must vanish on x_n = 0 (relative 1e-12).
ScalarField odd_extend(const ScalarField& y);
/// Restriction of an extended field to x_n >= 0.
ScalarField restrict_to_half(const ScalarField& u);
/// Index of the x_n = 0 node; throws if the axial grid has none.
int axial_zero_index(const CylinderGeometry& geometry);

// --- finite differences ------------------------------------------------------

/// One stencil row: coefficients applied at consecutive nodes starting at `first`.
struct StencilRow {
  int first = 0;
  int count = 0;
  std::array<double, 4> coef{};
};

/// Second-order first derivative: central inside, 3-point one-sided at the ends.
StencilRow first_derivative_row(int n, double h, int i);
/// Second-order second derivative: central inside, 4-point one-sided at the ends.
StencilRow second_derivative_row(int n, double h, int i);

/// d/d(axis) or d^2/d(axis)^2 along axis 0 (x'), 1 (x_n) or 2 (t).
ScalarField differentiate(const ScalarField& u, int axis, int order = 1);

inline ScalarField dxp(const ScalarField& u) { return differentiate(u, 0, 1); }
inline ScalarField dxp2(const ScalarField& u) { return differentiate(u, 0, 2); }
inline ScalarField dxn(const ScalarField& u) { return differentiate(u, 1, 1); }
inline ScalarField dxn2(const ScalarField& u) { return differentiate(u, 1, 2); }
inline ScalarField dt(const ScalarField& u) { return differentiate(u, 2, 1); }
ScalarField laplacian(const ScalarField& u);
/// Derivatives along each axis the field depends on, in (x', x_n, t) order.
std::vector<ScalarField> grad_xt(const ScalarField& u);

// --- traces ------------------------------------------------------------------

enum class Face { XnZero, XnEll, XnNegEll, GammaSide, OppositeSide, TPlusDelta, TMinusDelta };

std::string to_string(Face face);

/// Exact grid slice of `u` on a face; the sliced axis is dropped from the kind.
ScalarField trace(const ScalarField& u, Face face);

// --- quadrature --------------------------------------------------------------

/// Closed coordinate box; nodes within 1e-12 of a bound count as inside.
struct Region {
  std::array<double, 3> lo{-1e300, -1e300, -1e300};
  std::array<double, 3> hi{1e300, 1e300, 1e300};

  static Region all() { return {}; }
  static Region box(double xp_lo, double xp_hi, double xn_lo, double xn_hi, double t_lo,
                    double t_hi) {
    return {{xp_lo, xn_lo, t_lo}, {xp_hi, xn_hi, t_hi}};
  }
};

enum class NormKind { L2, H1Surface, H2Surface };

/// Composite trapezoidal weights of the nodes of `f` lying in `region`
/// (zero outside). Throws if the region holds no node on some present axis.
std::vector<double> trapezoid_weights(const ScalarField& f, const Region& region);
/// 1-D trapezoid weights for nodes i0..i1 of an axis.
std::vector<double> trapezoid_weights_1d(const Axis& axis, int i0, int i1);

/// Trapezoidal integral of `f` over `region`.
double integrate(const ScalarField& f, const Region& region = Region::all());

/// Discrete L2 / H1 / H2 norm over the axes the field depends on.
double discrete_norm(const ScalarField& u, const Region& region, NormKind kind);

}  // namespace clab
