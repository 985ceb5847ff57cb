#pragma once

#include "clab/grid.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace clab {

class ProblemError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// a(x_n) = sum_k c_k x_n^k.
struct AxialProfile {
  std::vector<double> coeffs{0.0, 0.0, 1.0};

  double value(double z) const;
  double d1(double z) const;
  double d2(double z) const;
  double d3(double z) const;
};

/// c + amp * exp(kappa t) * cos(omega x' + phase).
struct SeparableProfile {
  double c = 0.0;
  double amp = 0.0;
  double kappa = 0.0;
  double omega = 0.0;
  double phase = 0.0;

  double value(double x, double t) const;
  double dx(double x, double t) const;
  double dxx(double x, double t) const;
  double dt(double x, double t) const;
  /// min |value| over a dense sample of [x_lo, x_hi] x [-delta, delta]; 0 if the
  /// samples change sign.
  double min_abs(double x_lo, double x_hi, double delta) const;
  double max_abs(double x_lo, double x_hi, double delta) const;
};

/// u = a(x_n) b(x', t); R = (d_t u - Laplace u - p0 u) / f_target.
struct Recipe {
  AxialProfile a;
  SeparableProfile b{1.0};
  SeparableProfile f_target{1.0};
  SeparableProfile p0{};

  std::string text() const;
};

/// Measured data on Gamma x (0, ell) x (-delta, delta), all of kind LateralFace:
/// y = d_{x_n} u and the derivatives of y entering the data functional.
struct BoundaryBundle {
  ScalarField y, y_xp, y_n, y_t, y_nn, y_nt, y_tt;
  double noise_level = 0.0;
  std::uint64_t seed = 0;

  std::vector<std::pair<std::string, ScalarField*>> fields();
  std::vector<std::pair<std::string, const ScalarField*>> fields() const;
  BoundaryBundle operator-(const BoundaryBundle& other) const;
};

struct ProblemInstance {
  CylinderGeometry geometry;
  ScalarField u;   // SpaceTime
  ScalarField y;   // d_{x_n} u, SpaceTime
  ScalarField f;   // CrossSectionTime
  ScalarField R;   // SpaceTime
  ScalarField p0;  // CrossSectionTime
  BoundaryBundle data;
  double D_of_u = 0.0;
  double M = 0.0;
  std::string provenance;
};

/// Sample the bundle from y = d_{x_n} u by finite differences along Gamma.
BoundaryBundle make_bundle(const ScalarField& y);

/// Discrete data functional: sqrt of the trapezoid integral over the Gamma face of
/// (|grad_{x,t} y|^2 + y^2) plus the squared surface H^2 norm of y, the surface
/// derivatives being taken along x_n and t.
double compute_data_functional(const BoundaryBundle& bundle);

/// Discrete a priori bound: H^1 norms of y at t = +-delta, L^2 norms of y and
/// grad_{x,t} y on both lateral sides, surface H^2 norm of y over the whole
/// boundary (lateral sides and both caps), and the L^2 norms of y and
/// grad_{x,t} y on x_n = ell. Every term enters unsquared.
double compute_apriori_bound(const ScalarField& y);

ProblemInstance make_instance(const CylinderGeometry& geometry, const Recipe& recipe);

/// Replace each bundle field F by F + level * max|F| * G, G standard normal per
/// node from a mt19937_64 stream seeded with `seed`.
ProblemInstance add_noise(const ProblemInstance& instance, double level, std::uint64_t seed);

/// u = v_p - v_q, R = v_q, f = p - q, p0 = p.
ProblemInstance coefficient_reduction(const ScalarField& v_p, const ScalarField& v_q,
                                      const ScalarField& p, const ScalarField& q,
                                      double alpha0 = 1e-8);

struct InstanceChecks {
  double residual = 0.0;          // max interior |d_t u - Lu - p0 u - R f| / scale
  double residual_bound = 0.0;    // 10 h^2
  double trace_u = 0.0;           // max |u(x',0,t)| / max|u|
  double trace_y = 0.0;           // max |y(x',0,t)| / max|y|
  double min_abs_R_face = 0.0;    // min |R(x',0,t)|
  bool ok() const {
    return residual <= residual_bound && trace_u <= 1e-12 && trace_y <= 1e-12 && min_abs_R_face > 0.0;
  }
};

InstanceChecks check_instance(const ProblemInstance& instance);

}  // namespace clab
