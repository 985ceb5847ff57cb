#pragma once

#include "clab/grid.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace clab {

/// Raised when a weight base function or a parameter choice is inadmissible.
/// `clause` is a short machine-readable tag of the violated condition.
class WeightError : public std::invalid_argument {
 public:
  WeightError(std::string clause, const std::string& what)
      : std::invalid_argument(what), clause_(std::move(clause)) {}
  const std::string& clause() const { return clause_; }

 private:
  std::string clause_;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  bool contains(double x, double tol = 1e-12) const { return x >= lo - tol && x <= hi + tol; }
};

/// The base function d(x') of the weight. `eval` is exact where the function
/// is known in closed form and piecewise linear through `values` otherwise.
struct BaseFunction {
  ScalarField values;  // CrossSection kind
  std::function<double(double)> eval;
  std::string description;
};

enum class DMode { ExplicitInterval, UserSupplied };

/// Affine d vanishing on the non-Gamma endpoint and equal to 1 on Gamma.
BaseFunction build_d(const CylinderGeometry& geometry);
/// Nodal d supplied by the caller, validated by `validate_d`.
BaseFunction build_d(const CylinderGeometry& geometry, const std::vector<double>& values,
                     std::optional<Interval> d0 = std::nullopt);

/// Discrete check of: d >= 0 on the closure of D; d = 0 at the non-Gamma
/// endpoint (1e-12 relative to max|d|); nonzero FD gradient at every node;
/// d > 0 on the closure of D0 when given. Throws WeightError naming the clause
/// ("nonnegative", "vanishes_off_gamma", "gradient", "positive_on_D0") and node.
void validate_d(const BaseFunction& d, std::optional<Interval> d0 = std::nullopt);

struct PlanRequest {
  Interval D0{0.5, 1.0};
  std::optional<double> delta0;
  double lambda = 1.0;
  double margin = 1.1;
  /// Recompute sigma0/sigma1 on the once-refined grid and warn on > 1% drift.
  bool refine_check = true;
};

struct SigmaValues {
  double sigma0 = 0.0;
  double sigma1 = 0.0;
  /// The three maxima whose largest is sigma1: terminal time t = delta,
  /// the non-Gamma side, and the far faces x_n = +-ell.
  double terminal = 0.0;
  double off_gamma = 0.0;
  double far_face = 0.0;
};

struct WeightPlan {
  CylinderGeometry geometry;
  BaseFunction d;
  double lambda = 1.0;
  double alpha = 0.0;
  double beta = 0.0;
  double delta0 = 0.0;
  double D0_lo = 0.0;
  double D0_hi = 0.0;
  double d0 = 0.0;
  double d1 = 0.0;
  double sigma0 = 0.0;
  double sigma1 = 0.0;
  double c0 = 0.0;
  double margin = 1.1;

  // Quantities the choices above were derived from.
  double delta0_sup = 0.0;
  double beta_lo = 0.0;
  double beta_hi = 0.0;
  double alpha_inf = 0.0;
  SigmaValues sigma_parts;
  std::vector<std::string> warnings;

  double psi(double xp, double xn, double t) const;
  double phi(double xp, double xn, double t) const;
  /// phi sampled on the nodes of `g` (same cross-section as the plan), SpaceTime kind.
  ScalarField phi_field(const CylinderGeometry& g) const;

  /// The inequalities d1 - beta delta^2 < d0 - beta delta0^2,
  /// 0 < d0 - beta delta0^2 and d1 - alpha ell^2 < d0 - beta delta0^2.
  std::array<bool, 3> derived_inequalities() const;
  Interval D0() const { return {D0_lo, D0_hi}; }
};

/// Grid-node evaluation of sigma0 / sigma1 on the sets where they are defined;
/// set endpoints (t = +-delta0, the bounds of D0) are sampled in addition to nodes.
SigmaValues compute_sigmas(const BaseFunction& d, const CylinderGeometry& g, double lambda,
                           double alpha, double beta, double delta0, Interval d0);

WeightPlan plan_parameters(const BaseFunction& d, const CylinderGeometry& geometry,
                           const PlanRequest& request);

struct RegionFamilyResult {
  double epsilon = 0.0;
  std::vector<double> tested_epsilons;
  CylinderGeometry D_tilde;
  Interval D1;
  double ratio = 0.0;  // min over D1 of d / max over D_tilde of d
  WeightPlan plan;
};

struct RegionFamilyRequest {
  double delta1 = 0.5;
  double x0_prime = 1.0;
  double epsilon0 = 0.5;
  double kappa0 = 1.0;
  double lambda = 1.0;
  double margin = 1.1;
};

/// Shrinking neighbourhoods of a point of Gamma. For each eps = eps0, eps0/2, ...
/// a base function d = tanh(kappa z)/tanh(kappa), z the normalized distance
/// from the artificial endpoint, kappa = kappa0 eps0/eps, is built on
/// D_tilde = D ∩ {|x' - x0'| < 2 eps}; the first eps with
/// (delta1/delta)^2 < min_{D1} d / max_{D_tilde} d < 1 is returned together
/// with the plan for (D_tilde, D1) and delta0 = delta1.
RegionFamilyResult region_family(const CylinderGeometry& geometry,
                                 const RegionFamilyRequest& request);

struct DecayIntegral {
  double value = 0.0;             // max over (x', t) nodes of the trapezoid x_n-integral
  double envelope_discrete = 0.0;  // same rule applied to the envelope integrand
  double envelope_reference = 0.0;  // envelope integral by adaptive quadrature
  double h = 0.0;                  // axial spacing
};

/// ∫_{-ell}^{ell} exp(2s(phi(x',x_n,t) - phi(x',0,t))) dx_n on the plan's axial
/// grid mirrored to (-ell, ell), maximized over (x', t) nodes, with its envelope
/// ∫ exp(-2 s c0 (1 - exp(-lambda alpha x_n^2))) dx_n.
DecayIntegral decay_integral(const WeightPlan& plan, double s);

/// theta = (sigma0 - sigma1) / (C1 + sigma0 - sigma1).
double holder_exponent(double sigma0, double sigma1, double C1);

}  // namespace clab
