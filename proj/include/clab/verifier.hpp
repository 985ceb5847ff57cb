#pragma once

#include "clab/grid.hpp"
#include "clab/weight.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace clab {

struct Lemma1Result {
  double hessian = 0.0;    // sum_ij ||d_i d_j w||^2
  double boundary = 0.0;   // sum_ij ∫ d_i w (d_j d_j w nu_i - d_i d_j w nu_j)
  double laplacian = 0.0;  // ||Laplace w||^2
  double residual = 0.0;   // relative, or absolute when `absolute`
  bool absolute = false;   // ||Laplace w|| = 0 on the grid
};

/// Integration-by-parts identity for w(x', x_n) on the rectangle D x (-ell, ell):
/// |hessian + boundary - laplacian| / laplacian. w must be of kind SpaceOnly.
/// Derivatives at boundary nodes use third-order one-sided differences, so the
/// boundary strip adds O(h^4) rather than O(h^3) to the O(h^2) residual.
Lemma1Result lemma1_residual(const ScalarField& w);

/// Both sides of a weighted inequality. Every integral carries the factor
/// exp(2 s (phi - phi_max)); the unshifted logarithm is log(value) + 2 s phi_max.
struct InequalitySides {
  double s = 0.0;
  double phi_max = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  /// Carleman: residual, s^3 boundary gradient, s^3 boundary value,
  /// (1/s) boundary H^2 trace, s^3 terminal t = +delta, s^3 terminal t = -delta.
  /// Standard estimate: the same with the trace term set to 0.
  std::array<double, 6> rhs_terms{};

  double lhs_log() const;
  double rhs_log() const;
  double ratio() const { return lhs / rhs; }
};

/// Precomputed derivatives of a space-time field on Q± reused across s.
class WeightedEvaluator {
 public:
  WeightedEvaluator(const ScalarField& u, const WeightPlan& plan, const ScalarField& p0);

  InequalitySides carleman(double s) const;
  InequalitySides standard(double s) const;

 private:
  struct FaceTerms {
    ScalarField u;    // trace of u
    ScalarField phi;  // trace of phi
    std::vector<double> weight, grad_sq, u_sq;
    int tangent_axis = 1;
  };
  std::vector<double> weight_, phi_, hessian_sq_, laplacian_sq_, grad_sq_, u_sq_, residual_sq_;
  std::vector<FaceTerms> faces_;
  std::vector<double> terminal_weight_, terminal_phi_, terminal_plus_, terminal_minus_;
  double phi_max_ = 0.0;

  InequalitySides evaluate(double s, bool carleman) const;
};

/// Lemma 2.2 sides for u on the extended cylinder (geometry.extended = true).
InequalitySides carleman_sides(const ScalarField& u, const WeightPlan& plan, double s,
                               const ScalarField& p0);
/// The classical estimate with (1/s)|Laplace u|^2 in place of the Hessian.
InequalitySides standard_estimate_sides(const ScalarField& u, const WeightPlan& plan, double s,
                                        const ScalarField& p0);

/// Smooth analytic field g(x', x_n, t) built from low-order trigonometric and
/// polynomial modes with seeded coefficients.
struct CorpusMember {
  std::uint64_t seed = 0;
  std::function<double(double, double, double)> eval;
};

/// `count` members from mt19937_64(seed); member i uses seed + i. Coordinates are
/// normalized against `geometry` so fields are O(1) with O(1) derivatives.
std::vector<CorpusMember> make_corpus(const CylinderGeometry& geometry, int count, std::uint64_t seed,
                                      bool time_dependent = true);

struct Lemma1Row {
  int member = 0;
  double residual = 0.0;          // on the given grid
  double residual_refined = 0.0;  // on the once-refined grid
  double ratio = 0.0;             // residual / residual_refined
  bool absolute = false;
};

struct Lemma1Study {
  std::vector<Lemma1Row> rows;
  std::uint64_t geometry_hash = 0;
  double fraction_in_band = 0.0;  // share of ratios in [3.5, 4.5]
};

/// Lemma 1 residual of the time-independent part of every corpus member on
/// `geometry` and on its refinement.
Lemma1Study lemma1_study(const CylinderGeometry& geometry, const std::vector<CorpusMember>& corpus);

struct CarlemanRow {
  int member = 0;
  double s = 0.0;
  double lhs_log = 0.0;
  double rhs_log = 0.0;
  double ratio = 0.0;
};

struct CarlemanReport {
  std::vector<double> s_grid;
  std::vector<CarlemanRow> rows;
  double C_emp = 0.0;
  double C_cap = 0.0;
  double s_min_emp = 0.0;  // +inf when no s of the grid qualifies
  int corpus_size = 0;
  std::uint64_t geometry_hash = 0;
};

/// Evaluate the Carleman sides for every (member, s); C_emp is the largest ratio
/// and s_min_emp the smallest grid s from which on every ratio stays <= C_cap.
/// The certificate is empirical: a finite corpus and a finite s-range.
CarlemanReport certify_carleman(const CylinderGeometry& extended_geometry, const WeightPlan& plan,
                                const std::vector<CorpusMember>& corpus,
                                const std::vector<double>& s_grid, double C_cap,
                                const std::function<double(double, double)>& p0);

struct SigmaGapReport {
  double sigma0 = 0.0;
  double sigma1 = 0.0;
  double sigma0_refined = 0.0;
  double sigma1_refined = 0.0;
  double gap_ratio = 0.0;           // sigma0 / sigma1 at lambda
  double gap_ratio_2lambda = 0.0;   // same alpha, beta, delta0 with 2 lambda
  bool strict = false;              // strict on both grids
};

/// Recompute sigma0 / sigma1 on the once-refined grid; throws WeightError if the
/// gap closes there.
SigmaGapReport sigma_gap_check(const WeightPlan& plan);

}  // namespace clab
