#pragma once

#include "clab/grid.hpp"
#include "clab/linear_solver.hpp"
#include "clab/problems.hpp"
#include "clab/weight.hpp"

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace clab {

class ReconstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the Krylov iteration stops above its tolerance.
class ConvergenceError : public ReconstructionError {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : ReconstructionError(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// f = -d_{x_n}^2 u(x', 0, t) / R(x', 0, t) with the one-sided 4-point stencil.
ScalarField oracle_trace_reconstruct(const ScalarField& u, const ScalarField& R, double r_min = 1e-10);

struct RegularizationParams {
  double mu = 1e-8;            // Tikhonov weight on ||f||^2 + ||grad u||^2
  double carleman_s = 0.0;     // PDE residual weighted by exp(s (phi - phi_max))
  double cg_tol = 1e-8;
  int cg_maxit = 10000;
  double cauchy_weight = 100.0;  // misfit of d_n u and d_x' d_n u on Gamma
  double face_weight = 100.0;    // u = d_n u = 0 on x_n = 0
  bool precondition = true;      // sparse Cholesky preconditioner
};

struct LateralResult {
  ScalarField u_hat;  // SpaceTime
  ScalarField f_hat;  // CrossSectionTime
  int iterations = 0;
  double relative_residual = 0.0;
  std::vector<double> residual_history;
};

/// Joint least squares in (u, f) on the half cylinder:
///   ||(d_t u - Laplace u - p0 u - R f) e^{s(phi - phi_max)}||^2
///   + w_c ||(d_n u, d_x' d_n u) - (y, y_x') on Gamma||^2
///   + w_0 ||(u, d_n u) on x_n = 0||^2 + mu (||f||^2 + ||grad u||^2),
/// all norms trapezoidal. The normal operator and its factorization depend only
/// on geometry, plan, p0, R and the parameters, so one instance serves many
/// data bundles.
class LateralReconstructor {
 public:
  LateralReconstructor(const CylinderGeometry& geometry, const WeightPlan& plan, const ScalarField& p0,
                       const ScalarField& R, const RegularizationParams& params);
  ~LateralReconstructor();
  LateralReconstructor(const LateralReconstructor&) = delete;
  LateralReconstructor& operator=(const LateralReconstructor&) = delete;

  /// Throws ConvergenceError if the tolerance is not met within cg_maxit.
  LateralResult solve(const BoundaryBundle& data) const;

  const SparseMatrix& normal_matrix() const { return normal_; }
  const SparseMatrix& design_matrix() const { return design_; }
  Vector normal_rhs(const BoundaryBundle& data) const;
  std::size_t unknowns_u() const { return nu_; }
  std::size_t unknowns_f() const { return nf_; }

 private:
  CylinderGeometry geometry_;
  RegularizationParams params_;
  std::size_t nu_ = 0;
  std::size_t nf_ = 0;
  SparseMatrix design_;
  SparseMatrix normal_;
  std::vector<double> cauchy_scale_;
  std::vector<int> gamma_nodes_;
  std::unique_ptr<Preconditioner> preconditioner_;
};

LateralResult lateral_reconstruct(const BoundaryBundle& data, const CylinderGeometry& geometry,
                                  const WeightPlan& plan, const ScalarField& p0, const ScalarField& R,
                                  const RegularizationParams& params);

struct ErrorPair {
  double region = 0.0;  // L2 over D0 x (-delta0, delta0)
  double global = 0.0;  // L2 over D x (-delta, delta)
};

/// Absolute L2 errors of f_hat on the stability region and globally.
ErrorPair reconstruction_errors(const ScalarField& f_hat, const ScalarField& f, const WeightPlan& plan);
Region stability_region(const WeightPlan& plan);

struct SweepRow {
  double noise = 0.0;
  double D_u = 0.0;
  double err_region = 0.0;
  double err_global = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;  // descending noise
  double theta_emp = 0.0;
  double sigma0 = 0.0;
  double sigma1 = 0.0;
  std::vector<int> fit_rows;
  bool invariants_ok = false;  // err_region <= err_global on every row
  std::vector<ScalarField> f_hat;  // per row
};

/// For each level: perturb the bundle (same seed at every level), reconstruct
/// and record the errors. D_u is the data functional of the perturbation
/// (noisy minus clean bundle). theta_emp is the least-squares slope of
/// log err_region against log D_u over the positive-noise rows whose region
/// error dropped against the preceding row (the first row joins when the
/// second dropped). Throws ReconstructionError on fewer than 3 such rows.
SweepReport stability_sweep(const ProblemInstance& instance, std::vector<double> noise_levels,
                            const WeightPlan& plan, const RegularizationParams& params,
                            std::uint64_t seed);

/// Same as above with a prebuilt reconstructor.
SweepReport stability_sweep(const ProblemInstance& instance, std::vector<double> noise_levels,
                            const WeightPlan& plan, const LateralReconstructor& solver,
                            std::uint64_t seed);

struct CorollaryReport {
  double slice_error = 0.0;   // ||f_hat(., 0) - f(., 0)||_{L2(D0)}
  double region_error = 0.0;  // noiseless row err_region
  bool passed = false;        // slice_error <= 2 region_error
};

/// Throws ReconstructionError if the sweep has no noiseless row or t = 0 is not a node.
CorollaryReport corollary_check(const SweepReport& sweep, const ProblemInstance& instance,
                                const WeightPlan& plan);
CorollaryReport corollary_check(const ScalarField& f_hat, double region_error,
                                const ProblemInstance& instance, const WeightPlan& plan);

}  // namespace clab
