#include "clab/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace clab {

using Triplet = Eigen::Triplet<double>;

// --- oracle ------------------------------------------------------------------

ScalarField oracle_trace_reconstruct(const ScalarField& u, const ScalarField& R, double r_min) {
  if (u.kind() != FieldKind::SpaceTime || !u.same_layout(R)) {
    throw ReconstructionError("oracle reconstruction needs space-time u and R on one grid");
  }
  if (u.geometry().extended) throw ReconstructionError("oracle reconstruction works on the half cylinder");
  const auto e = u.extents();
  const StencilRow row = second_derivative_row(e[1], u.grid().xn.h, 0);
  ScalarField f(u.geometry(), FieldKind::CrossSectionTime);
  for (int i = 0; i < e[0]; ++i) {
    for (int k = 0; k < e[2]; ++k) {
      const double r = R(i, 0, k);
      if (!(std::abs(r) >= r_min)) {
        std::ostringstream s;
        s << "|R(x',0,t)| = " << std::abs(r) << " below r_min = " << r_min << " at node (" << i
          << ", " << k << ")";
        throw ReconstructionError(s.str());
      }
      double unn = 0.0;
      for (int m = 0; m < row.count; ++m) unn += row.coef[static_cast<std::size_t>(m)] * u(i, row.first + m, k);
      f(i, 0, k) = -unn / r;
    }
  }
  return f;
}

// --- sparse assembly ---------------------------------------------------------

namespace {

SparseMatrix identity(int n) {
  SparseMatrix m(n, n);
  m.setIdentity();
  return m;
}

SparseMatrix derivative_matrix(const Axis& ax, int order) {
  std::vector<Triplet> t;
  for (int i = 0; i < ax.n; ++i) {
    const StencilRow r = order == 1 ? first_derivative_row(ax.n, ax.h, i) : second_derivative_row(ax.n, ax.h, i);
    for (int m = 0; m < r.count; ++m) t.emplace_back(i, r.first + m, r.coef[static_cast<std::size_t>(m)]);
  }
  SparseMatrix d(ax.n, ax.n);
  d.setFromTriplets(t.begin(), t.end());
  return d;
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (int ka = 0; ka < a.outerSize(); ++ka) {
    for (SparseMatrix::InnerIterator ia(a, ka); ia; ++ia) {
      for (int kb = 0; kb < b.outerSize(); ++kb) {
        for (SparseMatrix::InnerIterator ib(b, kb); ib; ++ib) {
          t.emplace_back(static_cast<int>(ia.row() * b.rows() + ib.row()),
                         static_cast<int>(ia.col() * b.cols() + ib.col()), ia.value() * ib.value());
        }
      }
    }
  }
  SparseMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  k.setFromTriplets(t.begin(), t.end());
  return k;
}

SparseMatrix kron3(const SparseMatrix& a, const SparseMatrix& b, const SparseMatrix& c) {
  return kron(kron(a, b), c);
}

SparseMatrix diagonal(const std::vector<double>& d) {
  SparseMatrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < d.size(); ++i) t.emplace_back(static_cast<int>(i), static_cast<int>(i), d[i]);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

/// Rows `rows` of `m`.
SparseMatrix select_rows(const SparseMatrix& m, const std::vector<int>& rows) {
  SparseMatrix sel(static_cast<int>(rows.size()), m.rows());
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < rows.size(); ++i) t.emplace_back(static_cast<int>(i), rows[i], 1.0);
  sel.setFromTriplets(t.begin(), t.end());
  return sel * m;
}

/// Stack blocks vertically (all with the same column count).
SparseMatrix vstack(const std::vector<SparseMatrix>& blocks) {
  Eigen::Index rows = 0;
  const Eigen::Index cols = blocks.front().cols();
  std::vector<Triplet> t;
  for (const auto& b : blocks) {
    for (int k = 0; k < b.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(b, k); it; ++it) {
        t.emplace_back(static_cast<int>(rows + it.row()), static_cast<int>(it.col()), it.value());
      }
    }
    rows += b.rows();
  }
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

/// [a | b] side by side.
SparseMatrix hstack(const SparseMatrix& a, const SparseMatrix& b) {
  std::vector<Triplet> t;
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  }
  for (int k = 0; k < b.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(b, k); it; ++it) {
      t.emplace_back(static_cast<int>(it.row()), static_cast<int>(a.cols() + it.col()), it.value());
    }
  }
  SparseMatrix m(a.rows(), a.cols() + b.cols());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

std::vector<double> sqrt_of(std::vector<double> v, double factor = 1.0) {
  for (double& x : v) x = std::sqrt(factor * x);
  return v;
}

}  // namespace

// --- lateral reconstruction --------------------------------------------------

LateralReconstructor::LateralReconstructor(const CylinderGeometry& geometry, const WeightPlan& plan,
                                           const ScalarField& p0, const ScalarField& R,
                                           const RegularizationParams& params)
    : geometry_(geometry), params_(params) {
  geometry.validate();
  if (geometry.extended) throw ReconstructionError("lateral reconstruction works on the half cylinder");
  if (!(params.mu > 0.0)) throw ReconstructionError("tikhonov weight mu must be positive");
  if (!(params.carleman_s >= 0.0)) throw ReconstructionError("carleman_s must be nonnegative");
  if (!(params.cg_tol > 0.0) || params.cg_maxit < 1) throw ReconstructionError("invalid CG controls");
  if (!(params.cauchy_weight > 0.0) || !(params.face_weight > 0.0)) {
    throw ReconstructionError("data weights must be positive");
  }
  if (R.kind() != FieldKind::SpaceTime || !(R.geometry() == geometry)) {
    throw ReconstructionError("R must be a space-time field on the reconstruction grid");
  }
  if (p0.kind() != FieldKind::CrossSectionTime || !(p0.geometry() == geometry)) {
    throw ReconstructionError("p0 must be a cross-section-time field on the reconstruction grid");
  }

  const Grid g = build_grid(geometry);
  const int nx = g.xp.n, nn = g.xn.n, nt = g.t.n;
  nu_ = static_cast<std::size_t>(nx) * nn * nt;
  nf_ = static_cast<std::size_t>(nx) * nt;
  const SparseMatrix ix = identity(nx), in = identity(nn), it = identity(nt);
  const SparseMatrix dx = kron3(derivative_matrix(g.xp, 1), in, it);
  const SparseMatrix dxx = kron3(derivative_matrix(g.xp, 2), in, it);
  const SparseMatrix dn = kron3(ix, derivative_matrix(g.xn, 1), it);
  const SparseMatrix dnn = kron3(ix, derivative_matrix(g.xn, 2), it);
  const SparseMatrix dtm = kron3(ix, in, derivative_matrix(g.t, 1));
  SparseMatrix ones_n(nn, 1);
  {
    std::vector<Triplet> t;
    for (int j = 0; j < nn; ++j) t.emplace_back(j, 0, 1.0);
    ones_n.setFromTriplets(t.begin(), t.end());
  }
  const SparseMatrix spread = kron3(ix, ones_n, it);  // (x', t) -> (x', x_n, t)

  const ScalarField p0b = broadcast(p0, FieldKind::SpaceTime);
  const std::vector<double> p0v(p0b.values().begin(), p0b.values().end());
  const std::vector<double> rv(R.values().begin(), R.values().end());

  // PDE block, weighted by sqrt(trapezoid) * exp(s (phi - phi_max)).
  ScalarField probe(geometry, FieldKind::SpaceTime);
  std::vector<double> wpde = sqrt_of(trapezoid_weights(probe, Region::all()));
  if (params.carleman_s > 0.0) {
    const ScalarField phi = plan.phi_field(geometry);
    const double pmax = phi.max_abs();
    for (std::size_t i = 0; i < wpde.size(); ++i) {
      wpde[i] *= std::exp(params.carleman_s * (phi.values()[i] - pmax));
    }
  }
  std::vector<double> negr(rv.size());
  for (std::size_t i = 0; i < rv.size(); ++i) negr[i] = -rv[i];
  const SparseMatrix heat = dtm - dxx - dnn - diagonal(p0v);
  const SparseMatrix pde = diagonal(wpde) * hstack(heat, diagonal(negr) * spread);

  // Cauchy rows on Gamma and constraint rows on x_n = 0.
  const int gi = geometry.gamma_index();
  std::vector<int> gamma_rows, zero_rows;
  for (int j = 0; j < nn; ++j) {
    for (int k = 0; k < nt; ++k) gamma_rows.push_back((gi * nn + j) * nt + k);
  }
  for (int i = 0; i < nx; ++i) {
    for (int k = 0; k < nt; ++k) zero_rows.push_back((i * nn + 0) * nt + k);
  }
  gamma_nodes_ = gamma_rows;
  ScalarField face_probe(geometry, FieldKind::LateralFace);
  cauchy_scale_ = sqrt_of(trapezoid_weights(face_probe, Region::all()), params.cauchy_weight);
  ScalarField base_probe(geometry, FieldKind::CrossSectionTime);
  const std::vector<double> wf0 = sqrt_of(trapezoid_weights(base_probe, Region::all()), params.face_weight);

  const SparseMatrix zero_gamma(static_cast<int>(gamma_rows.size()), static_cast<int>(nf_));
  const SparseMatrix zero_face(static_cast<int>(zero_rows.size()), static_cast<int>(nf_));
  const SparseMatrix c1 = diagonal(cauchy_scale_) * hstack(select_rows(dn, gamma_rows), zero_gamma);
  const SparseMatrix c2 = diagonal(cauchy_scale_) * hstack(select_rows(SparseMatrix(dx * dn), gamma_rows), zero_gamma);
  const SparseMatrix z0 = diagonal(wf0) * hstack(select_rows(identity(static_cast<int>(nu_)), zero_rows), zero_face);
  const SparseMatrix z1 = diagonal(wf0) * hstack(select_rows(dn, zero_rows), zero_face);
  design_ = vstack({pde, c1, c2, z0, z1});

  // Regularizer mu (||f||^2 + ||d_x' u||^2 + ||d_n u||^2).
  const std::vector<double> sw = sqrt_of(trapezoid_weights(probe, Region::all()));
  const std::vector<double> swf = sqrt_of(trapezoid_weights(base_probe, Region::all()));
  const SparseMatrix zero_uf(static_cast<int>(nu_), static_cast<int>(nf_));
  const SparseMatrix zero_fu(static_cast<int>(nf_), static_cast<int>(nu_));
  const SparseMatrix reg = vstack({hstack(diagonal(sw) * dx, zero_uf), hstack(diagonal(sw) * dn, zero_uf),
                                   hstack(zero_fu, diagonal(swf))});

  normal_ = SparseMatrix(design_.transpose() * design_) + params.mu * SparseMatrix(reg.transpose() * reg);
  normal_.makeCompressed();
  if (params.precondition) {
    preconditioner_ = std::make_unique<CholeskyPreconditioner>(normal_);
  } else {
    preconditioner_ = std::make_unique<IdentityPreconditioner>();
  }
}

LateralReconstructor::~LateralReconstructor() = default;

Vector LateralReconstructor::normal_rhs(const BoundaryBundle& data) const {
  const std::size_t ng = gamma_nodes_.size();
  if (data.y.size() != ng || data.y_xp.size() != ng || !(data.y.geometry() == geometry_)) {
    throw ReconstructionError("bundle does not match the reconstruction grid");
  }
  Vector b = Vector::Zero(design_.rows());
  const std::size_t off1 = nu_;
  const std::size_t off2 = nu_ + ng;
  for (std::size_t i = 0; i < ng; ++i) {
    b[static_cast<Eigen::Index>(off1 + i)] = cauchy_scale_[i] * data.y.values()[i];
    b[static_cast<Eigen::Index>(off2 + i)] = cauchy_scale_[i] * data.y_xp.values()[i];
  }
  return design_.transpose() * b;
}

LateralResult LateralReconstructor::solve(const BoundaryBundle& data) const {
  const Vector rhs = normal_rhs(data);
  KrylovOptions opt;
  opt.tol = params_.cg_tol;
  opt.maxit = params_.cg_maxit;
  const KrylovResult kr = conjugate_residual(normal_, rhs, *preconditioner_, opt);
  if (!kr.converged) {
    std::ostringstream s;
    s << "conjugate residual iteration stopped at relative residual " << kr.relative_residual
      << " after " << kr.iterations << " iterations (tolerance " << params_.cg_tol << ")";
    throw ConvergenceError(s.str(), kr.relative_residual, kr.iterations);
  }
  LateralResult out;
  out.u_hat = ScalarField(geometry_, FieldKind::SpaceTime);
  out.f_hat = ScalarField(geometry_, FieldKind::CrossSectionTime);
  std::copy(kr.x.data(), kr.x.data() + nu_, out.u_hat.values().begin());
  std::copy(kr.x.data() + nu_, kr.x.data() + nu_ + nf_, out.f_hat.values().begin());
  out.iterations = kr.iterations;
  out.relative_residual = kr.relative_residual;
  out.residual_history = kr.residual_history;
  return out;
}

LateralResult lateral_reconstruct(const BoundaryBundle& data, const CylinderGeometry& geometry,
                                  const WeightPlan& plan, const ScalarField& p0, const ScalarField& R,
                                  const RegularizationParams& params) {
  return LateralReconstructor(geometry, plan, p0, R, params).solve(data);
}

// --- errors and sweep --------------------------------------------------------

Region stability_region(const WeightPlan& plan) {
  return Region::box(plan.D0_lo, plan.D0_hi, -1e300, 1e300, -plan.delta0, plan.delta0);
}

ErrorPair reconstruction_errors(const ScalarField& f_hat, const ScalarField& f, const WeightPlan& plan) {
  if (!f_hat.same_layout(f)) throw ReconstructionError("f_hat and f differ in layout");
  const ScalarField e = f_hat - f;
  return {discrete_norm(e, stability_region(plan), NormKind::L2), discrete_norm(e, Region::all(), NormKind::L2)};
}

SweepReport stability_sweep(const ProblemInstance& instance, std::vector<double> noise_levels,
                            const WeightPlan& plan, const RegularizationParams& params,
                            std::uint64_t seed) {
  const LateralReconstructor solver(instance.geometry, plan, instance.p0, instance.R, params);
  return stability_sweep(instance, std::move(noise_levels), plan, solver, seed);
}

SweepReport stability_sweep(const ProblemInstance& instance, std::vector<double> noise_levels,
                            const WeightPlan& plan, const LateralReconstructor& solver,
                            std::uint64_t seed) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double v : noise_levels) {
    if (!(v >= 0.0)) throw ReconstructionError("noise levels must be nonnegative");
    if (v > 0.0) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (noise_levels.size() < 4 || !(hi >= 100.0 * lo)) {
    throw ReconstructionError("a sweep needs at least 4 noise levels spanning 2 decades");
  }
  std::sort(noise_levels.begin(), noise_levels.end(), std::greater<>());

  SweepReport rep;
  rep.sigma0 = plan.sigma0;
  rep.sigma1 = plan.sigma1;
  rep.invariants_ok = true;
  for (double level : noise_levels) {
    const ProblemInstance noisy = add_noise(instance, level, seed);
    const LateralResult r = solver.solve(noisy.data);
    const ErrorPair e = reconstruction_errors(r.f_hat, instance.f, plan);
    SweepRow row;
    row.noise = level;
    row.D_u = compute_data_functional(noisy.data - instance.data);
    row.err_region = e.region;
    row.err_global = e.global;
    rep.invariants_ok = rep.invariants_ok && e.region <= e.global && std::isfinite(e.global);
    rep.rows.push_back(row);
    rep.f_hat.push_back(r.f_hat);
  }

  const auto& rows = rep.rows;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].noise <= 0.0 || !(rows[i].err_region > 0.0) || !(rows[i].D_u > 0.0)) continue;
    const bool dropped = i > 0 && rows[i].err_region < rows[i - 1].err_region;
    const bool leads = i == 0 && rows.size() > 1 && rows[1].err_region < rows[0].err_region;
    if (dropped || leads) rep.fit_rows.push_back(static_cast<int>(i));
  }
  if (rep.fit_rows.size() < 3) {
    throw ReconstructionError("degenerate fit: fewer than 3 rows with decreasing region error");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(rep.fit_rows.size());
  for (int i : rep.fit_rows) {
    const double x = std::log(rows[static_cast<std::size_t>(i)].D_u);
    const double y = std::log(rows[static_cast<std::size_t>(i)].err_region);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  if (!(den > 0.0)) throw ReconstructionError("degenerate fit: data functional constant over fit rows");
  rep.theta_emp = (n * sxy - sx * sy) / den;
  return rep;
}

CorollaryReport corollary_check(const ScalarField& f_hat, double region_error,
                                const ProblemInstance& instance, const WeightPlan& plan) {
  const CylinderGeometry& g = instance.geometry;
  if (g.nt % 2 == 0) throw ReconstructionError("t = 0 is not a grid node");
  const int k0 = (g.nt - 1) / 2;
  const ScalarField diff = f_hat - instance.f;
  ScalarField slice(g, FieldKind::CrossSection);
  for (int i = 0; i < g.nx_prime; ++i) slice(i, 0, 0) = diff(i, 0, k0);
  CorollaryReport r;
  r.slice_error = discrete_norm(slice, Region::box(plan.D0_lo, plan.D0_hi, -1e300, 1e300, -1e300, 1e300),
                                NormKind::L2);
  r.region_error = region_error;
  r.passed = r.slice_error <= 2.0 * r.region_error;
  return r;
}

CorollaryReport corollary_check(const SweepReport& sweep, const ProblemInstance& instance,
                                const WeightPlan& plan) {
  for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
    if (sweep.rows[i].noise == 0.0) {
      return corollary_check(sweep.f_hat.at(i), sweep.rows[i].err_region, instance, plan);
    }
  }
  throw ReconstructionError("corollary check needs a noiseless sweep row");
}

}  // namespace clab
