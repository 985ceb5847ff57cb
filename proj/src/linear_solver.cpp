#include "clab/linear_solver.hpp"

#include <Eigen/CholmodSupport>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <stdexcept>

namespace clab {

namespace {

// Backward error of a solve against a fixed probe vector.
template <class Factor>
bool factor_is_sound(const Factor& f, const SparseMatrix& a) {
  if (f.info() != Eigen::Success) return false;
  Vector b(a.rows());
  for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i));
  const Vector y = f.solve(b);
  if (!y.allFinite()) return false;
  double a_inf = 0.0;
  for (Eigen::Index j = 0; j < a.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(a, j); it; ++it) a_inf = std::max(a_inf, std::abs(it.value()));
  }
  const double scale = a_inf * static_cast<double>(a.rows()) * y.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
  return (a * y - b).lpNorm<Eigen::Infinity>() <= 1e-8 * scale;
}

}  // namespace

struct CholeskyPreconditioner::Impl {
  Eigen::CholmodSupernodalLLT<SparseMatrix, Eigen::Lower> supernodal;
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> simplicial;
  bool use_supernodal = false;
};

CholeskyPreconditioner::CholeskyPreconditioner(const SparseMatrix& a)
    : impl_(std::make_unique<Impl>()) {
  if (a.rows() != a.cols()) throw std::invalid_argument("Cholesky factor of a non-square matrix");
  double diag_max = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) diag_max = std::max(diag_max, std::abs(a.coeff(i, i)));

  impl_->supernodal.cholmod().print = 0;
  impl_->supernodal.compute(a);
  if (factor_is_sound(impl_->supernodal, a)) {
    impl_->use_supernodal = true;
    backend_ = "cholmod-supernodal";
    return;
  }
  // Supernodal kernels rely on the system BLAS; the simplicial factor does not.
  backend_ = "eigen-simplicial";
  impl_->simplicial.analyzePattern(a);
  impl_->simplicial.factorize(a);
  double tau = 1e-14;
  while (impl_->simplicial.info() != Eigen::Success) {
    if (tau > 1e-2) throw std::runtime_error("Cholesky preconditioner failed even with a shift");
    shift_ = tau * diag_max;
    impl_->simplicial.setShift(shift_);
    impl_->simplicial.factorize(a);
    tau *= 10.0;
  }
}

CholeskyPreconditioner::~CholeskyPreconditioner() = default;

Vector CholeskyPreconditioner::apply(const Vector& r) const {
  return impl_->use_supernodal ? Vector(impl_->supernodal.solve(r)) : Vector(impl_->simplicial.solve(r));
}

KrylovResult conjugate_residual(const SparseMatrix& a, const Vector& b, const Preconditioner& m,
                                const KrylovOptions& options, const Vector* x0) {
  if (a.rows() != a.cols() || a.rows() != b.size()) {
    throw std::invalid_argument("conjugate_residual: inconsistent shapes");
  }
  KrylovResult out;
  out.x = x0 ? *x0 : Vector::Zero(b.size());
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.x.setZero();
    out.converged = true;
    out.residual_history.push_back(0.0);
    return out;
  }

  out.residual_history.push_back(1.0);
  double m0 = -1.0;
  // Outer loop restarts from the true residual when the recurrence drifts.
  while (true) {
    Vector r = b - a * out.x;
    out.relative_residual = r.norm() / bnorm;
    if (out.relative_residual <= options.tol || out.iterations >= options.maxit) break;
    Vector z = m.apply(r);
    Vector az = a * z;
    Vector p = z;
    Vector ap = az;
    double rho = z.dot(az);
    if (m0 < 0.0) m0 = std::sqrt(std::max(r.dot(z), 0.0));
    const int start = out.iterations;
    double recurrence = out.relative_residual;
    while (recurrence > options.tol && out.iterations < options.maxit) {
      const Vector map = m.apply(ap);
      const double denom = ap.dot(map);
      if (!(denom > 0.0) || !(rho > 0.0)) break;
      const double alpha = rho / denom;
      out.x += alpha * p;
      r -= alpha * ap;
      z -= alpha * map;
      az = a * z;
      const double rho_next = z.dot(az);
      const double beta = rho_next / rho;
      rho = rho_next;
      p = z + beta * p;
      ap = az + beta * ap;
      ++out.iterations;
      recurrence = r.norm() / bnorm;
      out.residual_history.push_back(m0 > 0.0 ? std::sqrt(std::max(r.dot(z), 0.0)) / m0 : 0.0);
    }
    if (out.iterations == start) break;  // breakdown without progress
  }
  out.converged = out.relative_residual <= options.tol;
  return out;
}

}  // namespace clab
