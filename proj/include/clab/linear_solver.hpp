#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <string>
#include <vector>

namespace clab {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Symmetric positive definite approximation of an operator's inverse.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual Vector apply(const Vector& r) const = 0;
};

class IdentityPreconditioner final : public Preconditioner {
 public:
  Vector apply(const Vector& r) const override { return r; }
};

/// Sparse Cholesky factor of an SPD matrix. CHOLMOD's supernodal factor is
/// tried first and kept if a probe solve has small backward error; otherwise
/// Eigen's simplicial LLT (AMD ordering) is used, with a diagonal shift
/// tau * max|a_ii|, tau growing from 1e-14 by decades, if it breaks down.
class CholeskyPreconditioner final : public Preconditioner {
 public:
  explicit CholeskyPreconditioner(const SparseMatrix& a);
  ~CholeskyPreconditioner() override;
  CholeskyPreconditioner(const CholeskyPreconditioner&) = delete;
  CholeskyPreconditioner& operator=(const CholeskyPreconditioner&) = delete;

  Vector apply(const Vector& r) const override;
  double shift() const { return shift_; }
  const std::string& backend() const { return backend_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double shift_ = 0.0;
  std::string backend_;
};

struct KrylovOptions {
  double tol = 1e-8;
  int maxit = 10000;
};

struct KrylovResult {
  Vector x;
  int iterations = 0;
  bool converged = false;
  /// ||b - A x|| / ||b|| at exit.
  double relative_residual = 0.0;
  /// Relative preconditioned residual norm sqrt(r.Pr / r0.Pr0) per iteration,
  /// starting with 1 at iteration 0. With the identity preconditioner this is
  /// the Euclidean residual.
  std::vector<double> residual_history;
};

/// Preconditioned conjugate residual iteration for A x = b with A symmetric
/// positive (semi)definite. Each step minimizes the preconditioned residual
/// norm over the Krylov space, so `residual_history` never increases. Stops
/// when ||b - A x|| <= tol * ||b||.
KrylovResult conjugate_residual(const SparseMatrix& a, const Vector& b, const Preconditioner& m,
                                const KrylovOptions& options, const Vector* x0 = nullptr);

}  // namespace clab
