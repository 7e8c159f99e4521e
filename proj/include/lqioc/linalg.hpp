#pragma once

#include <Eigen/Dense>

#include "lqioc/errors.hpp"

namespace lqioc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense real symmetric matrix.
///
/// Construction symmetrizes the input as (X + Xᵀ)/2, so entries(i, j) and
/// entries(j, i) are bitwise equal afterwards. Inputs whose asymmetry exceeds
/// 1e-8 relative to their Frobenius norm are rejected, as are non-finite
/// entries.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  static SymMatrix zero(Eigen::Index n);
  static SymMatrix identity(Eigen::Index n);
  static SymMatrix diagonal(const Vector& d);

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  double norm() const { return m_.norm(); }

  SymMatrix operator+(const SymMatrix& o) const;
  SymMatrix operator-(const SymMatrix& o) const;
  SymMatrix operator-() const;
  friend SymMatrix operator*(double s, const SymMatrix& a);

 private:
  Matrix m_;
};

/// Trace inner product ⟨X, Y⟩ = tr(XᵀY).
double inner(const SymMatrix& a, const SymMatrix& b);

struct EigenDecomposition {
  Vector values;   // descending
  Matrix vectors;  // columns are the eigenvectors, orthonormal

  Matrix reconstruct() const;
};

/// Cyclic Jacobi eigensolver. Eigenvalues are sorted descending; ties keep
/// the order in which they appear on the rotated diagonal.
EigenDecomposition symmetric_eigen(const SymMatrix& s);

double min_eigenvalue(const SymMatrix& s);
double max_eigenvalue(const SymMatrix& s);

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped to 0).
SymMatrix psd_project(const SymMatrix& s);

/// Lower-triangular L with L·Lᵀ = S. Requires λ_min > 1e-12·λ_max.
Matrix cholesky(const SymMatrix& s);

/// Symmetric square root-like factor F with F·Fᵀ = S for PSD S. Uses Cholesky
/// when S is PD and falls back to V·diag(√λ₊) otherwise.
Matrix psd_factor(const SymMatrix& s);

/// Matrix exponential: degree-6 diagonal Padé approximant with
/// scaling and squaring.
Matrix expm(const Matrix& x);

/// Numerical rank with threshold rel_tol · σ_max.
Eigen::Index numerical_rank(const Matrix& m, double rel_tol = 1e-10);

double spectral_radius(const Matrix& m);

bool all_finite(const Matrix& m);
void require_finite(const Matrix& m, const char* what);
void require_square(const Matrix& m, const char* what);

}  // namespace lqioc
