#include "lqioc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace lqioc {

bool all_finite(const Matrix& m) { return m.allFinite(); }

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InputError(std::string(what) + ": non-finite entries");
  }
}

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw InputError(std::string(what) + ": expected a square matrix, got " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

SymMatrix::SymMatrix(const Matrix& m) {
  require_square(m, "SymMatrix");
  require_finite(m, "SymMatrix");
  const double asym = (m - m.transpose()).norm();
  if (asym > 1e-8 * m.norm()) {
    throw InputError("SymMatrix: input is not symmetric (asymmetry " + std::to_string(asym) +
                     ")");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::zero(Eigen::Index n) { return SymMatrix(Matrix::Zero(n, n)); }

SymMatrix SymMatrix::identity(Eigen::Index n) { return SymMatrix(Matrix::Identity(n, n)); }

SymMatrix SymMatrix::diagonal(const Vector& d) { return SymMatrix(Matrix(d.asDiagonal())); }

SymMatrix SymMatrix::operator+(const SymMatrix& o) const { return SymMatrix(m_ + o.m_); }

SymMatrix SymMatrix::operator-(const SymMatrix& o) const { return SymMatrix(m_ - o.m_); }

SymMatrix SymMatrix::operator-() const { return SymMatrix(Matrix(-m_)); }

SymMatrix operator*(double s, const SymMatrix& a) { return SymMatrix(Matrix(s * a.m_)); }

double inner(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) {
    throw InputError("inner: dimension mismatch");
  }
  return a.matrix().cwiseProduct(b.matrix()).sum();
}

Matrix EigenDecomposition::reconstruct() const {
  return vectors * values.asDiagonal() * vectors.transpose();
}

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j) s += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(s);
}

}  // namespace

EigenDecomposition symmetric_eigen(const SymMatrix& s) {
  const Eigen::Index n = s.dim();
  Matrix a = s.matrix();
  if (!a.allFinite()) {
    throw InputError("symmetric_eigen: non-finite entries");
  }
  Matrix v = Matrix::Identity(n, n);
  const double scale = a.norm();
  constexpr int kMaxSweeps = 100;

  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    const double off = off_diagonal_norm(a);
    if (off == 0.0 || off <= 1e-15 * scale) break;

    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;

        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }
  if (sweep == kMaxSweeps) {
    throw NumericalError("symmetric_eigen: Jacobi iteration did not converge");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto src = order[static_cast<std::size_t>(k)];
    out.values(k) = a(src, src);
    out.vectors.col(k) = v.col(src);
  }
  return out;
}

double min_eigenvalue(const SymMatrix& s) {
  if (s.dim() == 0) return 0.0;
  return symmetric_eigen(s).values.tail(1)(0);
}

double max_eigenvalue(const SymMatrix& s) {
  if (s.dim() == 0) return 0.0;
  return symmetric_eigen(s).values(0);
}

SymMatrix psd_project(const SymMatrix& s) {
  const auto ed = symmetric_eigen(s);
  if (ed.values.size() == 0 || ed.values.minCoeff() >= 0.0) {
    return s;
  }
  const Vector clipped = ed.values.cwiseMax(0.0);
  return SymMatrix(Matrix(ed.vectors * clipped.asDiagonal() * ed.vectors.transpose()));
}

Matrix cholesky(const SymMatrix& s) {
  const auto ed = symmetric_eigen(s);
  const double lmax = ed.values.size() ? ed.values(0) : 0.0;
  const double lmin = ed.values.size() ? ed.values.tail(1)(0) : 0.0;
  if (!(lmax > 0.0) || !(lmin > 1e-12 * lmax)) {
    throw DefinitenessError("cholesky: matrix is not positive definite (smallest eigenvalue " +
                            std::to_string(lmin) + ")");
  }
  Eigen::LLT<Matrix> llt(s.matrix());
  if (llt.info() != Eigen::Success) {
    throw DefinitenessError("cholesky: factorization failed");
  }
  return llt.matrixL();
}

Matrix psd_factor(const SymMatrix& s) {
  const Eigen::Index n = s.dim();
  if (n == 0) return Matrix(0, 0);
  const auto ed = symmetric_eigen(s);
  const double lmax = ed.values(0);
  const double lmin = ed.values(n - 1);
  if (lmin < -1e-10 * std::max(lmax, 1.0)) {
    throw DefinitenessError("psd_factor: matrix is not positive semidefinite (smallest eigenvalue " +
                            std::to_string(lmin) + ")");
  }
  if (lmax > 0.0 && lmin > 1e-12 * lmax) {
    return cholesky(s);
  }
  const Vector root = ed.values.cwiseMax(0.0).cwiseSqrt();
  return ed.vectors * root.asDiagonal();
}

Matrix expm(const Matrix& x) {
  require_square(x, "expm");
  require_finite(x, "expm");
  const Eigen::Index n = x.rows();
  if (n == 0) return x;

  // Padé(6,6): c_k = c_{k-1} (q - k + 1) / (k (2q - k + 1)).
  constexpr int q = 6;
  double coeff[q + 1];
  coeff[0] = 1.0;
  for (int k = 1; k <= q; ++k) {
    coeff[k] = coeff[k - 1] * (q - k + 1) / (static_cast<double>(k) * (2 * q - k + 1));
  }

  // ‖X/2^s‖₁ ≤ 0.5 keeps the truncation error below 1e-16.
  const double norm1 = x.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  }
  const Matrix xs = x / std::ldexp(1.0, squarings);

  const Matrix eye = Matrix::Identity(n, n);
  Matrix power = eye;
  Matrix num = coeff[0] * eye;
  Matrix den = coeff[0] * eye;
  for (int k = 1; k <= q; ++k) {
    power = power * xs;
    num += coeff[k] * power;
    den += ((k % 2) ? -coeff[k] : coeff[k]) * power;
  }
  Matrix r = den.partialPivLu().solve(num);
  for (int i = 0; i < squarings; ++i) {
    r = r * r;
  }
  return r;
}

Eigen::Index numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rel_tol * sv(0)) ++r;
  }
  return r;
}

double spectral_radius(const Matrix& m) {
  require_square(m, "spectral_radius");
  if (m.rows() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(m, false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("spectral_radius: eigenvalue computation failed");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace lqioc
