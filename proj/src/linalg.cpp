#include "layerlq/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "layerlq/error.hpp"
#include "layerlq/kron.hpp"

namespace layerlq {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + " must be square, got " + std::to_string(m.rows()) +
                         "x" + std::to_string(m.cols()));
  }
}

// Orthonormal basis of the part of `block` not already in span(basis).
Matrix deflate(const Matrix& basis, Matrix block, double threshold) {
  if (basis.cols() > 0) {
    // Two passes of classical Gram-Schmidt keep the projection at working precision.
    for (int pass = 0; pass < 2; ++pass) block -= basis * (basis.transpose() * block);
  }
  if (block.cols() == 0) return Matrix(block.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(block, Eigen::ComputeThinU);
  const Vector& sigma = svd.singularValues();
  Index rank = 0;
  while (rank < sigma.size() && sigma(rank) > threshold) ++rank;
  return svd.matrixU().leftCols(rank);
}

}  // namespace

SymmetricEigen eig_sym(const Matrix& s) {
  require_square(s, "eig_sym input");
  const double asym = (s - s.transpose()).norm();
  if (asym > 1e-10 * s.norm()) {
    throw DimensionError("eig_sym input is not symmetric (||S - S^T||_F = " + std::to_string(asym) +
                         ")");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(s));
  return {solver.eigenvectors(), solver.eigenvalues()};
}

Matrix cholesky(const Matrix& f) {
  require_square(f, "cholesky input");
  const Index n = f.rows();
  const double scale = std::max(f.diagonal().cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  Matrix l = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    const double pivot = f(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > 4.0 * n * kEps * scale)) {
      throw NotPositiveDefinite("cholesky pivot " + std::to_string(j) + " is " +
                                std::to_string(pivot) + "; matrix is not positive definite");
    }
    l(j, j) = std::sqrt(pivot);
    for (Index i = j + 1; i < n; ++i) {
      l(i, j) = (f(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }
  return l;
}

Matrix psd_factor(const Matrix& s) {
  const SymmetricEigen e = eig_sym(s);
  const double tol = kPsdTolerance * std::max(e.values.cwiseAbs().maxCoeff(), 1e-300);
  if (e.values(0) < -tol) {
    throw NotPositiveDefinite("psd_factor input has eigenvalue " + std::to_string(e.values(0)));
  }
  std::vector<Index> keep;
  for (Index i = 0; i < e.values.size(); ++i) {
    if (e.values(i) > tol) keep.push_back(i);
  }
  if (keep.empty()) return Matrix::Zero(1, s.cols());
  Matrix f(static_cast<Index>(keep.size()), s.cols());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const Index i = keep[r];
    f.row(static_cast<Index>(r)) = std::sqrt(e.values(i)) * e.vectors.col(i).transpose();
  }
  return f;
}

Matrix sqrt_psd(const Matrix& s) {
  const SymmetricEigen e = eig_sym(s);
  const Vector root = e.values.cwiseMax(0.0).cwiseSqrt();
  return symmetrize(e.vectors * root.asDiagonal() * e.vectors.transpose());
}

double min_eig(const Matrix& s) { return eig_sym(s).values.minCoeff(); }

double max_eig(const Matrix& s) { return eig_sym(s).values.maxCoeff(); }

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

double spectral_abscissa(const Matrix& a) {
  require_square(a, "spectral_abscissa input");
  return Eigen::EigenSolver<Matrix>(a, false).eigenvalues().real().maxCoeff();
}

bool is_psd(const Matrix& s) {
  const Vector ev = eig_sym(s).values;
  const double scale = ev.cwiseAbs().maxCoeff();
  return ev.minCoeff() >= -kPsdTolerance * scale;
}

bool is_pd(const Matrix& s) {
  const Vector ev = eig_sym(s).values;
  const double scale = ev.cwiseAbs().maxCoeff();
  return scale > 0.0 && ev.minCoeff() > kPdTolerance * scale;
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Index controllability_rank(const Matrix& a, const Matrix& b) {
  require_square(a, "controllability_rank: A");
  if (b.rows() != a.rows()) throw DimensionError("controllability_rank: B rows must match A");
  const Index n = a.rows();
  const double scale = std::max({spectral_norm(a), spectral_norm(b), 1e-300});
  const double threshold = n * kEps * scale * 16.0;
  Matrix basis(n, 0);
  Matrix fresh = deflate(basis, b, threshold);
  while (fresh.cols() > 0 && basis.cols() < n) {
    Matrix grown(n, basis.cols() + fresh.cols());
    grown << basis, fresh;
    basis = std::move(grown);
    // Krylov step on normalized directions keeps the growth bounded by ||A||.
    fresh = deflate(basis, a * fresh, threshold);
  }
  return std::min(basis.cols(), n);
}

Index observability_rank(const Matrix& a, const Matrix& c) {
  return controllability_rank(a.transpose(), c.transpose());
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& c) {
  require_square(a, "solve_lyapunov: A");
  if (c.rows() != a.rows() || c.cols() != a.cols()) {
    throw DimensionError("solve_lyapunov: C must match A");
  }
  const Index n = a.rows();
  Eigen::RealSchur<Matrix> schur(a);
  if (schur.info() != Eigen::Success) throw NoStabilizingSolution("real Schur decomposition did not converge");
  const Matrix& t = schur.matrixT();
  const Matrix& u = schur.matrixU();

  // Diagonal blocks of the quasi-triangular factor: 1x1 or 2x2.
  std::vector<Index> start;
  for (Index i = 0; i < n;) {
    start.push_back(i);
    i += (i + 1 < n && t(i + 1, i) != 0.0) ? 2 : 1;
  }
  start.push_back(n);
  const std::size_t blocks = start.size() - 1;

  // T^T Y + Y T = W with Y = U^T X U and W = -U^T C U, solved block by block.
  const Matrix w = -(u.transpose() * c * u);
  Matrix y = Matrix::Zero(n, n);
  const double scale = std::max(t.cwiseAbs().maxCoeff(), 1.0);
  for (std::size_t bj = 0; bj < blocks; ++bj) {
    const Index j0 = start[bj];
    const Index sj = start[bj + 1] - j0;
    for (std::size_t bi = 0; bi < blocks; ++bi) {
      const Index i0 = start[bi];
      const Index si = start[bi + 1] - i0;
      Matrix rhs = w.block(i0, j0, si, sj);
      if (i0 > 0) rhs.noalias() -= t.block(0, i0, i0, si).transpose() * y.block(0, j0, i0, sj);
      if (j0 > 0) rhs.noalias() -= y.block(i0, 0, si, j0) * t.block(0, j0, j0, sj);
      // vec(Tii^T Y + Y Tjj) = (I ⊗ Tii^T + Tjj^T ⊗ I) vec(Y)
      const Matrix tii = t.block(i0, i0, si, si);
      const Matrix tjj = t.block(j0, j0, sj, sj);
      const Matrix op = kron(Matrix::Identity(sj, sj), tii.transpose()) + kron(tjj.transpose(), Matrix::Identity(si, si));
      Eigen::FullPivLU<Matrix> lu(op);
      const double pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
      if (pivot <= 1e3 * kEps * scale) {
        throw NoStabilizingSolution("Lyapunov operator is singular: A and -A share an eigenvalue");
      }
      const Vector sol = lu.solve(Eigen::Map<const Vector>(rhs.data(), rhs.size()));
      y.block(i0, j0, si, sj) = Eigen::Map<const Matrix>(sol.data(), si, sj);
    }
  }
  return symmetrize(u * y * u.transpose());
}

ComplexMatrix ordered_schur_basis(const Matrix& h, Index& stable_count, double axis_tolerance) {
  require_square(h, "ordered_schur_basis input");
  const Index n = h.rows();
  Eigen::ComplexSchur<Matrix> schur(h);
  if (schur.info() != Eigen::Success) {
    throw NoStabilizingSolution("complex Schur decomposition did not converge");
  }
  ComplexMatrix t = schur.matrixT();
  ComplexMatrix u = schur.matrixU();
  for (Index i = 0; i < n; ++i) {
    if (std::abs(t(i, i).real()) <= axis_tolerance) {
      throw NoStabilizingSolution("eigenvalue " + std::to_string(t(i, i).real()) + (t(i, i).imag() >= 0 ? "+" : "") +
                                  std::to_string(t(i, i).imag()) + "i lies on the imaginary axis");
    }
  }
  // Bubble stable eigenvalues to the front with unitary 2x2 swaps. Swapping the
  // adjacent pair (a, b) uses the rotation whose first column is the eigenvector
  // of [[a, t], [0, b]] for b.
  stable_count = 0;
  for (Index i = 0; i < n; ++i) {
    if (t(i, i).real() >= 0) continue;
    for (Index k = i; k > stable_count; --k) {
      const Index p = k - 1;
      const std::complex<double> a = t(p, p);
      const std::complex<double> b = t(k, k);
      const std::complex<double> v1 = t(p, k);
      const std::complex<double> v2 = b - a;
      const double norm = std::hypot(std::abs(v1), std::abs(v2));
      Eigen::Matrix2cd g;
      if (norm == 0.0) {
        g << 0.0, 1.0, 1.0, 0.0;
      } else {
        const std::complex<double> c1 = v1 / norm;
        const std::complex<double> c2 = v2 / norm;
        g << c1, -std::conj(c2), c2, std::conj(c1);
      }
      t.middleRows(p, 2) = g.adjoint() * t.middleRows(p, 2);
      t.middleCols(p, 2) = t.middleCols(p, 2) * g;
      u.middleCols(p, 2) = u.middleCols(p, 2) * g;
      t(k, p) = 0.0;
    }
    ++stable_count;
  }
  return u;
}

}  // namespace layerlq
