#pragma once

#include <Eigen/Dense>

namespace compart_h2 {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// rho(f) >= 1 - kSchurTol is treated as not Schur.
inline constexpr double kSchurTol = 1e-9;

/// Throws DimensionMismatch/InvalidArgument if `m` has a NaN or Inf entry.
void require_finite(const Matrix& m, const char* what);

Matrix kron(const Matrix& a, const Matrix& b);

/// Column-major stacking.
Vector vec(const Matrix& m);

/// Inverse of vec. Throws DimensionMismatch unless v.size() == rows*cols.
Matrix mat(const Vector& v, Index rows, Index cols);

/// Largest eigenvalue modulus of a square matrix (real Hessenberg-QR).
double spectral_radius(const Matrix& m);

struct SymmetricEigen {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // orthogonal, column k pairs with eigenvalues(k)
};

/// Decomposes (m + mᵀ)/2. Rejects inputs that are far from symmetric.
SymmetricEigen sym_eig(const Matrix& m);

// Factors (fᵀ⊗fᵀ − I) once so both discrete Lyapunov forms can be solved
// repeatedly against the same closed loop:
//   solve_transposed(q):  fᵀ P f − P + q = 0
//   solve(q):             f P fᵀ − P + q = 0
// The second system matrix is the transpose of the first, so it reuses the
// same LU factors.
class LyapunovSolver {
 public:
  explicit LyapunovSolver(const Matrix& f);

  Matrix solve_transposed(const Matrix& q) const;
  Matrix solve(const Matrix& q) const;

  const Matrix& closed_loop() const { return f_; }
  double spectral_radius() const { return rho_; }

 private:
  Matrix refine(const Matrix& q, bool transposed, Vector x) const;

  Matrix f_;
  double rho_ = 0.0;
  Eigen::PartialPivLU<Matrix> lu_;
};

/// Residual ‖fᵀPf − P + q‖_F.
double dlyap_T_residual(const Matrix& f, const Matrix& p, const Matrix& q);
/// Residual ‖fPfᵀ − P + q‖_F.
double dlyap_residual(const Matrix& f, const Matrix& p, const Matrix& q);

Matrix solve_dlyap_T(const Matrix& f, const Matrix& q);
Matrix solve_dlyap(const Matrix& f, const Matrix& q);

/// blkdiag(m, ..., m) with `copies` blocks.
Matrix block_diag(const Matrix& m, Index copies);

/// [m | m | ... | m] with `copies` blocks.
Matrix hconcat(const Matrix& m, Index copies);

}  // namespace compart_h2
