#include "compart_h2/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "compart_h2/errors.hpp"

namespace compart_h2 {

namespace {

std::string shape(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    fail(ErrorCode::DimensionMismatch,
         std::string(what) + ": expected a square matrix, got " + shape(m));
  }
}

}  // namespace

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotSchur: return "NotSchur";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::InfeasiblePoint: return "InfeasiblePoint";
    case ErrorCode::InfeasibleStart: return "InfeasibleStart";
    case ErrorCode::LineSearchFailed: return "LineSearchFailed";
    case ErrorCode::PhaseOneFailed: return "PhaseOneFailed";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::IterationDiverged: return "IterationDiverged";
  }
  return "Unknown";
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    fail(ErrorCode::InvalidArgument, std::string(what) + ": non-finite entry");
  }
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix mat(const Vector& v, Index rows, Index cols) {
  if (rows < 0 || cols < 0 || v.size() != rows * cols) {
    std::ostringstream os;
    os << "mat: vector of length " << v.size() << " cannot be reshaped to "
       << rows << "x" << cols;
    fail(ErrorCode::DimensionMismatch, os.str());
  }
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

double spectral_radius(const Matrix& m) {
  require_square(m, "spectral_radius");
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    fail(ErrorCode::EigenFailure, "spectral_radius: eigenvalue iteration failed");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

SymmetricEigen sym_eig(const Matrix& m) {
  require_square(m, "sym_eig");
  const double asym = (m - m.transpose()).norm();
  if (asym > 1e-8 * std::max(m.norm(), std::numeric_limits<double>::min())) {
    fail(ErrorCode::InvalidArgument, "sym_eig: input is not symmetric");
  }
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) {
    fail(ErrorCode::EigenFailure, "sym_eig: eigenvalue iteration did not converge");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

LyapunovSolver::LyapunovSolver(const Matrix& f) : f_(f) {
  require_square(f, "LyapunovSolver");
  require_finite(f, "LyapunovSolver");
  rho_ = compart_h2::spectral_radius(f);
  if (!(rho_ < 1.0 - kSchurTol)) {
    std::ostringstream os;
    os.precision(17);
    os << "closed loop is not Schur stable (spectral radius " << rho_ << ")";
    fail(ErrorCode::NotSchur, os.str());
  }
  const Index n = f.rows();
  Matrix system = kron(f.transpose(), f.transpose());
  system.diagonal().array() -= 1.0;
  lu_.compute(system);
  if (!(lu_.rcond() > 1e3 * std::numeric_limits<double>::epsilon())) {
    fail(ErrorCode::SingularSystem,
         "Kronecker Lyapunov system is numerically singular (n=" +
             std::to_string(n) + ")");
  }
}

Matrix LyapunovSolver::refine(const Matrix& q, bool transposed, Vector x) const {
  const Index n = f_.rows();
  const double scale = std::max(1.0, q.norm());
  for (int pass = 0; pass < 2; ++pass) {
    const Matrix p = mat(x, n, n);
    const Matrix r = transposed ? Matrix(f_.transpose() * p * f_ - p + q)
                                : Matrix(f_ * p * f_.transpose() - p + q);
    if (r.norm() <= 1e-13 * scale) break;
    const Vector rv = vec(r);
    // (system) dx = -r, same sign convention as the primary solve.
    x += transposed ? Vector(lu_.solve(-rv)) : Vector(lu_.transpose().solve(-rv));
  }
  return mat(x, n, n);
}

Matrix LyapunovSolver::solve_transposed(const Matrix& q) const {
  const Index n = f_.rows();
  if (q.rows() != n || q.cols() != n) {
    fail(ErrorCode::DimensionMismatch, "solve_dlyap_T: q must be " +
                                           shape(f_) + ", got " + shape(q));
  }
  Vector x = lu_.solve(-vec(q));
  return refine(q, true, std::move(x));
}

Matrix LyapunovSolver::solve(const Matrix& q) const {
  const Index n = f_.rows();
  if (q.rows() != n || q.cols() != n) {
    fail(ErrorCode::DimensionMismatch,
         "solve_dlyap: q must be " + shape(f_) + ", got " + shape(q));
  }
  Vector x = lu_.transpose().solve(-vec(q));
  return refine(q, false, std::move(x));
}

double dlyap_T_residual(const Matrix& f, const Matrix& p, const Matrix& q) {
  return (f.transpose() * p * f - p + q).norm();
}

double dlyap_residual(const Matrix& f, const Matrix& p, const Matrix& q) {
  return (f * p * f.transpose() - p + q).norm();
}

Matrix solve_dlyap_T(const Matrix& f, const Matrix& q) {
  return LyapunovSolver(f).solve_transposed(q);
}

Matrix solve_dlyap(const Matrix& f, const Matrix& q) {
  return LyapunovSolver(f).solve(q);
}

Matrix block_diag(const Matrix& m, Index copies) {
  Matrix out = Matrix::Zero(m.rows() * copies, m.cols() * copies);
  for (Index k = 0; k < copies; ++k) {
    out.block(k * m.rows(), k * m.cols(), m.rows(), m.cols()) = m;
  }
  return out;
}

Matrix hconcat(const Matrix& m, Index copies) {
  Matrix out(m.rows(), m.cols() * copies);
  for (Index k = 0; k < copies; ++k) out.middleCols(k * m.cols(), m.cols()) = m;
  return out;
}

}  // namespace compart_h2
