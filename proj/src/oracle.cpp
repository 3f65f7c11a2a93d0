#include "compart_h2/oracle.hpp"

#include <cmath>

#include "compart_h2/errors.hpp"

namespace compart_h2::oracle {

namespace {

template <typename F>
auto five_point(const F& f, const Gain& k, Index r, Index c, double h) {
  const double step = h * (1.0 + std::abs(k(r, c)));
  Gain probe = k;
  probe(r, c) = k(r, c) + 2.0 * step;
  auto fp2 = f(probe);
  probe(r, c) = k(r, c) + step;
  auto fp1 = f(probe);
  probe(r, c) = k(r, c) - step;
  auto fm1 = f(probe);
  probe(r, c) = k(r, c) - 2.0 * step;
  auto fm2 = f(probe);
  // Evaluate before the locals die; Eigen would otherwise return a lazy expression.
  return decltype(fp2)((fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * step));
}

}  // namespace

Matrix fd_gradient(const ScalarField& f, const Gain& k, double h) {
  Matrix g(k.rows(), k.cols());
  for (Index c = 0; c < k.cols(); ++c) {
    for (Index r = 0; r < k.rows(); ++r) g(r, c) = five_point(f, k, r, c, h);
  }
  return g;
}

Matrix fd_jacobian(const VectorField& g, const Gain& k, double h, bool symmetrize) {
  const Index dim = k.size();
  Matrix jac;
  for (Index c = 0; c < k.cols(); ++c) {
    for (Index r = 0; r < k.rows(); ++r) {
      const Vector col = five_point(g, k, r, c, h);
      if (jac.size() == 0) jac.resize(col.size(), dim);
      jac.col(r + c * k.rows()) = col;
    }
  }
  if (symmetrize && jac.rows() == jac.cols()) jac = 0.5 * (jac + jac.transpose());
  return jac;
}

double truncated_h2(const PlantModel& p, const Gain& k, double tol) {
  const ClosedLoop cl = closed_loop(p, k);
  const double rho = spectral_radius(cl.A_K);
  if (!(rho < 1.0 - kSchurTol)) fail(ErrorCode::NotSchur, "truncated_h2: closed loop is not Schur");

  // T from the geometric bound ρ^{2T} < tol.
  const long horizon =
      rho == 0.0 ? 1 : static_cast<long>(std::ceil(std::log(tol) / (2.0 * std::log(rho)))) + 1;
  Matrix term = cl.C_K;  // C_K A_Kᵏ, propagated from the left
  double sum = 0.0;
  for (long step = 0;; ++step) {
    const double add = (term * p.G).squaredNorm();
    sum += add;
    if (step >= horizon && add <= tol * std::max(1.0, sum)) break;
    if (step > 50'000'000) fail(ErrorCode::IterationDiverged, "truncated_h2: series did not settle");
    term = term * cl.A_K;
  }
  return sum;
}

Gain riccati_gain(const PlantModel& p, int max_iterations, double tol) {
  const Matrix& A = p.A;
  const Matrix& B = p.B;
  const Matrix q = p.C.transpose() * p.C;
  const Matrix r = p.D.transpose() * p.D;
  Matrix x = q;
  for (int it = 0; it < max_iterations; ++it) {
    const Matrix btx = B.transpose() * x;
    const Matrix gain = (r + btx * B).ldlt().solve(btx * A);
    Matrix next = q + A.transpose() * x * A - A.transpose() * x * B * gain;
    next = 0.5 * (next + next.transpose());
    if (!next.allFinite()) break;
    const double change = (next - x).norm();
    x = std::move(next);
    if (change <= tol * std::max(1.0, x.norm())) {
      const Matrix btx_final = B.transpose() * x;
      return (r + btx_final * B).ldlt().solve(btx_final * A);
    }
  }
  fail(ErrorCode::IterationDiverged, "riccati_gain: fixed-point iteration did not converge");
}

double relative_error(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorCode::DimensionMismatch, "relative_error: shape mismatch");
  }
  if (a.size() == 0) return 0.0;
  const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-12);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace compart_h2::oracle
