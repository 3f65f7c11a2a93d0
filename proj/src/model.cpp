#include "compart_h2/model.hpp"

#include <sstream>

#include "compart_h2/errors.hpp"

namespace compart_h2 {

namespace {

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

PlantModel PlantModel::make(Matrix A, Matrix B, Matrix C, Matrix D, Matrix G,
                            std::string name) {
  const Index n = A.rows();
  if (n == 0 || A.cols() != n) {
    fail(ErrorCode::DimensionMismatch, "plant: A must be square and non-empty, got " + dims(A));
  }
  if (B.rows() != n || B.cols() == 0) {
    fail(ErrorCode::DimensionMismatch, "plant: B must have " + std::to_string(n) +
                                           " rows and at least one column, got " + dims(B));
  }
  if (C.cols() != n || C.rows() == 0) {
    fail(ErrorCode::DimensionMismatch, "plant: C must have " + std::to_string(n) +
                                           " columns, got " + dims(C));
  }
  if (D.rows() != C.rows() || D.cols() != B.cols()) {
    fail(ErrorCode::DimensionMismatch, "plant: D must be " + std::to_string(C.rows()) + "x" +
                                           std::to_string(B.cols()) + ", got " + dims(D));
  }
  if (G.rows() != n || G.cols() == 0) {
    fail(ErrorCode::DimensionMismatch,
         "plant: G must have " + std::to_string(n) + " rows, got " + dims(G));
  }
  require_finite(A, "plant A");
  require_finite(B, "plant B");
  require_finite(C, "plant C");
  require_finite(D, "plant D");
  require_finite(G, "plant G");
  return PlantModel{std::move(A), std::move(B), std::move(C), std::move(D), std::move(G),
                    std::move(name)};
}

std::vector<Violation> validate_plant(const PlantModel& p) {
  std::vector<Violation> out;
  const double cross = (p.D.transpose() * p.C).norm();
  if (cross > kAssumeTol * (1.0 + p.C.norm() * p.D.norm())) {
    out.push_back({"D^T C != 0", cross});
  }
  const Matrix gram = p.D.transpose() * p.D;
  const double lmin = sym_eig(gram).eigenvalues(0);
  if (!(lmin >= kPdTol)) {
    out.push_back({"D^T D not positive definite", lmin});
  }
  return out;
}

void require_gain_shape(const PlantModel& p, const Gain& k) {
  if (k.rows() != p.m() || k.cols() != p.n()) {
    fail(ErrorCode::DimensionMismatch, "gain must be " + std::to_string(p.m()) + "x" +
                                           std::to_string(p.n()) + ", got " + dims(k));
  }
  require_finite(k, "gain");
}

ClosedLoop closed_loop(const PlantModel& p, const Gain& k) {
  require_gain_shape(p, k);
  return {p.A - p.B * k, p.C - p.D * k};
}

Matrix constraint_stack(const PlantModel& p, const Gain& k) {
  require_gain_shape(p, k);
  const Index n = p.n();
  Matrix s(n + 1, n);
  s.topRows(n) = p.A - p.B * k;
  s.row(n) = Eigen::RowVectorXd::Ones(n) - s.topRows(n).colwise().sum();
  return s;
}

Matrix lifted_input(const PlantModel& p) {
  Matrix lifted(p.n() + 1, p.m());
  lifted.topRows(p.n()) = -p.B;
  lifted.row(p.n()) = p.B.colwise().sum();
  return lifted;
}

double min_slack(const PlantModel& p, const Gain& k) {
  return constraint_stack(p, k).minCoeff();
}

bool is_compartmental(const PlantModel& p, const Gain& k, double tol) {
  return min_slack(p, k) >= -tol;
}

PlantModel replicate(const PlantModel& p, Index copies, ReplicateMode mode) {
  if (copies < 1) fail(ErrorCode::InvalidArgument, "replicate: N must be >= 1");
  const std::string name = p.name.empty() ? std::string() : p.name + "_x" + std::to_string(copies);
  if (mode == ReplicateMode::BlockDiag) {
    return PlantModel::make(block_diag(p.A, copies), block_diag(p.B, copies),
                            block_diag(p.C, copies), block_diag(p.D, copies),
                            block_diag(p.G, copies), name);
  }
  return PlantModel::make(block_diag(p.A, copies), block_diag(p.B, copies),
                          hconcat(p.C, copies), hconcat(p.D, copies),
                          Matrix::Identity(p.n() * copies, p.n() * copies), name);
}

}  // namespace compart_h2
