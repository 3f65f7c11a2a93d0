#include "compart_h2/barrier.hpp"

#include <cmath>
#include <sstream>

#include "compart_h2/errors.hpp"

namespace compart_h2 {

namespace {

void require_barrier_weight(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    fail(ErrorCode::InvalidArgument, "barrier weight t must be positive and finite");
  }
}

}  // namespace

BarrierEval eval_lbf(const PlantModel& p, const Gain& k, double t, double eps_r,
                     bool with_hessian) {
  require_barrier_weight(t);
  BarrierEval out;
  out.slack = constraint_stack(p, k).array() + eps_r;
  Index row = 0;
  Index col = 0;
  const double smallest = out.slack.minCoeff(&row, &col);
  if (!(smallest > 0.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "relaxed slack " << smallest << " at (" << row << "," << col << ") is not positive";
    fail(ErrorCode::InfeasiblePoint, os.str());
  }

  const Matrix lifted = lifted_input(p);
  const Matrix inv = out.slack.cwiseInverse();
  out.value = -out.slack.array().log().sum() / t;
  out.grad_matrix = -(lifted.transpose() * inv) / t;

  const Matrix kron_lift = kron(Matrix::Identity(p.n(), p.n()), lifted);
  const Vector s = vec(out.slack);
  out.vec_grad = -(kron_lift.transpose() * s.cwiseInverse()) / t;
  if (with_hessian) {
    const Vector w = s.cwiseInverse().cwiseAbs2();
    out.vec_hessian = kron_lift.transpose() * w.asDiagonal() * kron_lift / t;
    out.vec_hessian = 0.5 * (out.vec_hessian + out.vec_hessian.transpose());
  }
  return out;
}

JlbfEval eval_jlbf(const PlantModel& p, const Gain& k, double t, double eps_r, Order order,
                   const HessianOptions& hessian) {
  JlbfEval out;
  out.barrier = eval_lbf(p, k, t, eps_r, order == Order::Hessian);
  out.cost = eval_cost(p, k);
  out.value = out.cost.J + out.barrier.value;
  if (order == Order::Value) return out;
  out.vec_grad = vec_grad_J(p, k, out.cost) + out.barrier.vec_grad;
  if (order == Order::Hessian) {
    out.vec_hessian = hessian_J(p, k, out.cost, hessian) + out.barrier.vec_hessian;
  }
  return out;
}

std::optional<double> try_jlbf_value(const PlantModel& p, const Gain& k, double t,
                                     double eps_r) {
  require_barrier_weight(t);
  if (!k.allFinite()) return std::nullopt;
  const Matrix slack = constraint_stack(p, k).array() + eps_r;
  if (!(slack.minCoeff() > 0.0)) return std::nullopt;
  try {
    const double j = cost_value(p, k);
    if (!std::isfinite(j)) return std::nullopt;
    return j - slack.array().log().sum() / t;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotSchur || e.code() == ErrorCode::SingularSystem) {
      return std::nullopt;
    }
    throw;
  }
}

}  // namespace compart_h2
