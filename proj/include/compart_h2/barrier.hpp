#pragma once

#include <optional>

#include "compart_h2/h2cost.hpp"
#include "compart_h2/linalg.hpp"
#include "compart_h2/model.hpp"

namespace compart_h2 {

// Log-barrier term LBF(K, t) = −(1/t)·Σ log(S(K)_ij + eps_r) and its
// derivatives. With B̄ = lifted_input(p) and s = vec(S(K) + eps_r):
//   grad_matrix = −(1/t)·B̄ᵀ (S + eps_r)^∘−1
//   vec_grad    = −(1/t)·(I_n ⊗ B̄)ᵀ s^∘−1
//   vec_hessian =  (1/t)·(I_n ⊗ B̄)ᵀ diag(s^∘−2) (I_n ⊗ B̄)
struct BarrierEval {
  double value = 0.0;
  Matrix grad_matrix;
  Vector vec_grad;
  Matrix vec_hessian;  // empty unless requested
  Matrix slack;        // S(K) + eps_r
};

/// Throws InfeasiblePoint if some relaxed slack is not positive.
BarrierEval eval_lbf(const PlantModel& p, const Gain& k, double t, double eps_r,
                     bool with_hessian = true);

enum class Order { Value, Gradient, Hessian };

struct JlbfEval {
  double value = 0.0;
  Vector vec_grad;     // G_JLBF
  Matrix vec_hessian;  // H_JLBF, empty below Order::Hessian
  CostCache cost;
  BarrierEval barrier;
};

/// J + LBF up to the requested derivative order.
JlbfEval eval_jlbf(const PlantModel& p, const Gain& k, double t, double eps_r,
                   Order order = Order::Hessian, const HessianOptions& hessian = {});

/// JLBF value, or nullopt when k lies outside the relaxed interior or A − BK
/// is not Schur. Never throws for those two conditions.
std::optional<double> try_jlbf_value(const PlantModel& p, const Gain& k, double t,
                                     double eps_r);

}  // namespace compart_h2
