#pragma once

#include "compart_h2/linalg.hpp"
#include "compart_h2/model.hpp"

namespace compart_h2 {

// Gramians of the closed loop at a fixed gain:
//   A_Kᵀ X A_K − X + C_KᵀC_K = 0     (observability type)
//   A_K Y A_Kᵀ − Y + G Gᵀ    = 0     (controllability type, Y ⪰ 0)
// and J = Tr(Gᵀ X G).
struct CostCache {
  Matrix X;
  Matrix Y;
  double J = 0.0;
};

/// Throws NotSchur when A − BK is not Schur stable.
CostCache eval_cost(const PlantModel& p, const Gain& k);

/// J alone; one Lyapunov solve instead of two.
double cost_value(const PlantModel& p, const Gain& k);

/// ∇J = −2(BᵀX A_K − DᵀDK)Y. The leading minus pairs with Y ⪰ 0; see
/// README "Sign conventions".
Matrix grad_J(const PlantModel& p, const Gain& k, const CostCache& cache);

Vector vec_grad_J(const PlantModel& p, const Gain& k, const CostCache& cache);

// Auxiliary Lyapunov solutions for the gain entry (i, j), with S = e_i e_jᵀ,
// ΓP = A_KᵀPA_K − P and Γ*P = A_K P A_Kᵀ − P:
//   ΓX_ij  = −A_Kᵀ X B S
//   Γ*Y_ij = −A_K Y Sᵀ Bᵀ
//   ΓZ_ij  = −Kᵀ DᵀD S
struct HessianTerms {
  Matrix X_ij;
  Matrix Y_ij;
  Matrix Z_ij;
};

/// (i, j) are 0-based.
HessianTerms hessian_terms(const PlantModel& p, const Gain& k, const CostCache& cache,
                           Index i, Index j);

/// ∂/∂K_ij of ∇J as an m×n matrix. (i, j) are 0-based.
Matrix hessian_block(const PlantModel& p, const Gain& k, const CostCache& cache, Index i,
                     Index j);

struct HessianOptions {
  int threads = 1;  // 0 = hardware concurrency
  bool symmetrize = true;
};

/// (mn)×(mn) Hessian of J in vec(K) coordinates; column c = i + j·m holds
/// vec(hessian_block(i, j)).
Matrix hessian_J(const PlantModel& p, const Gain& k, const CostCache& cache,
                 const HessianOptions& options = {});

/// Value of COMPART_H2_THREADS (0 = auto); 1 when unset or malformed.
int hessian_threads_from_env();

}  // namespace compart_h2
