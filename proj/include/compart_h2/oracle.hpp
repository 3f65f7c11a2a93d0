#pragma once

#include <functional>

#include "compart_h2/linalg.hpp"
#include "compart_h2/model.hpp"

namespace compart_h2::oracle {

// Independent reference computations. None of these route through the
// analytic derivative or Lyapunov code they are used to check.

using ScalarField = std::function<double(const Gain&)>;
using VectorField = std::function<Vector(const Gain&)>;

inline constexpr double kGradientStep = 1e-5;
inline constexpr double kHessianStep = 1e-4;

/// 5-point central differences, per-entry step h·(1 + |K_ij|).
Matrix fd_gradient(const ScalarField& f, const Gain& k, double h = kGradientStep);

/// Column c = 5-point derivative of g along vec(K)_c.
Matrix fd_jacobian(const VectorField& g, const Gain& k, double h = kHessianStep,
                   bool symmetrize = false);

/// Σ_{k=0}^{T} ‖C_K A_Kᵏ G‖_F², summed until ρ(A_K)^{2k} < tol and the last
/// term is below tol relative to the running sum. Throws NotSchur.
double truncated_h2(const PlantModel& p, const Gain& k, double tol = 1e-14);

/// Unconstrained H₂ (LQR) gain from fixed-point iteration of the discrete
/// Riccati map. Throws IterationDiverged when the iteration fails to settle.
Gain riccati_gain(const PlantModel& p, int max_iterations = 200000, double tol = 1e-12);

/// max|a − b| / max(max|b|, 1e-12).
double relative_error(const Matrix& a, const Matrix& b);

}  // namespace compart_h2::oracle
