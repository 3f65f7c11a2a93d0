#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "compart_h2/linalg.hpp"
#include "compart_h2/model.hpp"

namespace compart_h2 {

enum class Method { FIPM, SIPM };

const char* to_string(Method method) noexcept;

/// Emitted after every accepted inner step.
struct IterateEvent {
  Method method;
  int outer;              // 0-based outer index h
  int inner;              // 1-based count of accepted steps within this outer pass
  double t;
  double step;            // accepted Armijo step s
  double decrease;        // ⟨G_JLBF, vec(direction)⟩ before the step
  double value_before;    // JLBF(K̂⁽ᵏ⁾, t)
  double value_after;     // JLBF(K̂⁽ᵏ⁺¹⁾, t)
  const Gain* gain;       // K̂⁽ᵏ⁺¹⁾, valid only during the callback
};

struct SolverConfig {
  double t0 = 1.0;
  double mu = 4.0;
  double eps1 = 1e-5;
  double eps2 = 1e-5;
  double eps_r = 1e-9;
  double delta = 1e-9;
  double armijo_sigma = 1e-4;
  double armijo_beta = 0.5;
  double armijo_s0_fipm = 1.0;
  int max_inner_fipm = 50000;
  int max_inner_sipm = 200;
  int max_outer = 60;
  int max_backtracks = 60;
  int threads = 1;  // Hessian column workers, 0 = auto
  // When false, standing-assumption violations become report warnings.
  bool enforce_assumptions = true;
  std::function<void(const IterateEvent&)> observer;

  /// Throws InvalidArgument on out-of-range fields.
  void validate() const;
};

struct OuterRecord {
  double t;
  int inner_iterations;
  double grad_norm;  // ‖G_JLBF‖ at the end of the inner loop
  double J;
  double cumulative_seconds;
};

struct KktResidual {
  double stationarity = 0.0;        // ‖∇J − B̄ᵀQ‖_F
  double dual_feasibility = 0.0;    // max(0, −min Q)
  double primal_feasibility = 0.0;  // max(0, −min_slack)
  double complementarity = 0.0;     // |Tr(QᵀS(K))|
};

struct SolveReport {
  Method method = Method::FIPM;
  Gain final_gain;
  double objective = 0.0;       // J, barrier free
  double final_t = 0.0;         // barrier weight of the last inner loop
  double jlbf_grad_norm = 0.0;  // at (final_gain, final_t)
  Matrix multiplier;            // (n+1)×n
  KktResidual kkt;
  std::vector<OuterRecord> trace;
  bool converged = false;
  int inner_capped = 0;         // outer passes that hit the inner cap
  std::vector<Violation> assumption_warnings;

  int total_inner_iterations() const;
};

// ---- line search ---------------------------------------------------------

struct LineSearchResult {
  enum class Status { Accepted, Stalled };
  Status status = Status::Accepted;
  double step = 0.0;
  double value = 0.0;
  int backtracks = 0;
};

// Backtracks s = s_init·βᵏ until phi(s) ≤ f0 − σ·s·decrease, where phi(s) is
// the objective at K − s·d and decrease = ⟨∇f(K), d⟩ > 0. phi returns nullopt
// outside the domain; such trials count as failed decrease. Returns Stalled
// when `negligible(s)` reports that the move no longer changes K; throws
// LineSearchFailed after max_backtracks otherwise.
LineSearchResult armijo_backtrack(const std::function<std::optional<double>(double)>& phi,
                                  double f0, double decrease, double s_init, double sigma,
                                  double beta, int max_backtracks,
                                  const std::function<bool(double)>& negligible);

/// Armijo on JLBF(·, t) along −direction from a relaxed-feasible k.
LineSearchResult armijo(const PlantModel& p, const Gain& k, const Matrix& direction,
                        const Vector& vec_grad, double t, double eps_r,
                        const SolverConfig& cfg, double s_init);

// ---- Hessian modification ------------------------------------------------

/// Spectral decomposition with every eigenvalue below delta raised to delta.
struct ModifiedHessian {
  SymmetricEigen spectrum;  // clamped eigenvalues
  int clamped = 0;

  Matrix matrix() const;
  /// H_mod⁻¹ g via the spectral factors.
  Vector solve(const Vector& g) const;
};

ModifiedHessian modify_hessian_spectrum(const Matrix& h, double delta);

Matrix modify_hessian(const Matrix& h, double delta);

// ---- optimality ----------------------------------------------------------

/// Q = (1/t)·(S(K) + eps_r)^∘−1.
Matrix recover_multiplier(const PlantModel& p, const Gain& k, double t, double eps_r);

/// Stationarity is +inf when A − BK is not Schur (∇J undefined).
KktResidual kkt_residual(const PlantModel& p, const Gain& k, const Matrix& q);

// ---- interior-point methods ---------------------------------------------

SolveReport fipm(const PlantModel& p, const Gain& k0, const SolverConfig& cfg);
SolveReport sipm(const PlantModel& p, const Gain& k0, const SolverConfig& cfg);
SolveReport solve(const PlantModel& p, const Gain& k0, Method method, const SolverConfig& cfg);

}  // namespace compart_h2
