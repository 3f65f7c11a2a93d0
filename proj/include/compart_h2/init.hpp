#pragma once

#include <string>
#include <vector>

#include "compart_h2/linalg.hpp"
#include "compart_h2/model.hpp"

namespace compart_h2 {

/// K = Σᵢ vᵢ eᵢᵀ: column i of K is vs[i].
Gain rank_one_gain(const std::vector<Vector>& vs);

struct Phase1Options {
  double target_slack = 1e-3;
  std::vector<double> beta_schedule{1.0, 10.0, 100.0, 1000.0};
  int max_iterations_per_stage = 5000;
};

struct Phase1Result {
  Gain gain;
  double slack = 0.0;  // min_slack(p, gain)
  bool reached = false;
};

/// Smoothed min-slack φ_β(K) = −(1/β)·log Σ exp(−β·S(K)_ij).
double smoothed_min_slack(const PlantModel& p, const Gain& k, double beta);

/// Gradient ascent on φ_β over the beta schedule. Never throws for an empty
/// interior; `reached` tells whether target_slack was attained.
Phase1Result phase1_search(const PlantModel& p, const Gain& k_start,
                           const Phase1Options& options = {});

/// Like phase1_search, but throws PhaseOneFailed (with the best slack found)
/// when the target is not reached.
Gain phase1(const PlantModel& p, const Gain& k_start, const Phase1Options& options = {});

struct StartCheck {
  bool ok = false;
  double min_slack = 0.0;
  double spectral_radius = 0.0;
  Index worst_row = 0;  // argmin of the constraint stack
  Index worst_col = 0;
  std::vector<std::string> reasons;
};

/// Strict feasibility (no eps_r relaxation) and Schur stability.
StartCheck check_start(const PlantModel& p, const Gain& k);

}  // namespace compart_h2
