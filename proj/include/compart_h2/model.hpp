#pragma once

#include <string>
#include <vector>

#include "compart_h2/linalg.hpp"

namespace compart_h2 {

// Standing-assumption tolerances.
inline constexpr double kAssumeTol = 1e-9;
inline constexpr double kPdTol = 1e-12;

/// Discrete-time plant x⁺ = Ax + Bu + Gd, y = Cx + Du.
struct PlantModel {
  Matrix A;  // n×n
  Matrix B;  // n×m
  Matrix C;  // r×n
  Matrix D;  // r×m
  Matrix G;  // n×q
  std::string name;

  /// Checks dimensional consistency and finiteness; throws DimensionMismatch.
  static PlantModel make(Matrix A, Matrix B, Matrix C, Matrix D, Matrix G,
                         std::string name = {});

  Index n() const { return A.rows(); }
  Index m() const { return B.cols(); }
  Index r() const { return C.rows(); }
  Index q() const { return G.cols(); }
};

/// Feedback gain for u = −Kx (m×n).
using Gain = Matrix;

struct ClosedLoop {
  Matrix A_K;  // A − BK
  Matrix C_K;  // C − DK
};

struct Violation {
  std::string assumption;
  double residual;
};

std::vector<Violation> validate_plant(const PlantModel& p);

void require_gain_shape(const PlantModel& p, const Gain& k);

ClosedLoop closed_loop(const PlantModel& p, const Gain& k);

/// (n+1)×n stack [A_K; 1ᵀ − 1ᵀA_K]. Every column of it sums to one.
Matrix constraint_stack(const PlantModel& p, const Gain& k);

/// [−B; 1ᵀB], so constraint_stack(p, k) = constraint_stack(p, 0) + lifted_input(p)·k.
Matrix lifted_input(const PlantModel& p);

double min_slack(const PlantModel& p, const Gain& k);

bool is_compartmental(const PlantModel& p, const Gain& k, double tol);

enum class ReplicateMode { BlockDiag, PaperConcat };

/// N decoupled copies of `p`. PaperConcat concatenates C and D horizontally
/// and uses G = I of the replicated state, which breaks DᵀD ≻ 0 for N ≥ 2.
PlantModel replicate(const PlantModel& p, Index copies, ReplicateMode mode);

}  // namespace compart_h2
