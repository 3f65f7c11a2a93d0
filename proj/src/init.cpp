#include "compart_h2/init.hpp"

#include <cmath>
#include <sstream>

#include "compart_h2/errors.hpp"

namespace compart_h2 {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Returns φ_β and fills the softmax weights of −β·S.
double smoothed(const Matrix& s, double beta, Matrix* weights) {
  const double lo = s.minCoeff();
  const Matrix e = (-beta * (s.array() - lo)).exp().matrix();
  const double total = e.sum();
  if (weights != nullptr) *weights = e / total;
  return lo - std::log(total) / beta;
}

}  // namespace

Gain rank_one_gain(const std::vector<Vector>& vs) {
  if (vs.empty()) fail(ErrorCode::DimensionMismatch, "rank_one_gain: need at least one vector");
  const Index m = vs.front().size();
  if (m == 0) fail(ErrorCode::DimensionMismatch, "rank_one_gain: vectors must be non-empty");
  Gain k(m, static_cast<Index>(vs.size()));
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (vs[i].size() != m) {
      fail(ErrorCode::DimensionMismatch, "rank_one_gain: vector " + std::to_string(i) +
                                             " has length " + std::to_string(vs[i].size()) +
                                             ", expected " + std::to_string(m));
    }
    k.col(static_cast<Index>(i)) = vs[i];
  }
  require_finite(k, "rank_one_gain");
  return k;
}

double smoothed_min_slack(const PlantModel& p, const Gain& k, double beta) {
  if (!(beta > 0.0)) fail(ErrorCode::InvalidArgument, "smoothed_min_slack: beta must be positive");
  return smoothed(constraint_stack(p, k), beta, nullptr);
}

Phase1Result phase1_search(const PlantModel& p, const Gain& k_start,
                           const Phase1Options& options) {
  require_gain_shape(p, k_start);
  if (!(options.target_slack > 0.0)) {
    fail(ErrorCode::InvalidArgument, "phase1: target_slack must be positive");
  }
  const Matrix lifted = lifted_input(p);
  Phase1Result best{k_start, min_slack(p, k_start), false};
  if (best.slack >= options.target_slack) {
    best.reached = true;
    return best;
  }

  constexpr double kSigma = 1e-4;
  Gain k = k_start;
  for (const double beta : options.beta_schedule) {
    if (!(beta > 0.0)) fail(ErrorCode::InvalidArgument, "phase1: beta must be positive");
    double step = 1.0;
    for (int it = 0; it < options.max_iterations_per_stage; ++it) {
      Matrix w;
      const double phi = smoothed(constraint_stack(p, k), beta, &w);
      const Matrix grad = lifted.transpose() * w;
      const double g2 = grad.squaredNorm();
      if (!(g2 > 1e-24)) break;

      // Armijo ascent, warm-started from the previous accepted step.
      double s = step * 2.0;
      bool accepted = false;
      for (int b = 0; b < 60; ++b, s *= 0.5) {
        const double trial = smoothed(constraint_stack(p, k + s * grad), beta, nullptr);
        if (trial >= phi + kSigma * s * g2) {
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
      k += s * grad;
      step = s;

      const double slack = min_slack(p, k);
      if (slack > best.slack) {
        best.gain = k;
        best.slack = slack;
      }
      if (slack >= options.target_slack) {
        best.reached = true;
        return best;
      }
    }
  }
  return best;
}

Gain phase1(const PlantModel& p, const Gain& k_start, const Phase1Options& options) {
  Phase1Result r = phase1_search(p, k_start, options);
  if (!r.reached) {
    fail(ErrorCode::PhaseOneFailed, "phase1: best min slack " + num(r.slack) +
                                        " is below the target " + num(options.target_slack));
  }
  return std::move(r.gain);
}

StartCheck check_start(const PlantModel& p, const Gain& k) {
  StartCheck out;
  const Matrix s = constraint_stack(p, k);
  out.min_slack = s.minCoeff(&out.worst_row, &out.worst_col);
  out.spectral_radius = spectral_radius(p.A - p.B * k);
  if (!(out.min_slack > 0.0)) {
    const bool column_sum = out.worst_row == p.n();
    std::ostringstream os;
    os << "not strictly feasible: ";
    if (column_sum) {
      os << "column " << out.worst_col << " of A-BK has residual capacity " << num(out.min_slack);
    } else {
      os << "entry (" << out.worst_row << "," << out.worst_col << ") of A-BK is "
         << num(out.min_slack);
    }
    out.reasons.push_back(os.str());
  }
  if (!(out.spectral_radius < 1.0 - kSchurTol)) {
    out.reasons.push_back("A-BK is not Schur: spectral radius " + num(out.spectral_radius));
  }
  out.ok = out.reasons.empty();
  return out;
}

}  // namespace compart_h2
