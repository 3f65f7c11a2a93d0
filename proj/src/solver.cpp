#include "compart_h2/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "compart_h2/barrier.hpp"
#include "compart_h2/errors.hpp"
#include "compart_h2/h2cost.hpp"

namespace compart_h2 {

namespace {

constexpr double kRepeatTol = 1e-15;

bool repeats(const Gain& prev, const Gain& next) {
  return (next - prev).norm() <= kRepeatTol * (1.0 + next.norm());
}

std::string describe(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

const char* to_string(Method method) noexcept {
  return method == Method::FIPM ? "fipm" : "sipm";
}

void SolverConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) fail(ErrorCode::InvalidArgument, std::string("solver config: ") + what);
  };
  require(t0 > 0.0 && std::isfinite(t0), "t0 must be positive");
  require(mu > 1.0 && std::isfinite(mu), "mu must exceed 1");
  require(eps1 > 0.0, "eps1 must be positive");
  require(eps2 > 0.0, "eps2 must be positive");
  require(eps_r >= 0.0 && std::isfinite(eps_r), "eps_r must be nonnegative");
  require(delta > 0.0 && std::isfinite(delta), "delta must be positive");
  require(armijo_sigma > 0.0 && armijo_sigma < 1.0, "armijo_sigma must lie in (0,1)");
  require(armijo_beta > 0.0 && armijo_beta < 1.0, "armijo_beta must lie in (0,1)");
  require(armijo_s0_fipm > 0.0 && std::isfinite(armijo_s0_fipm), "armijo_s0_fipm must be positive");
  require(max_inner_fipm > 0 && max_inner_sipm > 0, "inner iteration caps must be positive");
  require(max_outer > 0, "max_outer must be positive");
  require(max_backtracks > 0, "max_backtracks must be positive");
  require(threads >= 0, "threads must be nonnegative");
}

int SolveReport::total_inner_iterations() const {
  return std::accumulate(trace.begin(), trace.end(), 0,
                         [](int acc, const OuterRecord& r) { return acc + r.inner_iterations; });
}

LineSearchResult armijo_backtrack(const std::function<std::optional<double>(double)>& phi,
                                  double f0, double decrease, double s_init, double sigma,
                                  double beta, int max_backtracks,
                                  const std::function<bool(double)>& negligible) {
  if (!(decrease > 0.0)) {
    fail(ErrorCode::InvalidArgument, "armijo: direction is not a descent direction");
  }
  double s = s_init;
  for (int b = 0; b <= max_backtracks; ++b) {
    if (negligible && negligible(s)) {
      return {LineSearchResult::Status::Stalled, s, f0, b};
    }
    const std::optional<double> value = phi(s);
    if (value && *value <= f0 - sigma * s * decrease) {
      return {LineSearchResult::Status::Accepted, s, *value, b};
    }
    s *= beta;
  }
  fail(ErrorCode::LineSearchFailed,
       "armijo: no sufficient decrease after " + std::to_string(max_backtracks) +
           " backtracks (last step " + describe(s / beta) + ")");
}

LineSearchResult armijo(const PlantModel& p, const Gain& k, const Matrix& direction,
                        const Vector& vec_grad, double t, double eps_r,
                        const SolverConfig& cfg, double s_init) {
  const std::optional<double> f0 = try_jlbf_value(p, k, t, eps_r);
  if (!f0) fail(ErrorCode::InfeasiblePoint, "armijo: starting gain is outside the relaxed interior");
  const double decrease = vec_grad.dot(vec(direction));
  const double dnorm = direction.norm();
  const double knorm = k.norm();
  return armijo_backtrack(
      [&](double s) { return try_jlbf_value(p, k - s * direction, t, eps_r); }, *f0, decrease,
      s_init, cfg.armijo_sigma, cfg.armijo_beta, cfg.max_backtracks,
      [&](double s) { return s * dnorm <= kRepeatTol * (1.0 + knorm); });
}

Matrix ModifiedHessian::matrix() const {
  const Matrix& q = spectrum.eigenvectors;
  return q * spectrum.eigenvalues.asDiagonal() * q.transpose();
}

Vector ModifiedHessian::solve(const Vector& g) const {
  const Matrix& q = spectrum.eigenvectors;
  return q * (q.transpose() * g).cwiseQuotient(spectrum.eigenvalues);
}

ModifiedHessian modify_hessian_spectrum(const Matrix& h, double delta) {
  if (!(delta > 0.0)) fail(ErrorCode::InvalidArgument, "modify_hessian: delta must be positive");
  ModifiedHessian out{sym_eig(h), 0};
  for (Index i = 0; i < out.spectrum.eigenvalues.size(); ++i) {
    if (out.spectrum.eigenvalues(i) < delta) {
      out.spectrum.eigenvalues(i) = delta;
      ++out.clamped;
    }
  }
  return out;
}

Matrix modify_hessian(const Matrix& h, double delta) {
  const Matrix m = modify_hessian_spectrum(h, delta).matrix();
  return 0.5 * (m + m.transpose());
}

Matrix recover_multiplier(const PlantModel& p, const Gain& k, double t, double eps_r) {
  if (!(t > 0.0)) fail(ErrorCode::InvalidArgument, "recover_multiplier: t must be positive");
  const Matrix slack = constraint_stack(p, k).array() + eps_r;
  if (!(slack.minCoeff() > 0.0)) {
    fail(ErrorCode::InfeasiblePoint, "recover_multiplier: relaxed slack is not positive");
  }
  return slack.cwiseInverse() / t;
}

KktResidual kkt_residual(const PlantModel& p, const Gain& k, const Matrix& q) {
  const Matrix s = constraint_stack(p, k);
  if (q.rows() != s.rows() || q.cols() != s.cols()) {
    fail(ErrorCode::DimensionMismatch, "kkt_residual: multiplier must be (n+1)xn");
  }
  KktResidual r;
  r.dual_feasibility = std::max(0.0, -q.minCoeff());
  r.primal_feasibility = std::max(0.0, -s.minCoeff());
  r.complementarity = std::abs((q.transpose() * s).trace());
  try {
    const CostCache cache = eval_cost(p, k);
    r.stationarity = (grad_J(p, k, cache) - lifted_input(p).transpose() * q).norm();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotSchur && e.code() != ErrorCode::SingularSystem) throw;
    r.stationarity = std::numeric_limits<double>::infinity();
  }
  return r;
}

namespace {

SolveReport run_interior_point(const PlantModel& p, const Gain& k0, Method method,
                               const SolverConfig& cfg) {
  cfg.validate();
  require_gain_shape(p, k0);

  SolveReport report;
  report.method = method;
  const std::vector<Violation> violations = validate_plant(p);
  if (!violations.empty()) {
    if (cfg.enforce_assumptions) {
      std::string what = "plant violates standing assumptions:";
      for (const auto& v : violations) what += " " + v.assumption + " (" + describe(v.residual) + ")";
      fail(ErrorCode::AssumptionViolated, what);
    }
    report.assumption_warnings = violations;
  }

  const double slack0 = min_slack(p, k0);
  if (!(slack0 + cfg.eps_r > 0.0)) {
    fail(ErrorCode::InfeasibleStart,
         "initial gain violates the relaxed constraints (min slack " + describe(slack0) + ")");
  }
  const double rho0 = spectral_radius(p.A - p.B * k0);
  if (!(rho0 < 1.0 - kSchurTol)) {
    fail(ErrorCode::InfeasibleStart,
         "initial closed loop is not Schur (spectral radius " + describe(rho0) + ")");
  }

  const HessianOptions hess{cfg.threads, true};
  const int max_inner = method == Method::FIPM ? cfg.max_inner_fipm : cfg.max_inner_sipm;
  const auto start = std::chrono::steady_clock::now();

  Gain k_outer = k0;
  double t = cfg.t0;
  for (int h = 0; h < cfg.max_outer; ++h) {
    Gain k = k_outer;
    int inner = 0;
    double s_prev = 0.0;
    double grad_norm = 0.0;
    bool grad_current = false;
    while (true) {
      const JlbfEval ev = eval_jlbf(p, k, t, cfg.eps_r,
                                    method == Method::SIPM ? Order::Hessian : Order::Gradient, hess);
      grad_norm = ev.vec_grad.norm();
      grad_current = true;
      if (grad_norm < cfg.eps1) break;
      if (inner >= max_inner) {
        ++report.inner_capped;
        break;
      }

      Matrix direction;
      double s_init = 1.0;
      if (method == Method::FIPM) {
        direction = mat(ev.vec_grad, p.m(), p.n());
        s_init = inner == 0 ? cfg.armijo_s0_fipm : s_prev / cfg.armijo_beta;
      } else {
        const ModifiedHessian hmod = modify_hessian_spectrum(ev.vec_hessian, cfg.delta);
        direction = mat(hmod.solve(ev.vec_grad), p.m(), p.n());
      }
      const double decrease = ev.vec_grad.dot(vec(direction));
      if (!(decrease > 0.0)) break;  // no numerically usable descent left

      const double dnorm = direction.norm();
      const double knorm = k.norm();
      LineSearchResult ls;
      try {
        ls = armijo_backtrack(
            [&](double s) { return try_jlbf_value(p, k - s * direction, t, cfg.eps_r); },
            ev.value, decrease, s_init, cfg.armijo_sigma, cfg.armijo_beta, cfg.max_backtracks,
            [&](double s) { return s * dnorm <= kRepeatTol * (1.0 + knorm); });
      } catch (const Error& e) {
        if (e.code() != ErrorCode::LineSearchFailed) throw;
        fail(ErrorCode::LineSearchFailed,
             std::string(to_string(method)) + " outer " + std::to_string(h) + ", inner " +
                 std::to_string(inner) + ", t=" + describe(t) + ": " + e.what());
      }
      if (ls.status == LineSearchResult::Status::Stalled) break;

      Gain next = k - ls.step * direction;
      ++inner;
      s_prev = ls.step;
      grad_current = false;
      if (cfg.observer) {
        cfg.observer(
            IterateEvent{method, h, inner, t, ls.step, decrease, ev.value, ls.value, &next});
      }
      const bool same = repeats(k, next);
      k = std::move(next);
      if (same) break;
    }
    if (!grad_current) {
      grad_norm = eval_jlbf(p, k, t, cfg.eps_r, Order::Gradient, hess).vec_grad.norm();
    }

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.trace.push_back({t, inner, grad_norm, cost_value(p, k), seconds});
    report.final_t = t;
    report.jlbf_grad_norm = grad_norm;

    const double moved = (k - k_outer).norm();
    k_outer = std::move(k);
    if (moved < cfg.eps2) {
      report.converged = true;
      break;
    }
    t *= cfg.mu;
  }

  report.final_gain = k_outer;
  report.objective = cost_value(p, k_outer);
  report.multiplier = recover_multiplier(p, k_outer, report.final_t, cfg.eps_r);
  report.kkt = kkt_residual(p, k_outer, report.multiplier);
  return report;
}

}  // namespace

SolveReport fipm(const PlantModel& p, const Gain& k0, const SolverConfig& cfg) {
  return run_interior_point(p, k0, Method::FIPM, cfg);
}

SolveReport sipm(const PlantModel& p, const Gain& k0, const SolverConfig& cfg) {
  return run_interior_point(p, k0, Method::SIPM, cfg);
}

SolveReport solve(const PlantModel& p, const Gain& k0, Method method, const SolverConfig& cfg) {
  return run_interior_point(p, k0, method, cfg);
}

}  // namespace compart_h2
