#include "compart_h2/compart_h2.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <new>
#include <string>

#include "compart_h2/barrier.hpp"
#include "compart_h2/errors.hpp"
#include "compart_h2/h2cost.hpp"
#include "compart_h2/init.hpp"
#include "compart_h2/model.hpp"
#include "compart_h2/oracle.hpp"
#include "compart_h2/solver.hpp"

struct ch2_plant {
  compart_h2::PlantModel model;
};

struct ch2_report {
  compart_h2::SolveReport report;
};

namespace {

using compart_h2::ErrorCode;
using compart_h2::Gain;
using compart_h2::Index;
using compart_h2::Matrix;
using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

thread_local std::string g_last_error;

ch2_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return CH2_INVALID_ARGUMENT;
    case ErrorCode::DimensionMismatch: return CH2_DIMENSION_MISMATCH;
    case ErrorCode::NotSchur: return CH2_NOT_SCHUR;
    case ErrorCode::SingularSystem: return CH2_SINGULAR_SYSTEM;
    case ErrorCode::EigenFailure: return CH2_EIGEN_FAILURE;
    case ErrorCode::InfeasiblePoint: return CH2_INFEASIBLE_POINT;
    case ErrorCode::InfeasibleStart: return CH2_INFEASIBLE_START;
    case ErrorCode::LineSearchFailed: return CH2_LINE_SEARCH_FAILED;
    case ErrorCode::PhaseOneFailed: return CH2_PHASE_ONE_FAILED;
    case ErrorCode::AssumptionViolated: return CH2_ASSUMPTION_VIOLATED;
    case ErrorCode::IterationDiverged: return CH2_ITERATION_DIVERGED;
  }
  return CH2_INTERNAL_ERROR;
}

ch2_status set_error(ch2_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
ch2_status guarded(F&& body) {
  try {
    body();
    return CH2_OK;
  } catch (const compart_h2::Error& e) {
    return set_error(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(CH2_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return set_error(CH2_INTERNAL_ERROR, e.what());
  } catch (...) {
    return set_error(CH2_INTERNAL_ERROR, "unknown error");
  }
}

void require(const void* ptr, const char* what) {
  if (ptr == nullptr) compart_h2::fail(ErrorCode::InvalidArgument, std::string(what) + " is null");
}

Matrix load(const double* data, size_t rows, size_t cols, const char* what) {
  require(data, what);
  return Eigen::Map<const RowMajor>(data, static_cast<Index>(rows), static_cast<Index>(cols));
}

void store(const Matrix& m, double* out) {
  Eigen::Map<RowMajor>(out, m.rows(), m.cols()) = m;
}

Gain load_gain(const ch2_plant* plant, const double* k, const char* what = "gain") {
  require(plant, "plant");
  return load(k, static_cast<size_t>(plant->model.m()), static_cast<size_t>(plant->model.n()), what);
}

compart_h2::SolverConfig to_config(const ch2_config& c) {
  compart_h2::SolverConfig cfg;
  cfg.t0 = c.t0;
  cfg.mu = c.mu;
  cfg.eps1 = c.eps1;
  cfg.eps2 = c.eps2;
  cfg.eps_r = c.eps_r;
  cfg.delta = c.delta;
  cfg.armijo_sigma = c.armijo_sigma;
  cfg.armijo_beta = c.armijo_beta;
  cfg.armijo_s0_fipm = c.armijo_s0_fipm;
  cfg.max_inner_fipm = c.max_inner_fipm;
  cfg.max_inner_sipm = c.max_inner_sipm;
  cfg.max_outer = c.max_outer;
  cfg.max_backtracks = c.max_backtracks;
  cfg.threads = c.threads;
  cfg.enforce_assumptions = c.enforce_assumptions != 0;
  return cfg;
}

ch2_kkt to_kkt(const compart_h2::KktResidual& k) {
  return {k.stationarity, k.dual_feasibility, k.primal_feasibility, k.complementarity};
}

}  // namespace

extern "C" {

const char* ch2_version(void) { return "0.1.0"; }

const char* ch2_status_name(ch2_status status) {
  switch (status) {
    case CH2_OK: return "ok";
    case CH2_INVALID_ARGUMENT: return "invalid argument";
    case CH2_DIMENSION_MISMATCH: return "dimension mismatch";
    case CH2_NOT_SCHUR: return "closed loop not Schur";
    case CH2_SINGULAR_SYSTEM: return "singular system";
    case CH2_EIGEN_FAILURE: return "eigensolver failure";
    case CH2_INFEASIBLE_POINT: return "infeasible point";
    case CH2_INFEASIBLE_START: return "infeasible start";
    case CH2_LINE_SEARCH_FAILED: return "line search failed";
    case CH2_PHASE_ONE_FAILED: return "phase-I failed";
    case CH2_ASSUMPTION_VIOLATED: return "standing assumption violated";
    case CH2_ITERATION_DIVERGED: return "iteration diverged";
    case CH2_INTERNAL_ERROR: return "internal error";
  }
  return "unknown status";
}

const char* ch2_last_error(void) { return g_last_error.c_str(); }

ch2_status ch2_plant_create(const double* A, const double* B, const double* C, const double* D,
                            const double* G, size_t n, size_t m, size_t r, size_t q,
                            ch2_plant** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    if (n == 0 || m == 0 || r == 0 || q == 0) {
      compart_h2::fail(ErrorCode::DimensionMismatch, "plant dimensions must be positive");
    }
    auto model = compart_h2::PlantModel::make(load(A, n, n, "A"), load(B, n, m, "B"),
                                              load(C, r, n, "C"), load(D, r, m, "D"),
                                              load(G, n, q, "G"));
    *out = new ch2_plant{std::move(model)};
  });
}

void ch2_plant_free(ch2_plant* plant) { delete plant; }

ch2_status ch2_plant_dims(const ch2_plant* plant, size_t* n, size_t* m, size_t* r, size_t* q) {
  return guarded([&] {
    require(plant, "plant");
    if (n) *n = static_cast<size_t>(plant->model.n());
    if (m) *m = static_cast<size_t>(plant->model.m());
    if (r) *r = static_cast<size_t>(plant->model.r());
    if (q) *q = static_cast<size_t>(plant->model.q());
  });
}

ch2_status ch2_plant_matrix(const ch2_plant* plant, char which, double* out) {
  return guarded([&] {
    require(plant, "plant");
    require(out, "out");
    const auto& p = plant->model;
    switch (which) {
      case 'A': store(p.A, out); break;
      case 'B': store(p.B, out); break;
      case 'C': store(p.C, out); break;
      case 'D': store(p.D, out); break;
      case 'G': store(p.G, out); break;
      default: compart_h2::fail(ErrorCode::InvalidArgument, "matrix selector must be A,B,C,D or G");
    }
  });
}

ch2_status ch2_plant_validate(const ch2_plant* plant, int* violations, char* message,
                              size_t message_len) {
  return guarded([&] {
    require(plant, "plant");
    const auto found = compart_h2::validate_plant(plant->model);
    if (violations) *violations = static_cast<int>(found.size());
    if (message && message_len > 0) {
      std::string text;
      for (const auto& v : found) {
        if (!text.empty()) text += "; ";
        text += v.assumption + " (residual " + std::to_string(v.residual) + ")";
      }
      std::strncpy(message, text.c_str(), message_len - 1);
      message[message_len - 1] = '\0';
    }
  });
}

ch2_status ch2_plant_replicate(const ch2_plant* plant, size_t copies, ch2_replicate_mode mode,
                               ch2_plant** out) {
  return guarded([&] {
    require(plant, "plant");
    require(out, "out");
    *out = nullptr;
    const auto m = mode == CH2_REPLICATE_PAPER_CONCAT ? compart_h2::ReplicateMode::PaperConcat
                                                       : compart_h2::ReplicateMode::BlockDiag;
    *out = new ch2_plant{compart_h2::replicate(plant->model, static_cast<Index>(copies), m)};
  });
}

ch2_status ch2_rank_one_gain(const double* vs, size_t count, size_t m, double* k_out) {
  return guarded([&] {
    require(vs, "vs");
    require(k_out, "k_out");
    std::vector<compart_h2::Vector> vectors;
    for (size_t i = 0; i < count; ++i) {
      vectors.emplace_back(Eigen::Map<const compart_h2::Vector>(vs + i * m, static_cast<Index>(m)));
    }
    store(compart_h2::rank_one_gain(vectors), k_out);
  });
}

ch2_status ch2_gain_block_diag(const double* k, size_t m, size_t n, size_t copies, double* out) {
  return guarded([&] {
    require(out, "out");
    if (copies == 0) compart_h2::fail(ErrorCode::InvalidArgument, "copies must be >= 1");
    store(compart_h2::block_diag(load(k, m, n, "gain"), static_cast<Index>(copies)), out);
  });
}

void ch2_config_default(ch2_config* config) {
  if (config == nullptr) return;
  const compart_h2::SolverConfig d;
  *config = ch2_config{d.t0,
                       d.mu,
                       d.eps1,
                       d.eps2,
                       d.eps_r,
                       d.delta,
                       d.armijo_sigma,
                       d.armijo_beta,
                       d.armijo_s0_fipm,
                       d.max_inner_fipm,
                       d.max_inner_sipm,
                       d.max_outer,
                       d.max_backtracks,
                       d.threads,
                       d.enforce_assumptions ? 1 : 0};
}

ch2_status ch2_solve(const ch2_plant* plant, const double* k0, ch2_method method,
                     const ch2_config* config, ch2_report** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    ch2_config c;
    if (config) {
      c = *config;
    } else {
      ch2_config_default(&c);
    }
    const Gain k = load_gain(plant, k0, "k0");
    const auto m = method == CH2_SIPM ? compart_h2::Method::SIPM : compart_h2::Method::FIPM;
    *out = new ch2_report{compart_h2::solve(plant->model, k, m, to_config(c))};
  });
}

void ch2_report_free(ch2_report* report) { delete report; }

ch2_status ch2_report_summary(const ch2_report* report, ch2_summary* out) {
  return guarded([&] {
    require(report, "report");
    require(out, "out");
    const auto& r = report->report;
    out->method = r.method == compart_h2::Method::SIPM ? CH2_SIPM : CH2_FIPM;
    out->converged = r.converged ? 1 : 0;
    out->J = r.objective;
    out->grad_norm = r.jlbf_grad_norm;
    out->final_t = r.final_t;
    out->outer_iterations = static_cast<int>(r.trace.size());
    out->total_inner_iterations = r.total_inner_iterations();
    out->inner_capped = r.inner_capped;
    out->assumption_warnings = static_cast<int>(r.assumption_warnings.size());
    out->kkt = to_kkt(r.kkt);
  });
}

ch2_status ch2_report_gain(const ch2_report* report, double* k_out) {
  return guarded([&] {
    require(report, "report");
    require(k_out, "k_out");
    store(report->report.final_gain, k_out);
  });
}

ch2_status ch2_report_multiplier(const ch2_report* report, double* q_out) {
  return guarded([&] {
    require(report, "report");
    require(q_out, "q_out");
    store(report->report.multiplier, q_out);
  });
}

size_t ch2_report_trace_length(const ch2_report* report) {
  return report == nullptr ? 0 : report->report.trace.size();
}

ch2_status ch2_report_trace(const ch2_report* report, size_t index, ch2_trace_record* out) {
  return guarded([&] {
    require(report, "report");
    require(out, "out");
    if (index >= report->report.trace.size()) {
      compart_h2::fail(ErrorCode::InvalidArgument, "trace index out of range");
    }
    const auto& rec = report->report.trace[index];
    *out = ch2_trace_record{rec.t, rec.inner_iterations, rec.grad_norm, rec.J,
                            rec.cumulative_seconds};
  });
}

ch2_status ch2_eval_cost(const ch2_plant* plant, const double* k, double* J) {
  return guarded([&] {
    require(J, "J");
    *J = compart_h2::eval_cost(plant->model, load_gain(plant, k)).J;
  });
}

ch2_status ch2_min_slack(const ch2_plant* plant, const double* k, double* slack) {
  return guarded([&] {
    require(slack, "slack");
    *slack = compart_h2::min_slack(plant->model, load_gain(plant, k));
  });
}

ch2_status ch2_verify(const ch2_plant* plant, const double* k, double t, double eps_r,
                      ch2_verification* out) {
  return guarded([&] {
    require(out, "out");
    const Gain gain = load_gain(plant, k);
    const auto& p = plant->model;
    const Matrix s = compart_h2::constraint_stack(p, gain);
    Index row = 0;
    Index col = 0;
    *out = ch2_verification{};
    out->min_slack = s.minCoeff(&row, &col);
    out->worst_row = static_cast<size_t>(row);
    out->worst_col = static_cast<size_t>(col);
    out->compartmental = out->min_slack >= -eps_r ? 1 : 0;
    out->strictly_feasible = out->min_slack > 0.0 ? 1 : 0;
    out->spectral_radius = compart_h2::spectral_radius(p.A - p.B * gain);
    out->schur = out->spectral_radius < 1.0 - compart_h2::kSchurTol ? 1 : 0;
    out->J = std::numeric_limits<double>::quiet_NaN();
    if (out->schur) {
      out->J = compart_h2::eval_cost(p, gain).J;
      out->cost_defined = 1;
    }
    Matrix q = Matrix::Zero(s.rows(), s.cols());
    if (out->min_slack + eps_r > 0.0 && t > 0.0) {
      q = compart_h2::recover_multiplier(p, gain, t, eps_r);
      out->multiplier_defined = 1;
    }
    out->kkt = to_kkt(compart_h2::kkt_residual(p, gain, q));
  });
}

ch2_status ch2_grad_check(const ch2_plant* plant, const double* k, double t, double eps_r,
                          ch2_derivative_check* out) {
  return guarded([&] {
    namespace oracle = compart_h2::oracle;
    require(out, "out");
    const Gain gain = load_gain(plant, k);
    const auto& p = plant->model;
    *out = ch2_derivative_check{};

    const auto cache = compart_h2::eval_cost(p, gain);
    const Matrix grad = compart_h2::grad_J(p, gain, cache);
    const Matrix fd_grad = oracle::fd_gradient(
        [&](const Gain& x) { return compart_h2::cost_value(p, x); }, gain);
    out->grad_J = oracle::relative_error(grad, fd_grad);

    const Matrix raw = compart_h2::hessian_J(p, gain, cache, {1, false});
    out->hessian_asymmetry = (raw - raw.transpose()).norm() / std::max(raw.norm(), 1e-300);
    const Matrix hess = 0.5 * (raw + raw.transpose());
    const Matrix fd_hess = oracle::fd_jacobian(
        [&](const Gain& x) {
          return compart_h2::vec_grad_J(p, x, compart_h2::eval_cost(p, x));
        },
        gain, oracle::kHessianStep, true);
    out->hessian_J = oracle::relative_error(hess, fd_hess);

    out->barrier_grad = std::numeric_limits<double>::quiet_NaN();
    out->barrier_hessian = std::numeric_limits<double>::quiet_NaN();
    try {
      const auto lbf = compart_h2::eval_lbf(p, gain, t, eps_r, true);
      const Matrix fd_lbf = oracle::fd_gradient(
          [&](const Gain& x) { return compart_h2::eval_lbf(p, x, t, eps_r, false).value; }, gain);
      const Matrix fd_lbf_hess = oracle::fd_jacobian(
          [&](const Gain& x) { return compart_h2::eval_lbf(p, x, t, eps_r, false).vec_grad; },
          gain, oracle::kHessianStep, true);
      out->barrier_grad = oracle::relative_error(lbf.grad_matrix, fd_lbf);
      out->barrier_hessian = oracle::relative_error(lbf.vec_hessian, fd_lbf_hess);
      out->barrier_defined = 1;
    } catch (const compart_h2::Error& e) {
      if (e.code() != ErrorCode::InfeasiblePoint) throw;
    }
  });
}

ch2_status ch2_check_start(const ch2_plant* plant, const double* k, ch2_start_check* out) {
  return guarded([&] {
    require(out, "out");
    const auto c = compart_h2::check_start(plant->model, load_gain(plant, k));
    *out = ch2_start_check{c.ok ? 1 : 0, c.min_slack, c.spectral_radius,
                           static_cast<size_t>(c.worst_row), static_cast<size_t>(c.worst_col)};
    if (!c.ok) {
      std::string why;
      for (const auto& r : c.reasons) why += (why.empty() ? "" : "; ") + r;
      g_last_error = why;
    }
  });
}

ch2_status ch2_phase1(const ch2_plant* plant, const double* k_start, double target_slack,
                      double* k_out, double* achieved_slack) {
  compart_h2::Phase1Result result;
  compart_h2::Phase1Options options;
  const ch2_status status = guarded([&] {
    require(k_out, "k_out");
    options.target_slack = target_slack;
    result = compart_h2::phase1_search(plant->model, load_gain(plant, k_start), options);
    store(result.gain, k_out);
    if (achieved_slack) *achieved_slack = result.slack;
  });
  if (status != CH2_OK) return status;
  if (!result.reached) {
    return set_error(CH2_PHASE_ONE_FAILED,
                     "phase1: best min slack " + std::to_string(result.slack) +
                         " is below the target " + std::to_string(target_slack));
  }
  return CH2_OK;
}

}  // extern "C"
