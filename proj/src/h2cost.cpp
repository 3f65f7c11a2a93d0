#include "compart_h2/h2cost.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "compart_h2/errors.hpp"

namespace compart_h2 {

namespace {

void require_cache(const PlantModel& p, const CostCache& cache) {
  const Index n = p.n();
  if (cache.X.rows() != n || cache.X.cols() != n || cache.Y.rows() != n || cache.Y.cols() != n) {
    fail(ErrorCode::DimensionMismatch, "cost cache does not match the plant dimension");
  }
}

Matrix block_from_terms(const PlantModel& p, const Gain& k, const CostCache& cache,
                        const Matrix& a_k, const HessianTerms& t, Index i, Index j) {
  const Matrix& B = p.B;
  const Matrix dtd = p.D.transpose() * p.D;
  // S·Y has a single nonzero row i equal to row j of Y.
  Matrix sy = Matrix::Zero(p.m(), p.n());
  sy.row(i) = cache.Y.row(j);

  const Matrix ay = a_k * cache.Y;
  const Matrix xs = t.X_ij + t.X_ij.transpose();
  const Matrix ys = t.Y_ij + t.Y_ij.transpose();
  const Matrix zs = t.Z_ij + t.Z_ij.transpose();
  const Matrix e = B.transpose() * cache.X * a_k - dtd * k;

  return 2.0 * (B.transpose() * cache.X * B + dtd) * sy +
         2.0 * B.transpose() * (xs - zs) * ay + 2.0 * e * ys;
}

HessianTerms terms_with(const LyapunovSolver& lyap, const PlantModel& p, const Gain& k,
                        const CostCache& cache, Index i, Index j) {
  const Index n = p.n();
  const Matrix& a_k = lyap.closed_loop();
  // X B S: only column j is nonzero, equal to column i of XB.
  Matrix xbs = Matrix::Zero(n, n);
  xbs.col(j) = cache.X * p.B.col(i);
  Matrix ddks = Matrix::Zero(n, n);  // Kᵀ DᵀD S
  ddks.col(j) = k.transpose() * (p.D.transpose() * p.D.col(i));
  // Y Sᵀ Bᵀ is the outer product of column j of Y and column i of B.
  const Matrix ysb = cache.Y.col(j) * p.B.col(i).transpose();

  HessianTerms t;
  // Γ P = R  ⇔  A_KᵀPA_K − P − R = 0  ⇔  solve_transposed(−R).
  t.X_ij = lyap.solve_transposed(a_k.transpose() * xbs);
  t.Y_ij = lyap.solve(a_k * ysb);
  t.Z_ij = lyap.solve_transposed(ddks);
  return t;
}

}  // namespace

CostCache eval_cost(const PlantModel& p, const Gain& k) {
  const ClosedLoop cl = closed_loop(p, k);
  const LyapunovSolver lyap(cl.A_K);
  CostCache cache;
  cache.X = lyap.solve_transposed(cl.C_K.transpose() * cl.C_K);
  cache.X = 0.5 * (cache.X + cache.X.transpose());
  cache.Y = lyap.solve(p.G * p.G.transpose());
  cache.Y = 0.5 * (cache.Y + cache.Y.transpose());
  cache.J = (p.G.transpose() * cache.X * p.G).trace();
  return cache;
}

double cost_value(const PlantModel& p, const Gain& k) {
  const ClosedLoop cl = closed_loop(p, k);
  const LyapunovSolver lyap(cl.A_K);
  const Matrix x = lyap.solve_transposed(cl.C_K.transpose() * cl.C_K);
  return (p.G.transpose() * x * p.G).trace();
}

Matrix grad_J(const PlantModel& p, const Gain& k, const CostCache& cache) {
  require_gain_shape(p, k);
  require_cache(p, cache);
  const Matrix a_k = p.A - p.B * k;
  return -2.0 * (p.B.transpose() * cache.X * a_k - p.D.transpose() * p.D * k) * cache.Y;
}

Vector vec_grad_J(const PlantModel& p, const Gain& k, const CostCache& cache) {
  return vec(grad_J(p, k, cache));
}

HessianTerms hessian_terms(const PlantModel& p, const Gain& k, const CostCache& cache,
                           Index i, Index j) {
  require_gain_shape(p, k);
  require_cache(p, cache);
  if (i < 0 || i >= p.m() || j < 0 || j >= p.n()) {
    fail(ErrorCode::InvalidArgument, "hessian index out of range");
  }
  const LyapunovSolver lyap(p.A - p.B * k);
  return terms_with(lyap, p, k, cache, i, j);
}

Matrix hessian_block(const PlantModel& p, const Gain& k, const CostCache& cache, Index i,
                     Index j) {
  require_gain_shape(p, k);
  require_cache(p, cache);
  if (i < 0 || i >= p.m() || j < 0 || j >= p.n()) {
    fail(ErrorCode::InvalidArgument, "hessian index out of range");
  }
  const LyapunovSolver lyap(p.A - p.B * k);
  return block_from_terms(p, k, cache, lyap.closed_loop(), terms_with(lyap, p, k, cache, i, j),
                          i, j);
}

Matrix hessian_J(const PlantModel& p, const Gain& k, const CostCache& cache,
                 const HessianOptions& options) {
  require_gain_shape(p, k);
  require_cache(p, cache);
  const Index m = p.m();
  const Index dim = m * p.n();
  const LyapunovSolver lyap(p.A - p.B * k);
  Matrix h(dim, dim);

  auto fill = [&](Index c) {
    const Index i = c % m;
    const Index j = c / m;
    const Matrix block = block_from_terms(p, k, cache, lyap.closed_loop(),
                                          terms_with(lyap, p, k, cache, i, j), i, j);
    h.col(c) = vec(block);
  };

  unsigned workers = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                          : static_cast<unsigned>(std::max(1, options.threads));
  workers = static_cast<unsigned>(std::min<Index>(workers, dim));
  if (workers <= 1) {
    for (Index c = 0; c < dim; ++c) fill(c);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (Index c = w; c < dim; c += workers) fill(c);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  if (options.symmetrize) h = 0.5 * (h + h.transpose());
  return h;
}

int hessian_threads_from_env() {
  const char* raw = std::getenv("COMPART_H2_THREADS");
  if (raw == nullptr || *raw == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || v < 0 || v > 1024) return 1;
  return static_cast<int>(v);
}

}  // namespace compart_h2
