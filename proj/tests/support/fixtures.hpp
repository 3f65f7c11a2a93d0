#pragma once

#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include "compart_h2/linalg.hpp"
#include "compart_h2/model.hpp"
#include "json.hpp"

namespace compart_h2::testing {

inline Matrix rows(std::initializer_list<std::initializer_list<double>> init) {
  const Index r = static_cast<Index>(init.size());
  const Index c = static_cast<Index>(init.begin()->size());
  Matrix m(r, c);
  Index i = 0;
  for (const auto& row : init) {
    Index j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

// Four-room thermal plant.
inline PlantModel fourroom() {
  return PlantModel::make(rows({{0.5, 0.2, 0.1, 0.0},
                                {0.1, 0.6, 0.0, 0.2},
                                {0.4, 0.0, 0.8, 0.4},
                                {0.0, 0.2, 0.1, 0.4}}),
                          rows({{0.1, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.1}}),
                          rows({{1, 0, 1, 0}, {0, 1, 0, 1}, {0, 0, 0, 0}, {0, 0, 0, 0}}),
                          rows({{0, 0}, {0, 0}, {1, 0}, {0, 1}}), Matrix::Identity(4, 4),
                          "fourroom");
}

// Column i of K is v_i, negated for the u = -Kx sign used throughout.
inline Gain fourroom_k0() { return rows({{4, 2, 1, -1}, {-1, 0, 0, 4}}); }

// Reference converged gain (four decimals).
inline Gain fourroom_k_star() {
  return rows({{0.6334, 0.5384, 0.6579, 0.0}, {0.0, 0.5938, 0.5182, 0.5481}});
}

inline Matrix fourroom_closed_loop_star() {
  return rows({{0.4367, 0.1462, 0.0342, 0.0000},
               {0.1000, 0.6000, 0.0000, 0.2000},
               {0.4000, 0.0000, 0.8000, 0.4000},
               {0.0000, 0.1406, 0.0482, 0.3452}});
}

inline constexpr double kReferenceJ = 26.7744;
inline constexpr double kReferenceJ0 = 128.3285;
inline constexpr double kReferenceTStar = 1048576.0;

// A = 0.5 I, B = I, C = [I; 0], D = [0; I], G = I.
inline PlantModel toy() {
  Matrix C = Matrix::Zero(4, 2);
  C.topRows(2).setIdentity();
  Matrix D = Matrix::Zero(4, 2);
  D.bottomRows(2).setIdentity();
  return PlantModel::make(0.5 * Matrix::Identity(2, 2), Matrix::Identity(2, 2), C, D,
                          Matrix::Identity(2, 2), "toy");
}

// B = 0 and a negative entry in A: no gain can make the closed loop nonnegative.
inline PlantModel unactuated() {
  return PlantModel::make(rows({{-0.2, 0.1}, {0.1, 0.3}}), Matrix::Zero(2, 1),
                          rows({{1, 0}, {0, 1}, {0, 0}}), rows({{0}, {0}, {1}}),
                          Matrix::Identity(2, 2), "unactuated");
}

struct Instance {
  PlantModel plant;
  Gain k;
};

// Builds A_K strictly compartmental (entries >= 0.02, column sums <= 0.9) and
// then A = A_K + BK, so K is strictly feasible with slack >= 0.02 by construction.
inline Instance random_instance(std::mt19937_64& rng, Index n, Index m) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix a_k(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) a_k(i, j) = 0.05 + unit(rng);
    const double target = 0.5 + 0.4 * unit(rng);
    a_k.col(j) *= target / a_k.col(j).sum();
  }
  Matrix B(n, m);
  for (Index i = 0; i < B.size(); ++i) B(i) = 0.5 * normal(rng);
  Gain k(m, n);
  for (Index i = 0; i < k.size(); ++i) k(i) = 0.3 * normal(rng);
  const Matrix A = a_k + B * k;

  // D^T C = 0 by stacking disjoint output blocks; D^T D = R^T R is PD.
  Matrix C = Matrix::Zero(n + m, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) C(i, j) = 0.4 * normal(rng);
  }
  C.topRows(n).diagonal().array() += 1.0;
  Matrix D = Matrix::Zero(n + m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) D(n + i, j) = 0.2 * normal(rng);
  }
  D.bottomRows(m).diagonal().array() += 1.0;
  Matrix G(n, n);
  for (Index i = 0; i < G.size(); ++i) G(i) = 0.5 * normal(rng);
  G.diagonal().array() += 1.0;
  return {PlantModel::make(A, B, C, D, G, "random"), k};
}

inline Matrix random_matrix(std::mt19937_64& rng, Index r, Index c) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m(i) = normal(rng);
  return m;
}

inline Matrix random_symmetric(std::mt19937_64& rng, Index n) {
  const Matrix m = random_matrix(rng, n, n);
  return 0.5 * (m + m.transpose());
}

// Random f with spectral radius exactly rho.
inline Matrix random_schur(std::mt19937_64& rng, Index n, double rho) {
  Matrix f = random_matrix(rng, n, n);
  return f * (rho / spectral_radius(f));
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

inline nlohmann::json read_fixture(const std::string& name) {
  std::ifstream in(std::string(COMPART_H2_FIXTURE_DIR) + "/" + name);
  return nlohmann::json::parse(in);
}

inline Matrix json_matrix(const nlohmann::json& j) {
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(j.at(0).size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index k = 0; k < m.cols(); ++k) m(i, k) = j.at(i).at(k).get<double>();
  }
  return m;
}

}  // namespace compart_h2::testing
