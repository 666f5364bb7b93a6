#pragma once

// Lowest-mode estimation by subspace inverse iteration on (K, M), and the
// two-frequency Rayleigh damping calibration.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <random>

#include "spwall/model.hpp"

namespace spwall {

struct RayleighCoefficients {
  double a0 = 0.0;  // mass-proportional, 1/s
  double a1 = 0.0;  // stiffness-proportional, s

  double zeta_at(double f_hz) const {
    const double w = 2.0 * kPi * f_hz;
    return 0.5 * (a0 / w + a1 * w);
  }
};

// a0 = 2 z w1 w2/(w1+w2), a1 = 2 z/(w1+w2): the damping ratio equals z
// exactly at both target frequencies.
inline RayleighCoefficients rayleigh_coefficients(double zeta, double f1_hz,
                                                  double f2_hz) {
  if (!(f1_hz > 0.0) || !(f2_hz > 0.0))
    throw ConfigError("Rayleigh target frequencies must be positive");
  if (!(zeta > 0.0)) throw ConfigError("damping ratio must be positive");
  const double w1 = 2.0 * kPi * f1_hz, w2 = 2.0 * kPi * f2_hz;
  return {2.0 * zeta * w1 * w2 / (w1 + w2), 2.0 * zeta / (w1 + w2)};
}

struct ModalResult {
  double frequency_hz = 0.0;
  Eigen::VectorXd mode;
  double residual = 0.0;  // |K v - w^2 M v| / |K v|
};

// Smallest generalized eigenpair of K v = w^2 M v by blocked inverse
// iteration with M-orthonormalization (deflation against the other block
// vectors guards clustered modes).
inline ModalResult lowest_frequency(const Eigen::SparseMatrix<double>& K,
                                    const Eigen::SparseMatrix<double>& M,
                                    unsigned seed = 1) {
  const int n = static_cast<int>(K.rows());
  if (n == 0) throw SolverError("empty system in modal analysis");
  const int q = std::min(4, n);

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0)
    throw SolverError("stiffness not positive definite in modal analysis");

  std::mt19937 rng(seed);
  std::normal_distribution<double> N01(0.0, 1.0);
  Eigen::MatrixXd X(n, q);
  for (int j = 0; j < q; ++j)
    for (int i = 0; i < n; ++i) X(i, j) = N01(rng);

  double lambda_prev = 0.0;
  Eigen::VectorXd v;
  double lambda = 0.0;
  for (int iter = 0; iter < 500; ++iter) {
    Eigen::MatrixXd Y(n, q);
    for (int j = 0; j < q; ++j) Y.col(j) = ldlt.solve(M * X.col(j));
    // M-orthonormalize by modified Gram-Schmidt.
    for (int j = 0; j < q; ++j) {
      for (int k = 0; k < j; ++k) {
        const double c = Y.col(k).dot(M * Y.col(j));
        Y.col(j) -= c * Y.col(k);
      }
      const double nrm = std::sqrt(Y.col(j).dot(M * Y.col(j)));
      if (!(nrm > 0.0)) throw SolverError("modal subspace collapsed");
      Y.col(j) /= nrm;
    }
    // Rayleigh-Ritz on the subspace.
    const Eigen::MatrixXd A = Y.transpose() * (K * Y).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    X = Y * es.eigenvectors();
    lambda = es.eigenvalues()(0);
    v = X.col(0);
    if (iter > 2 && std::abs(lambda - lambda_prev) <=
                        1e-12 * std::max(1.0, std::abs(lambda)))
      break;
    lambda_prev = lambda;
  }

  ModalResult out;
  const Eigen::VectorXd Kv = K * v;
  out.residual = (Kv - lambda * (M * v)).norm() / Kv.norm();
  if (out.residual > 1e-6)
    throw SolverError("inverse iteration did not converge (residual " +
                      std::to_string(out.residual) + ")");
  out.frequency_hz = std::sqrt(lambda) / (2.0 * kPi);
  out.mode = v;
  return out;
}

// Lowest natural frequency of the model's current (elastic) configuration.
inline ModalResult lowest_frequency(const Model& model, unsigned seed = 1) {
  const DofMap dof = model.dof_map();
  const auto K = assemble_elastic_stiffness(model, dof);
  const auto M = assemble_mass(model, dof);
  return lowest_frequency(K, M, seed);
}

}  // namespace spwall
