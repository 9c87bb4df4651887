/*
 * Copyright 2026 The spocpp authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <optional>
#include <vector>

#include "spocpp/eigensolver.hpp"
#include "spocpp/model.hpp"
#include "spocpp/spa.hpp"

namespace spocpp {

struct EstimateBundle {
  int k_hat = 0;
  MatrixXd f_hat;    // K x K vertex matrix
  VectorXd l_tilde;  // debiased eigenvalues (diagonal)
  MatrixXd b_hat;    // K x K, exactly symmetric
  MatrixXd theta_hat;
  std::vector<int> anchors;
  std::vector<std::vector<int>> selected_sets;  // per anchor, contains anchor
  double threshold_used = 0.0;
  double a_used = 0.0;
};

struct CovarianceEstimate {
  MatrixXd matrix;  // K x K symmetric
  int j = -1, jp = -1;
};

enum class RegMode { zero, spectral, fixed };

struct SpocOptions {
  std::optional<double> threshold;  // default 2 ln n
  RegMode reg_mode = RegMode::zero;
  double reg_value = 0.0;           // used when reg_mode == fixed
  std::optional<int> k;             // default: estimate_k (graphs only)
  bool clip_theta = false;          // simplex projection of theta_hat rows
  bool signed_rank = true;          // rank-estimator eigenvalue ordering
  EigOptions eig;
};

/// Rank estimator: largest j with lambda_j(A) >= 2 max_i sqrt(deg_i ln^2 n),
/// eigenvalues descending (signed by default, by |lambda| when
/// signed_rank == false). Returns 0 when nothing clears the threshold.
int estimate_k(const SparseGraph& a, const EigOptions& opts = {},
               bool signed_rank = true);

/// Harmonic debiasing of adjacency eigenvalues:
/// l~_k = [1/l^_k + (u_k^T D u_k) / l^_k^3]^{-1}.
VectorXd improved_eigenvalues(const SpectralPair& pair,
                              const VectorXd& degrees);

/// Row j of W^ = A - U^ L~ U^^T without materializing the n x n matrix.
VectorXd residual_row(const SymmetricOp& op, const SpectralPair& pair,
                      const VectorXd& l_tilde, int j);

/// Plug-in covariance of the projected residual difference for nodes (j, j').
CovarianceEstimate covariance_estimate(const SpectralPair& pair,
                                       const VectorXd& l_tilde,
                                       const VectorXd& w_j,
                                       const VectorXd& w_jp, double w_jjp,
                                       int j, int jp);

/// Exact population covariance (test oracle), from model parameters:
/// Sigma(i,j) = L^-1 U^T (diag(EW_i^2 + EW_j^2) - EW_ij^2 (e_i e_j^T +
/// e_j e_i^T)) U L^-1 with EW_ij^2 = P_ij (1 - P_ij).
MatrixXd true_covariance(const ProbabilityOperator& p, const MatrixXd& u,
                         const VectorXd& l, int i, int j);

/// Regularized quadratic statistic (u_j - u_jp) (Sigma^ + aI)^{-1} (...)^T.
/// Negative eigenvalues of Sigma^ are clamped to 0 before adding a.
double test_statistic(const Eigen::Ref<const Eigen::RowVectorXd>& u_j,
                      const Eigen::Ref<const Eigen::RowVectorXd>& u_jp,
                      const CovarianceEstimate& cov, double a);

double default_regularizer(double lambda1, int n, RegMode mode);
double default_threshold(int n);  // 2 ln n

/// Bias-corrected eigenvector matrix. Requires spectrum separation
/// |l~_{k'} - l^_k| > 1e-8 |l^_k| for all k' != k.
MatrixXd debiased_eigenvectors(const SpectralPair& pair,
                               const VectorXd& l_tilde,
                               const VectorXd& degrees);

struct AveragingResult {
  MatrixXd f_hat;
  std::vector<std::vector<int>> selected_sets;
};

/// Residual-based pure-node harvesting and row averaging: for each anchor j,
/// select I_j = {j' : T^a_{jj'} < t_n} and average the debiased eigenvector
/// rows over I_j.
AveragingResult averaging(const SymmetricOp& op, const SpectralPair& pair,
                          const VectorXd& l_tilde,
                          const std::vector<int>& anchors, double t_n,
                          double a);

/// Baseline estimator: vertices straight from SPA rows.
EstimateBundle spoc(const SymmetricOp& op, int k,
                    const SpocOptions& opts = {});
EstimateBundle spoc(const SparseGraph& a, int k, const SpocOptions& opts = {});

/// Full pipeline: rank estimate, spectral decomposition, SPA, eigenvalue
/// debiasing, averaging, and (B^, Theta^) assembly.
EstimateBundle spocpp(const SymmetricOp& op, const SpocOptions& opts = {});
EstimateBundle spocpp(const SparseGraph& a, const SpocOptions& opts = {});

}  // namespace spocpp
