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
#include "spocpp/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace spocpp {

int estimate_k(const SparseGraph& a, const EigOptions& opts,
               bool signed_rank) {
  require(a.n >= 1, ErrorCode::parameter, "estimate_k: empty operator");
  if (a.edge_count == 0) return 0;
  int maxdeg = 0;
  for (int i = 0; i < a.n; ++i) maxdeg = std::max(maxdeg, a.degree(i));
  const double threshold =
      2.0 * std::sqrt(static_cast<double>(maxdeg)) * std::log(a.n);

  AdjacencyOp op(a);
  int m = std::min(a.n, 8);
  for (;;) {
    int count = 0;
    if (signed_rank) {
      std::vector<double> vals = all_eigenvalues_desc(op, m, opts);
      while (count < m && vals[count] >= threshold) ++count;
    } else {
      SpectralPair pair = top_eigs(op, m, opts);
      while (count < m && std::abs(pair.values[count]) >= threshold) ++count;
    }
    if (count < m || m == a.n) return count;
    m = std::min(a.n, 2 * m);
  }
}

VectorXd improved_eigenvalues(const SpectralPair& pair,
                              const VectorXd& degrees) {
  const int k = pair.k();
  require(degrees.size() == pair.vectors.rows(), ErrorCode::parameter,
          "improved_eigenvalues: degree vector length mismatch");
  VectorXd out(k);
  for (int t = 0; t < k; ++t) {
    double lk = pair.values[t];
    require(lk != 0.0, ErrorCode::degenerate_spectrum,
            "improved_eigenvalues: zero eigenvalue at position " +
                std::to_string(t));
    double quad = pair.vectors.col(t).cwiseAbs2().dot(degrees);
    out[t] = 1.0 / (1.0 / lk + quad / (lk * lk * lk));
  }
  return out;
}

VectorXd residual_row(const SymmetricOp& op, const SpectralPair& pair,
                      const VectorXd& l_tilde, int j) {
  require(j >= 0 && j < op.dim(), ErrorCode::parameter,
          "residual_row: index out of range");
  VectorXd coef = l_tilde.cwiseProduct(pair.vectors.row(j).transpose());
  return op.row(j) - pair.vectors * coef;
}

namespace {

MatrixXd sandwich(const VectorXd& l_tilde, const MatrixXd& inner) {
  VectorXd inv = l_tilde.cwiseInverse();
  MatrixXd m = inv.asDiagonal() * inner * inv.asDiagonal();
  return 0.5 * (m + m.transpose());
}

}  // namespace

CovarianceEstimate covariance_estimate(const SpectralPair& pair,
                                       const VectorXd& l_tilde,
                                       const VectorXd& w_j,
                                       const VectorXd& w_jp, double w_jjp,
                                       int j, int jp) {
  for (int t = 0; t < l_tilde.size(); ++t)
    require(l_tilde[t] != 0.0, ErrorCode::degenerate_spectrum,
            "covariance_estimate: singular eigenvalue matrix");
  const MatrixXd& u = pair.vectors;
  VectorXd w = w_j.cwiseAbs2() + w_jp.cwiseAbs2();
  MatrixXd inner = u.transpose() * w.asDiagonal() * u;
  inner -= (w_jjp * w_jjp) *
           (u.row(j).transpose() * u.row(jp) +
            u.row(jp).transpose() * u.row(j));
  CovarianceEstimate cov;
  cov.matrix = sandwich(l_tilde, inner);
  cov.j = j;
  cov.jp = jp;
  return cov;
}

MatrixXd true_covariance(const ProbabilityOperator& p, const MatrixXd& u,
                         const VectorXd& l, int i, int j) {
  VectorXd pi = p.row(i);
  VectorXd pj = p.row(j);
  VectorXd ew = pi.cwiseProduct(VectorXd::Ones(p.n()) - pi) +
                pj.cwiseProduct(VectorXd::Ones(p.n()) - pj);
  double ewij = pi[j] * (1.0 - pi[j]);
  MatrixXd inner = u.transpose() * ew.asDiagonal() * u;
  inner -= ewij * (u.row(i).transpose() * u.row(j) +
                   u.row(j).transpose() * u.row(i));
  return sandwich(l, inner);
}

double test_statistic(const Eigen::Ref<const Eigen::RowVectorXd>& u_j,
                      const Eigen::Ref<const Eigen::RowVectorXd>& u_jp,
                      const CovarianceEstimate& cov, double a) {
  require(a >= 0.0, ErrorCode::parameter,
          "test_statistic: regularizer must be >= 0");
  Eigen::RowVectorXd diff = u_j - u_jp;
  if (diff.norm() == 0.0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov.matrix);
  double t = 0.0;
  for (int q = 0; q < es.eigenvalues().size(); ++q) {
    double lam = std::max(es.eigenvalues()[q], 0.0) + a;
    if (lam <= 0.0)
      throw Error(ErrorCode::regularization,
                  "test_statistic: clamped covariance singular; use a > 0");
    double proj = diff * es.eigenvectors().col(q);
    t += proj * proj / lam;
  }
  return t;
}

double default_regularizer(double lambda1, int n, RegMode mode) {
  switch (mode) {
    case RegMode::zero:
      return 0.0;
    case RegMode::spectral:
      require(lambda1 > 0.0, ErrorCode::parameter,
              "default_regularizer: spectral mode needs lambda1 > 0");
      return 1.0 / (static_cast<double>(n) * lambda1);
    default:
      throw Error(ErrorCode::parameter,
                  "default_regularizer: fixed mode takes an explicit value");
  }
}

double default_threshold(int n) {
  require(n >= 2, ErrorCode::parameter, "default_threshold: n must be >= 2");
  return 2.0 * std::log(static_cast<double>(n));
}

MatrixXd debiased_eigenvectors(const SpectralPair& pair,
                               const VectorXd& l_tilde,
                               const VectorXd& degrees) {
  const int k = pair.k();
  const MatrixXd& u = pair.vectors;
  for (int t = 0; t < k; ++t)
    for (int s = 0; s < k; ++s) {
      if (s == t) continue;
      require(std::abs(l_tilde[s] - pair.values[t]) >
                  1e-8 * std::abs(pair.values[t]),
              ErrorCode::degenerate_spectrum,
              "debiased_eigenvectors: near-coincident eigenvalues (" +
                  std::to_string(t) + ", " + std::to_string(s) + ")");
    }

  // C = U^T D U; C(t, t) is the degree-weighted mass of eigenvector t.
  MatrixXd c = u.transpose() * degrees.asDiagonal() * u;
  MatrixXd out(u.rows(), k);
  for (int t = 0; t < k; ++t) {
    const double lk2 = pair.values[t] * pair.values[t];
    out.col(t) =
        u.col(t) -
        (degrees.cwiseProduct(u.col(t)) - 1.5 * c(t, t) * u.col(t)) / lk2;
    for (int s = 0; s < k; ++s) {
      if (s == t) continue;
      double factor = l_tilde[s] / (l_tilde[s] - pair.values[t]);
      out.col(t) -= factor * (c(s, t) / lk2) * u.col(s);
    }
  }
  return out;
}

AveragingResult averaging(const SymmetricOp& op, const SpectralPair& pair,
                          const VectorXd& l_tilde,
                          const std::vector<int>& anchors, double t_n,
                          double a) {
  const int n = op.dim();
  const int k = pair.k();
  require(t_n > 0.0, ErrorCode::parameter, "averaging: threshold must be > 0");
  require(static_cast<int>(anchors.size()) == k, ErrorCode::parameter,
          "averaging: need one anchor per community");

  MatrixXd u_tilde = debiased_eigenvectors(pair, l_tilde, op.debias_diagonal());

  // Per-node projected residual mass M_j = U^T diag(W^_j^2) U, computed once
  // and reused across anchors.
  std::vector<MatrixXd> mass(n);
  std::vector<VectorXd> anchor_rows(anchors.size());
  for (int j = 0; j < n; ++j) {
    VectorXd w = residual_row(op, pair, l_tilde, j);
    mass[j] = pair.vectors.transpose() * w.cwiseAbs2().asDiagonal() *
              pair.vectors;
    for (std::size_t t = 0; t < anchors.size(); ++t)
      if (anchors[t] == j) anchor_rows[t] = w;
  }

  AveragingResult res;
  res.f_hat.resize(k, k);
  for (std::size_t t = 0; t < anchors.size(); ++t) {
    const int j = anchors[t];
    const VectorXd& wj = anchor_rows[t];
    std::vector<int> selected;
    for (int jp = 0; jp < n; ++jp) {
      double stat = 0.0;
      if (jp != j) {
        MatrixXd inner = mass[j] + mass[jp];
        double cross = wj[jp] * wj[jp];
        inner -= cross * (pair.vectors.row(j).transpose() *
                              pair.vectors.row(jp) +
                          pair.vectors.row(jp).transpose() *
                              pair.vectors.row(j));
        CovarianceEstimate cov;
        cov.matrix = sandwich(l_tilde, inner);
        cov.j = j;
        cov.jp = jp;
        stat = test_statistic(pair.vectors.row(j), pair.vectors.row(jp), cov,
                              a);
      }
      if (stat < t_n) selected.push_back(jp);
    }
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(k);
    for (int jp : selected) mean += u_tilde.row(jp);  // index-ordered sum
    res.f_hat.row(t) = mean / static_cast<double>(selected.size());
    res.selected_sets.push_back(std::move(selected));
  }
  return res;
}

namespace {

MatrixXd guarded_inverse(const MatrixXd& f) {
  Eigen::JacobiSVD<MatrixXd> svd(f, Eigen::ComputeFullU | Eigen::ComputeFullV);
  double smin = svd.singularValues().minCoeff();
  double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0 || smax / smin > 1e12)
    throw Error(ErrorCode::vertex_degenerate,
                "vertex matrix numerically singular (condition number > 1e12)");
  return svd.matrixV() *
         svd.singularValues().cwiseInverse().asDiagonal() *
         svd.matrixU().transpose();
}

MatrixXd symmetrized(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

void clip_rows_to_simplex(MatrixXd& theta) {
  const int k = static_cast<int>(theta.cols());
  for (int i = 0; i < theta.rows(); ++i) {
    for (int t = 0; t < k; ++t) theta(i, t) = std::max(theta(i, t), 0.0);
    double sum = theta.row(i).sum();
    if (sum > 0.0)
      theta.row(i) /= sum;
    else
      theta.row(i).setConstant(1.0 / k);
  }
}

double pick_regularizer(const SpocOptions& opts, double lambda1, int n) {
  if (opts.reg_mode == RegMode::fixed) {
    require(opts.reg_value >= 0.0, ErrorCode::parameter,
            "regularizer must be >= 0");
    return opts.reg_value;
  }
  return default_regularizer(lambda1, n, opts.reg_mode);
}

}  // namespace

EstimateBundle spoc(const SymmetricOp& op, int k, const SpocOptions& opts) {
  require(k >= 1, ErrorCode::parameter, "spoc: K must be >= 1");
  SpectralPair pair = top_eigs(op, k, opts.eig);
  SpaResult J = spa(pair.vectors, k);

  EstimateBundle b;
  b.k_hat = k;
  b.anchors = J.indices;
  b.f_hat.resize(k, k);
  for (int t = 0; t < k; ++t) b.f_hat.row(t) = pair.vectors.row(J.indices[t]);
  b.l_tilde = pair.values;
  b.b_hat = symmetrized(b.f_hat * pair.values.asDiagonal() *
                        b.f_hat.transpose());
  b.theta_hat = pair.vectors * guarded_inverse(b.f_hat);
  if (opts.clip_theta) clip_rows_to_simplex(b.theta_hat);
  return b;
}

EstimateBundle spoc(const SparseGraph& a, int k, const SpocOptions& opts) {
  AdjacencyOp op(a);
  return spoc(op, k, opts);
}

EstimateBundle spocpp(const SymmetricOp& op, const SpocOptions& opts) {
  require(opts.k.has_value(), ErrorCode::parameter,
          "spocpp: K required for generic operators (rank estimation needs "
          "an adjacency matrix)");
  const int n = op.dim();
  const int k = *opts.k;
  require(k >= 1, ErrorCode::rank_estimation, "spocpp: estimated rank is 0");

  SpectralPair pair = top_eigs(op, k, opts.eig);
  SpaResult J = spa(pair.vectors, k);
  VectorXd degrees = op.debias_diagonal();
  VectorXd l_tilde = improved_eigenvalues(pair, degrees);
  double t_n = opts.threshold.value_or(default_threshold(n));
  double a = pick_regularizer(opts, pair.values[0], n);

  AveragingResult avg = averaging(op, pair, l_tilde, J.indices, t_n, a);

  EstimateBundle b;
  b.k_hat = k;
  b.anchors = J.indices;
  b.selected_sets = std::move(avg.selected_sets);
  b.f_hat = std::move(avg.f_hat);
  b.l_tilde = l_tilde;
  b.threshold_used = t_n;
  b.a_used = a;
  b.b_hat = symmetrized(b.f_hat * l_tilde.asDiagonal() * b.f_hat.transpose());
  b.theta_hat = pair.vectors * guarded_inverse(b.f_hat);
  if (opts.clip_theta) clip_rows_to_simplex(b.theta_hat);
  return b;
}

EstimateBundle spocpp(const SparseGraph& a, const SpocOptions& opts) {
  SpocOptions local = opts;
  if (!local.k.has_value())
    local.k = estimate_k(a, opts.eig, opts.signed_rank);
  AdjacencyOp op(a);
  return spocpp(op, local);
}

}  // namespace spocpp
