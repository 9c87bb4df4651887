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

#include <Eigen/Dense>

#include "spocpp/model.hpp"

namespace spocpp {

/// Abstract symmetric operator. Symmetry is a caller contract; solvers only
/// see matvec / row access. `debias_diagonal` is the diagonal D fed to the
/// eigenvalue/eigenvector corrections downstream: row sums for an observed
/// adjacency, zeros for an exact noise-free operator.
class SymmetricOp {
 public:
  virtual ~SymmetricOp() = default;
  virtual int dim() const = 0;
  virtual void matvec(const Eigen::Ref<const VectorXd>& x,
                      Eigen::Ref<VectorXd> y) const = 0;
  virtual VectorXd row(int i) const = 0;
  virtual VectorXd debias_diagonal() const = 0;
  /// Operator 1-norm (max absolute row sum); used for residual tolerances.
  virtual double norm1() const = 0;
};

class AdjacencyOp final : public SymmetricOp {
 public:
  explicit AdjacencyOp(const SparseGraph& g) : g_(g) {}
  int dim() const override { return g_.n; }
  void matvec(const Eigen::Ref<const VectorXd>& x,
              Eigen::Ref<VectorXd> y) const override;
  VectorXd row(int i) const override;
  VectorXd debias_diagonal() const override;
  double norm1() const override;
  const SparseGraph& graph() const { return g_; }

 private:
  const SparseGraph& g_;
};

class DenseOp final : public SymmetricOp {
 public:
  explicit DenseOp(MatrixXd a) : a_(std::move(a)) {}
  int dim() const override { return static_cast<int>(a_.rows()); }
  void matvec(const Eigen::Ref<const VectorXd>& x,
              Eigen::Ref<VectorXd> y) const override {
    y = a_ * x;
  }
  VectorXd row(int i) const override { return a_.row(i); }
  VectorXd debias_diagonal() const override { return a_.rowwise().sum(); }
  double norm1() const override { return a_.cwiseAbs().rowwise().sum().maxCoeff(); }

 private:
  MatrixXd a_;
};

/// Exact P = rho Theta bbar Theta^T as a noise-free operator: the debias
/// diagonal is zero because the displacement A - P vanishes identically.
class ProbabilityOp final : public SymmetricOp {
 public:
  explicit ProbabilityOp(const ProbabilityOperator& p) : p_(p) {}
  int dim() const override { return p_.n(); }
  void matvec(const Eigen::Ref<const VectorXd>& x,
              Eigen::Ref<VectorXd> y) const override {
    p_.matvec(x, y);
  }
  VectorXd row(int i) const override { return p_.row(i); }
  VectorXd debias_diagonal() const override { return VectorXd::Zero(p_.n()); }
  double norm1() const override { return p_.row_sums().maxCoeff(); }
  const ProbabilityOperator& op() const { return p_; }

 private:
  const ProbabilityOperator& p_;
};

/// Top-k eigenpairs: orthonormal columns, descending |lambda|, sign-fixed
/// (largest-|entry| coordinate positive, ties to the lowest index).
struct SpectralPair {
  MatrixXd vectors;    // n x k
  VectorXd values;     // k
  VectorXd residuals;  // per pair ||A v - lambda v||
  int k() const { return static_cast<int>(values.size()); }
};

struct EigOptions {
  double tol = 1e-10;       // relative to norm1
  int max_iter = 80;        // Lanczos restart budget per requested pair
  int dense_threshold = -1; // -1: 512 or MMSB_DENSE_THRESHOLD env override
};

int dense_threshold_default();

/// k eigenpairs largest in magnitude. Dense decomposition for small n,
/// Lanczos with full reorthogonalization otherwise.
SpectralPair top_eigs(const SymmetricOp& op, int k, const EigOptions& opts = {});

/// The m algebraically largest eigenvalues in descending order.
std::vector<double> all_eigenvalues_desc(const SymmetricOp& op, int m,
                                         const EigOptions& opts = {});

/// In-place sign convention fix (columns of `vectors`).
void fix_signs(MatrixXd& vectors);

}  // namespace spocpp
