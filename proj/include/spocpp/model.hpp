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
#include <cstdint>
#include <string>
#include <vector>

#include "spocpp/error.hpp"

namespace spocpp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Row-stochastic membership matrix with tracked pure-node index sets.
/// A node is pure for community k iff its row equals the basis vector e_k.
struct MembershipMatrix {
  int n = 0;
  int K = 0;
  MatrixXd rows;                            // n x K, rows sum to 1
  std::vector<std::vector<int>> pure_sets;  // per community, disjoint

  void validate() const;
};

/// Symmetric connection-intensity matrix B = rho * bbar with the sparsity
/// scale factored out. `normalized` records whether max(bbar) == 1 is
/// asserted at construction.
struct CommunityMatrix {
  int K = 0;
  double rho = 1.0;
  MatrixXd bbar;  // K x K symmetric, entries in [0, 1]
  bool normalized = true;

  CommunityMatrix() = default;
  CommunityMatrix(double rho_, MatrixXd bbar_, bool normalized_ = true);

  MatrixXd b() const { return rho * bbar; }
};

/// Implicit edge-probability operator P = rho * Theta * bbar * Theta^T.
/// Rows are materialized on demand; the n x n matrix is never stored.
class ProbabilityOperator {
 public:
  ProbabilityOperator(MembershipMatrix theta, CommunityMatrix b);

  int n() const { return theta_.n; }
  int K() const { return theta_.K; }
  double rho() const { return b_.rho; }
  const MembershipMatrix& theta() const { return theta_; }
  const CommunityMatrix& community() const { return b_; }

  /// Row i of P (length n).
  VectorXd row(int i) const;
  double entry(int i, int j) const;
  /// Row i of the rho = 1 operator Theta * bbar * Theta^T.
  VectorXd row_unit_rho(int i) const;
  /// y = P x in O(nK)
  void matvec(const Eigen::Ref<const VectorXd>& x,
              Eigen::Ref<VectorXd> y) const;
  /// Row sums of P (exact expected degrees), length n.
  VectorXd row_sums() const;

 private:
  MembershipMatrix theta_;
  CommunityMatrix b_;
  MatrixXd h_;  // Theta * bbar, n x K (rho not applied)
};

/// Symmetric {0,1} adjacency in compressed row form; self-loops allowed and
/// stored once per incident row.
struct SparseGraph {
  int n = 0;
  std::vector<int> offsets;    // size n + 1
  std::vector<int> neighbors;  // strictly sorted within each row
  std::int64_t edge_count = 0; // total stored entries

  int degree(int i) const { return offsets[i + 1] - offsets[i]; }
  const int* row_begin(int i) const { return neighbors.data() + offsets[i]; }
  const int* row_end(int i) const { return neighbors.data() + offsets[i + 1]; }
  bool has_edge(int i, int j) const;

  /// Builds CSR from per-row neighbor lists (sorted, mirrored by caller).
  static SparseGraph from_rows(std::vector<std::vector<int>> rows);
  void validate() const;
};

/// Deterministic membership generator: the first floor(n * pure_fraction)
/// blocks are assigned pure to communities 1..K in order; remaining rows are
/// i.i.d. Dirichlet(alpha). An optional seeded permutation shuffles node
/// order afterwards.
MembershipMatrix make_membership(int n, int K, double pure_fraction,
                                 const std::vector<double>& alpha,
                                 std::uint64_t seed, bool shuffle = false);

/// Independent Bernoulli(P_ij) per unordered pair, including i = j.
SparseGraph sample_graph(const ProbabilityOperator& p, std::uint64_t seed);

/// Coupled sampler: edge iff U_ij < rho_override * Pbar_ij where Pbar is the
/// rho = 1 operator and U_ij comes from the counter-based pair generator.
/// Same seed with rho1 <= rho2 yields nested edge sets.
SparseGraph sample_graph_coupled(const ProbabilityOperator& p,
                                 double rho_override, std::uint64_t seed);

// Plain-text formats: graph files carry a "# n=<n>" header then one "i j"
// line per undirected edge with i <= j; membership files are CSV with header
// theta_1,...,theta_K.
void save_graph(const SparseGraph& g, const std::string& path);
SparseGraph load_graph(const std::string& path);
void save_membership(const MatrixXd& theta, const std::string& path);
MatrixXd load_membership(const std::string& path);

}  // namespace spocpp
