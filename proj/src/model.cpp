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
#include "spocpp/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "spocpp/rng.hpp"

namespace spocpp {

void MembershipMatrix::validate() const {
  require(rows.rows() == n && rows.cols() == K, ErrorCode::parameter,
          "membership: shape mismatch");
  for (int i = 0; i < n; ++i) {
    double sum = rows.row(i).sum();
    require(std::abs(sum - 1.0) <= 1e-12, ErrorCode::parameter,
            "membership: row " + std::to_string(i) + " does not sum to 1");
    for (int k = 0; k < K; ++k)
      require(rows(i, k) >= 0.0 && rows(i, k) <= 1.0, ErrorCode::parameter,
              "membership: entry out of [0,1]");
  }
}

CommunityMatrix::CommunityMatrix(double rho_, MatrixXd bbar_, bool normalized_)
    : K(static_cast<int>(bbar_.rows())),
      rho(rho_),
      bbar(std::move(bbar_)),
      normalized(normalized_) {
  require(rho > 0.0 && rho <= 1.0, ErrorCode::parameter,
          "community matrix: rho must be in (0, 1]");
  require(bbar.rows() == bbar.cols(), ErrorCode::parameter,
          "community matrix: bbar must be square");
  require((bbar - bbar.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
          ErrorCode::parameter, "community matrix: bbar must be symmetric");
  require(bbar.minCoeff() >= 0.0 && bbar.maxCoeff() <= 1.0,
          ErrorCode::parameter, "community matrix: entries must be in [0,1]");
  if (normalized)
    require(std::abs(bbar.maxCoeff() - 1.0) <= 1e-12, ErrorCode::parameter,
            "community matrix: normalized form requires max(bbar) == 1");
}

ProbabilityOperator::ProbabilityOperator(MembershipMatrix theta,
                                         CommunityMatrix b)
    : theta_(std::move(theta)), b_(std::move(b)) {
  require(theta_.K == b_.K, ErrorCode::parameter,
          "probability operator: K mismatch between Theta and B");
  h_ = theta_.rows * b_.bbar;
}

VectorXd ProbabilityOperator::row(int i) const {
  return b_.rho * (theta_.rows * h_.row(i).transpose());
}

VectorXd ProbabilityOperator::row_unit_rho(int i) const {
  return theta_.rows * h_.row(i).transpose();
}

double ProbabilityOperator::entry(int i, int j) const {
  return b_.rho * h_.row(i).dot(theta_.rows.row(j));
}

void ProbabilityOperator::matvec(const Eigen::Ref<const VectorXd>& x,
                                 Eigen::Ref<VectorXd> y) const {
  y = b_.rho * (h_ * (theta_.rows.transpose() * x));
}

VectorXd ProbabilityOperator::row_sums() const {
  VectorXd colsum = theta_.rows.colwise().sum();
  return b_.rho * (h_ * colsum);
}

bool SparseGraph::has_edge(int i, int j) const {
  return std::binary_search(row_begin(i), row_end(i), j);
}

SparseGraph SparseGraph::from_rows(std::vector<std::vector<int>> rows) {
  SparseGraph g;
  g.n = static_cast<int>(rows.size());
  g.offsets.resize(g.n + 1, 0);
  for (int i = 0; i < g.n; ++i)
    g.offsets[i + 1] = g.offsets[i] + static_cast<int>(rows[i].size());
  g.neighbors.reserve(g.offsets[g.n]);
  for (auto& r : rows)
    g.neighbors.insert(g.neighbors.end(), r.begin(), r.end());
  g.edge_count = static_cast<std::int64_t>(g.neighbors.size());
  return g;
}

void SparseGraph::validate() const {
  for (int i = 0; i < n; ++i) {
    const int* b = row_begin(i);
    const int* e = row_end(i);
    for (const int* p = b; p != e; ++p) {
      require(*p >= 0 && *p < n, ErrorCode::parameter, "graph: index range");
      if (p + 1 != e)
        require(p[0] < p[1], ErrorCode::parameter, "graph: rows must be "
                "strictly sorted");
      require(has_edge(*p, i), ErrorCode::parameter, "graph: not symmetric");
    }
  }
}

MembershipMatrix make_membership(int n, int K, double pure_fraction,
                                 const std::vector<double>& alpha,
                                 std::uint64_t seed, bool shuffle) {
  require(K >= 1, ErrorCode::parameter, "make_membership: K must be >= 1");
  require(K <= n, ErrorCode::parameter, "make_membership: K must be <= n");
  require(pure_fraction >= 0.0 && K * pure_fraction <= 1.0,
          ErrorCode::parameter,
          "make_membership: require 0 <= K * pure_fraction <= 1");
  require(static_cast<int>(alpha.size()) == K, ErrorCode::parameter,
          "make_membership: alpha must have K entries");
  for (double a : alpha)
    require(a > 0.0, ErrorCode::parameter,
            "make_membership: alpha entries must be > 0");

  MembershipMatrix m;
  m.n = n;
  m.K = K;
  m.rows = MatrixXd::Zero(n, K);
  m.pure_sets.assign(K, {});

  int per_community = static_cast<int>(std::floor(n * pure_fraction));
  Rng rng(mix64(seed ^ 0x7d1c0ffee1234567ULL));

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (shuffle) {
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  }

  int pos = 0;
  for (int k = 0; k < K; ++k) {
    for (int c = 0; c < per_community; ++c, ++pos) {
      int node = order[pos];
      m.rows(node, k) = 1.0;
      m.pure_sets[k].push_back(node);
    }
  }
  for (; pos < n; ++pos) {
    int node = order[pos];
    std::vector<double> row = rng.dirichlet(alpha);
    for (int k = 0; k < K; ++k) m.rows(node, k) = row[k];
  }
  for (auto& s : m.pure_sets) std::sort(s.begin(), s.end());
  return m;
}

namespace {

template <typename KeepEdge>
SparseGraph sample_pairs(int n, KeepEdge&& keep) {
  std::vector<std::vector<int>> rows(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (keep(i, j)) {
        rows[i].push_back(j);
        if (j != i) rows[j].push_back(i);
      }
    }
  }
  return SparseGraph::from_rows(std::move(rows));
}

}  // namespace

SparseGraph sample_graph(const ProbabilityOperator& p, std::uint64_t seed) {
  const int n = p.n();
  VectorXd prow;
  int current = -1;
  return sample_pairs(n, [&](int i, int j) {
    if (i != current) {
      prow = p.row(i);
      current = i;
    }
    return pair_uniform(seed, i, j) < prow[j];
  });
}

SparseGraph sample_graph_coupled(const ProbabilityOperator& p,
                                 double rho_override, std::uint64_t seed) {
  require(rho_override > 0.0 && rho_override <= 1.0, ErrorCode::parameter,
          "sample_graph_coupled: rho_override must be in (0, 1]");
  const int n = p.n();
  VectorXd prow;
  int current = -1;
  return sample_pairs(n, [&](int i, int j) {
    if (i != current) {
      prow = p.row_unit_rho(i);
      current = i;
    }
    return pair_uniform(seed, i, j) < rho_override * prow[j];
  });
}

void save_graph(const SparseGraph& g, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::io, "cannot open for writing: " + path);
  out << "# n=" << g.n << "\n";
  for (int i = 0; i < g.n; ++i)
    for (const int* p = g.row_begin(i); p != g.row_end(i); ++p)
      if (*p >= i) out << i << " " << *p << "\n";
  require(out.good(), ErrorCode::io, "write failed: " + path);
}

SparseGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot open: " + path);
  std::string header;
  std::getline(in, header);
  int n = -1;
  if (std::sscanf(header.c_str(), "# n=%d", &n) != 1 || n < 0)
    throw Error(ErrorCode::io, "graph file: bad header in " + path);
  std::vector<std::vector<int>> rows(n);
  int i, j;
  while (in >> i >> j) {
    require(i >= 0 && j >= i && j < n, ErrorCode::io,
            "graph file: bad edge in " + path);
    rows[i].push_back(j);
    if (j != i) rows[j].push_back(i);
  }
  for (auto& r : rows) std::sort(r.begin(), r.end());
  return SparseGraph::from_rows(std::move(rows));
}

void save_membership(const MatrixXd& theta, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::io, "cannot open for writing: " + path);
  const int K = static_cast<int>(theta.cols());
  for (int k = 0; k < K; ++k) out << (k ? "," : "") << "theta_" << (k + 1);
  out << "\n";
  out.precision(17);
  for (int i = 0; i < theta.rows(); ++i) {
    for (int k = 0; k < K; ++k) out << (k ? "," : "") << theta(i, k);
    out << "\n";
  }
  require(out.good(), ErrorCode::io, "write failed: " + path);
}

MatrixXd load_membership(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot open: " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> data;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    require(data.empty() || row.size() == data.front().size(), ErrorCode::io,
            "membership file: ragged rows in " + path);
    data.push_back(std::move(row));
  }
  require(!data.empty(), ErrorCode::io, "membership file: empty " + path);
  MatrixXd theta(data.size(), data.front().size());
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t k = 0; k < data[i].size(); ++k)
      theta(i, k) = data[i][k];
  return theta;
}

}  // namespace spocpp
