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
#include <cmath>
#include <cstdlib>
#include <vector>

#include "doctest.h"
#include "spocpp/eigensolver.hpp"
#include "spocpp/model.hpp"
#include "spocpp/rng.hpp"

using namespace spocpp;

namespace {

MatrixXd random_symmetric(int n, std::uint64_t seed) {
  Rng rng(seed);
  MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) a(i, j) = a(j, i) = rng.normal();
  return a;
}

SparseGraph demo_graph(int n, std::uint64_t seed) {
  MembershipMatrix th = make_membership(n, 3, 0.1, {1, 1, 1}, seed);
  MatrixXd bbar = MatrixXd::Constant(3, 3, 0.1);
  bbar.diagonal() << 1.0, 0.75, 0.5;
  ProbabilityOperator p(th, CommunityMatrix(1.0, bbar));
  return sample_graph(p, mix_seed(seed, 17, 0));
}

}  // namespace

TEST_CASE("eigenpairs ordered by magnitude, signs fixed, residuals tight") {
  VectorXd d(6);
  d << 5.0, -7.0, 1.0, -2.0, 0.5, 3.0;
  DenseOp op(MatrixXd(d.asDiagonal()));
  SpectralPair pair = top_eigs(op, 4);
  REQUIRE(pair.k() == 4);
  CHECK(pair.values[0] == doctest::Approx(-7.0));
  CHECK(pair.values[1] == doctest::Approx(5.0));
  CHECK(pair.values[2] == doctest::Approx(3.0));
  CHECK(pair.values[3] == doctest::Approx(-2.0));
  for (int t = 0; t < 4; ++t) {
    CHECK(pair.vectors.col(t).norm() == doctest::Approx(1.0));
    CHECK(pair.residuals[t] < 1e-10);
    // sign convention: the largest-magnitude coordinate is positive
    int arg = 0;
    pair.vectors.col(t).cwiseAbs().maxCoeff(&arg);
    CHECK(pair.vectors(arg, t) > 0.0);
  }
}

TEST_CASE("sign fix flips columns whose extreme coordinate is negative") {
  MatrixXd v(3, 2);
  v << -0.9, 0.1, 0.3, 0.8, 0.2, -0.2;
  MatrixXd fixed = v;
  fix_signs(fixed);
  CHECK((fixed.col(0) + v.col(0)).cwiseAbs().maxCoeff() == 0.0);  // flipped
  CHECK((fixed.col(1) - v.col(1)).cwiseAbs().maxCoeff() == 0.0);  // kept
}

TEST_CASE("iterative and dense paths agree on random symmetric operators") {
  for (int trial = 0; trial < 5; ++trial) {
    MatrixXd a = random_symmetric(150, 1000 + trial);
    DenseOp op(a);
    EigOptions dense, lanczos;
    dense.dense_threshold = 1000;  // force the direct decomposition
    lanczos.dense_threshold = 0;   // force the iterative path
    SpectralPair pd = top_eigs(op, 5, dense);
    SpectralPair pl = top_eigs(op, 5, lanczos);
    REQUIRE(pd.k() == pl.k());
    for (int t = 0; t < pd.k(); ++t) {
      CHECK(std::abs(pd.values[t] - pl.values[t]) < 1e-8);
      CHECK((pd.vectors.col(t) - pl.vectors.col(t)).cwiseAbs().maxCoeff() <
            1e-6);
    }
  }
}

TEST_CASE("algebraically largest eigenvalues come back in descending order") {
  MatrixXd a = random_symmetric(90, 5);
  DenseOp op(a);
  std::vector<double> vals = all_eigenvalues_desc(op, 6);
  REQUIRE(vals.size() == 6);
  for (std::size_t i = 1; i < vals.size(); ++i) CHECK(vals[i - 1] >= vals[i]);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
  for (int i = 0; i < 6; ++i)
    CHECK(vals[i] == doctest::Approx(es.eigenvalues()[89 - i]).epsilon(1e-10));
}

TEST_CASE("adjacency operator mirrors the sparse graph") {
  SparseGraph g = demo_graph(60, 3);
  AdjacencyOp op(g);
  CHECK(op.dim() == 60);
  MatrixXd dense = MatrixXd::Zero(60, 60);
  for (int i = 0; i < 60; ++i)
    for (const int* p = g.row_begin(i); p != g.row_end(i); ++p)
      dense(i, *p) = 1.0;
  for (int i = 0; i < 60; i += 7)
    CHECK((op.row(i) - dense.row(i).transpose()).cwiseAbs().maxCoeff() == 0.0);
  VectorXd x = VectorXd::LinSpaced(60, 0.0, 1.0), y(60);
  op.matvec(x, y);
  CHECK((y - dense * x).cwiseAbs().maxCoeff() < 1e-12);
  // debias diagonal = degrees; operator 1-norm = max degree
  VectorXd deg = op.debias_diagonal();
  int maxdeg = 0;
  for (int i = 0; i < 60; ++i) {
    CHECK(deg[i] == doctest::Approx(static_cast<double>(g.degree(i))));
    maxdeg = std::max(maxdeg, g.degree(i));
  }
  CHECK(op.norm1() == doctest::Approx(static_cast<double>(maxdeg)));
}

TEST_CASE("exact probability operator has a zero debias diagonal") {
  MembershipMatrix th = make_membership(30, 2, 0.2, {1, 1}, 1);
  MatrixXd bbar(2, 2);
  bbar << 1.0, 0.2, 0.2, 0.7;
  ProbabilityOperator p(th, CommunityMatrix(0.9, bbar));
  ProbabilityOp op(p);
  CHECK(op.debias_diagonal().cwiseAbs().maxCoeff() == 0.0);
  // spectrum of P has rank <= K
  std::vector<double> vals = all_eigenvalues_desc(op, 5);
  CHECK(std::abs(vals[2]) < 1e-10);
  CHECK(vals[0] > 0.0);
}

TEST_CASE("eigensolver rejects out-of-range pair counts") {
  DenseOp op(random_symmetric(10, 2));
  CHECK_THROWS_AS(top_eigs(op, 0), Error);
  CHECK_THROWS_AS(top_eigs(op, 11), Error);
}

TEST_CASE("dense-path cutover honors the environment override") {
  // guard the env var so the test leaves no trace
  const char* old = std::getenv("MMSB_DENSE_THRESHOLD");
  setenv("MMSB_DENSE_THRESHOLD", "99", 1);
  CHECK(dense_threshold_default() == 99);
  if (old != nullptr)
    setenv("MMSB_DENSE_THRESHOLD", old, 1);
  else
    unsetenv("MMSB_DENSE_THRESHOLD");
}
