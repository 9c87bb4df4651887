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
#include <algorithm>
#include <set>

#include "doctest.h"
#include "spocpp/rng.hpp"
#include "spocpp/spa.hpp"

using namespace spocpp;

namespace {

// Rows = Theta * F with known pure rows: every non-pure row is a strict
// convex combination of the vertex rows, so successive projections must
// return exactly the pure rows.
MatrixXd simplex_cloud(const MatrixXd& vertices, int n_mixed,
                       std::vector<int>* pure_rows, std::uint64_t seed) {
  const int K = static_cast<int>(vertices.rows());
  Rng rng(seed);
  MatrixXd v(K + n_mixed, vertices.cols());
  pure_rows->clear();
  for (int k = 0; k < K; ++k) {
    int at = k * (n_mixed / K + 1);
    pure_rows->push_back(at);
  }
  int mixed_at = 0;
  for (int i = 0; i < v.rows(); ++i) {
    auto it = std::find(pure_rows->begin(), pure_rows->end(), i);
    if (it != pure_rows->end()) {
      v.row(i) = vertices.row(static_cast<int>(it - pure_rows->begin()));
    } else {
      std::vector<double> w = rng.dirichlet(std::vector<double>(K, 2.0));
      v.row(i).setZero();
      for (int k = 0; k < K; ++k) v.row(i) += 0.92 * w[k] * vertices.row(k);
      (void)mixed_at;
    }
  }
  return v;
}

}  // namespace

TEST_CASE("successive projections recover simplex vertices exactly") {
  MatrixXd vertices(3, 3);
  vertices << 2.0, 0.1, -0.3,
              -0.4, 1.7, 0.2,
              0.3, -0.5, 1.4;
  std::vector<int> pure;
  MatrixXd v = simplex_cloud(vertices, 57, &pure, 31);
  SpaResult r = spa(v, 3);
  REQUIRE(r.indices.size() == 3);
  std::set<int> got(r.indices.begin(), r.indices.end());
  CHECK(got == std::set<int>(pure.begin(), pure.end()));
  // selection norms are recorded and strictly positive
  REQUIRE(r.selection_norms.size() == 3);
  for (double x : r.selection_norms) CHECK(x > 0.0);
}

TEST_CASE("first pick is the largest row norm, ties to the lowest index") {
  MatrixXd v(4, 2);
  v << 1.0, 0.0,
       0.0, -1.0,  // same norm as row 0: row 0 must win the tie
       0.5, 0.5,
       0.1, 0.0;
  SpaResult r = spa(v, 2);
  CHECK(r.indices[0] == 0);
  // after projecting out e_1, row 1 keeps full magnitude 1
  CHECK(r.indices[1] == 1);
}

TEST_CASE("projection removes the selected direction") {
  // rows all parallel to the first pick: a second pick must be impossible
  MatrixXd v(5, 3);
  for (int i = 0; i < 5; ++i) {
    v.row(i).setZero();
    v(i, 0) = 1.0 + 0.1 * i;
  }
  CHECK(spa(v, 1).indices[0] == 4);
  CHECK_THROWS_AS(spa(v, 2), Error);
}

TEST_CASE("vertex count bounds are enforced") {
  MatrixXd v = MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(spa(v, 0), Error);
  CHECK_THROWS_AS(spa(v, 4), Error);
  SpaResult r = spa(v, 3);
  CHECK(r.indices.size() == 3);
}

TEST_CASE("duplicated vertices still yield distinct selections") {
  MatrixXd v(6, 2);
  v << 3.0, 0.0,
       3.0, 0.0,   // duplicate of the extreme row
       0.0, 2.0,
       1.0, 1.0,
       0.5, 0.2,
       0.0, 2.0;
  SpaResult r = spa(v, 2);
  CHECK(r.indices[0] == 0);  // tie to the lowest index
  CHECK(r.indices[1] == 2);
}
