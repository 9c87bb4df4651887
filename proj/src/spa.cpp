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
#include "spocpp/spa.hpp"

#include <cmath>

namespace spocpp {

SpaResult spa(const MatrixXd& v, int r) {
  const int n = static_cast<int>(v.rows());
  const int k = static_cast<int>(v.cols());
  require(r >= 1 && r <= k && k <= n, ErrorCode::parameter,
          "spa: require 1 <= r <= k <= n");

  MatrixXd s = v;
  VectorXd sq = s.rowwise().squaredNorm();
  const double zero_tol2 = 1e-24 * sq.maxCoeff();
  require(sq.maxCoeff() > 0.0, ErrorCode::parameter, "spa: V is all-zero");

  SpaResult res;
  for (int t = 0; t < r; ++t) {
    int j = 0;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
      if (sq[i] > best) {
        best = sq[i];
        j = i;
      }
    }
    if (best < zero_tol2)
      throw Error(ErrorCode::rank_deficient,
                  "spa: all remaining rows numerically zero after " +
                      std::to_string(t) + " selections");
    res.indices.push_back(j);
    res.selection_norms.push_back(std::sqrt(best));
    // S <- S (I - s s^T / ||s||^2) with s the selected row
    VectorXd dir = s.row(j).transpose() / std::sqrt(best);
    VectorXd coef = s * dir;
    s.noalias() -= coef * dir.transpose();
    sq = s.rowwise().squaredNorm();
  }
  return res;
}

}  // namespace spocpp
