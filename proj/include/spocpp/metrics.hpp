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

#include <utility>
#include <vector>

#include "spocpp/model.hpp"

namespace spocpp {

struct PermutedLoss {
  double loss = 0.0;
  std::vector<int> permutation;  // community relabeling achieving the minimum
};

/// min over all simultaneous row/column permutations Pi of
/// ||b_hat - Pi^T b_true Pi||_F. Exact brute force; K <= 10 unless
/// `allow_heuristic` (greedy diagonal matching, approximate) is set.
PermutedLoss loss_b(const MatrixXd& b_hat, const MatrixXd& b_true,
                    bool allow_heuristic = false);

/// min over column permutations of ||theta_hat - theta_true Pi||_F,
/// normalized by ||theta_true||_F. Solved exactly as a linear assignment on
/// the K x K cross-Gram matrix.
PermutedLoss loss_theta(const MatrixXd& theta_hat, const MatrixXd& theta_true);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
};

/// Ordinary least squares on (ln x, ln y); all coordinates must be > 0.
SlopeFit slope_fit(const std::vector<std::pair<double, double>>& points);

/// Maximum-profit linear assignment on a square matrix; returns the column
/// assigned to each row.
std::vector<int> max_assignment(const MatrixXd& profit);

}  // namespace spocpp
