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

#include <vector>

#include "spocpp/model.hpp"

namespace spocpp {

struct SpaResult {
  std::vector<int> indices;          // selection order, pairwise distinct
  std::vector<double> selection_norms;
};

/// Successive projections: at each step select the row of maximal Euclidean
/// norm (ties to the lowest index), then project all rows onto the
/// orthogonal complement of the selected row. Returns r indices.
///
/// Throws rank_deficient if all remaining rows fall below
/// 1e-12 * (max initial norm) before r selections.
SpaResult spa(const MatrixXd& v, int r);

}  // namespace spocpp
