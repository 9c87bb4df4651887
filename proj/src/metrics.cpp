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
#include "spocpp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace spocpp {

namespace {

double permuted_b_loss(const MatrixXd& b_hat, const MatrixXd& b_true,
                       const std::vector<int>& sigma) {
  const int k = static_cast<int>(b_true.rows());
  double acc = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      double d = b_hat(i, j) - b_true(sigma[i], sigma[j]);
      acc += d * d;
    }
  return std::sqrt(acc);
}

}  // namespace

PermutedLoss loss_b(const MatrixXd& b_hat, const MatrixXd& b_true,
                    bool allow_heuristic) {
  const int k = static_cast<int>(b_true.rows());
  require(b_hat.rows() == k && b_hat.cols() == k && b_true.cols() == k,
          ErrorCode::parameter, "loss_b: shape mismatch");
  std::vector<int> sigma(k);
  std::iota(sigma.begin(), sigma.end(), 0);

  if (k > 10) {
    if (!allow_heuristic)
      throw Error(ErrorCode::size,
                  "loss_b: exact enumeration limited to K <= 10; pass "
                  "allow_heuristic for approximate greedy matching");
    // greedy diagonal matching, clearly approximate
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::vector<bool> used(k, false);
    for (int i = 0; i < k; ++i) {
      int best = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        if (used[j]) continue;
        double d = std::abs(b_hat(i, i) - b_true(j, j));
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      sigma[i] = best;
      used[best] = true;
    }
    return {permuted_b_loss(b_hat, b_true, sigma), sigma};
  }

  PermutedLoss best{std::numeric_limits<double>::infinity(), sigma};
  do {
    double l = permuted_b_loss(b_hat, b_true, sigma);
    if (l < best.loss) {
      best.loss = l;
      best.permutation = sigma;
    }
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return best;
}

std::vector<int> max_assignment(const MatrixXd& profit) {
  // Kuhn-Munkres with potentials on the min-cost form.
  const int n = static_cast<int>(profit.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      int i0 = p[j0], j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = -profit(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

PermutedLoss loss_theta(const MatrixXd& theta_hat,
                        const MatrixXd& theta_true) {
  require(theta_hat.rows() == theta_true.rows() &&
              theta_hat.cols() == theta_true.cols(),
          ErrorCode::parameter, "loss_theta: shape mismatch");
  const int k = static_cast<int>(theta_true.cols());
  double norm_true = theta_true.norm();
  require(norm_true > 0.0, ErrorCode::parameter,
          "loss_theta: reference matrix is zero");

  // ||theta_hat - theta_true Pi||^2 is linear in the assignment of
  // estimated columns to true columns, so the cross-Gram matrix carries all
  // the information.
  MatrixXd gram = theta_true.transpose() * theta_hat;  // (true k, hat t)
  std::vector<int> hat_to_true = max_assignment(gram.transpose());

  // evaluate the residual directly; expanding it through the Gram identity
  // would cancel catastrophically for near-exact estimates
  MatrixXd permuted(theta_true.rows(), k);
  for (int t = 0; t < k; ++t)
    permuted.col(t) = theta_true.col(hat_to_true[t]);
  PermutedLoss out;
  out.loss = (theta_hat - permuted).norm() / norm_true;
  out.permutation = hat_to_true;
  return out;
}

SlopeFit slope_fit(const std::vector<std::pair<double, double>>& points) {
  require(points.size() >= 2, ErrorCode::parameter,
          "slope_fit: need at least 2 points");
  const int n = static_cast<int>(points.size());
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    require(points[i].first > 0.0 && points[i].second > 0.0,
            ErrorCode::domain, "slope_fit: coordinates must be positive");
    x[i] = std::log(points[i].first);
    y[i] = std::log(points[i].second);
  }
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0, ErrorCode::parameter, "slope_fit: x values not distinct");

  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (int i = 0; i < n; ++i) {
    double r = y[i] - (fit.intercept + fit.slope * x[i]);
    rss += r * r;
  }
  fit.stderr_slope = n > 2 ? std::sqrt(rss / (n - 2) / sxx) : 0.0;
  return fit;
}

}  // namespace spocpp
