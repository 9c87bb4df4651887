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
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "spocpp/metrics.hpp"
#include "spocpp/rng.hpp"

using namespace spocpp;

namespace {

MatrixXd random_matrix(int r, int c, std::uint64_t seed) {
  Rng rng(seed);
  MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

MatrixXd permute_sym(const MatrixXd& b, const std::vector<int>& perm) {
  const int K = static_cast<int>(b.rows());
  MatrixXd out(K, K);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) out(i, j) = b(perm[i], perm[j]);
  return out;
}

// independent exhaustive minimum over relabelings
double brute_loss_b(const MatrixXd& b_hat, const MatrixXd& b_true) {
  std::vector<int> perm(b_hat.rows());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    best = std::min(best, (b_hat - permute_sym(b_true, perm)).norm());
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double brute_loss_theta(const MatrixXd& th_hat, const MatrixXd& th_true) {
  std::vector<int> perm(th_hat.cols());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    MatrixXd permuted(th_true.rows(), th_true.cols());
    for (int k = 0; k < th_true.cols(); ++k)
      permuted.col(k) = th_true.col(perm[k]);
    best = std::min(best, (th_hat - permuted).norm());
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / th_true.norm();
}

}  // namespace

TEST_CASE("community-matrix loss is relabeling invariant") {
  MatrixXd b(3, 3);
  b << 1.0, 0.3, 0.2, 0.3, 0.8, 0.1, 0.2, 0.1, 0.6;
  CHECK(loss_b(b, b).loss == doctest::Approx(0.0));
  // a relabeled copy has zero loss and the inverse permutation is reported
  std::vector<int> perm = {2, 0, 1};
  MatrixXd moved = permute_sym(b, perm);
  PermutedLoss r = loss_b(moved, b);
  CHECK(r.loss == doctest::Approx(0.0).epsilon(1e-14));
  CHECK((permute_sym(b, r.permutation) - moved).cwiseAbs().maxCoeff() <
        1e-14);
  // a perturbation shows up at the right magnitude
  MatrixXd noisy = moved;
  noisy(0, 1) += 0.01;
  noisy(1, 0) += 0.01;
  CHECK(loss_b(noisy, b).loss == doctest::Approx(0.01 * std::sqrt(2.0)));
}

TEST_CASE("community-matrix loss equals the exhaustive minimum") {
  for (int K = 2; K <= 5; ++K)
    for (int trial = 0; trial < 8; ++trial) {
      MatrixXd raw = random_matrix(K, K, 100 * K + trial);
      MatrixXd a = 0.5 * (raw + raw.transpose());
      MatrixXd raw2 = random_matrix(K, K, 900 * K + trial);
      MatrixXd b = 0.5 * (raw2 + raw2.transpose());
      PermutedLoss r = loss_b(a, b);
      CHECK(r.loss == doctest::Approx(brute_loss_b(a, b)).epsilon(1e-12));
      // the reported permutation achieves the reported loss
      CHECK((a - permute_sym(b, r.permutation)).norm() ==
            doctest::Approx(r.loss).epsilon(1e-12));
    }
  MatrixXd big = MatrixXd::Identity(11, 11);
  CHECK_THROWS_AS(loss_b(big, big), Error);          // exact search capped
  CHECK_NOTHROW(loss_b(big, big, /*allow_heuristic=*/true));
}

TEST_CASE("membership loss equals the exhaustive minimum") {
  for (int K = 2; K <= 5; ++K)
    for (int trial = 0; trial < 8; ++trial) {
      MatrixXd a = random_matrix(40, K, 7 * K + trial);
      MatrixXd b = random_matrix(40, K, 5000 + 7 * K + trial);
      PermutedLoss r = loss_theta(a, b);
      CHECK(r.loss == doctest::Approx(brute_loss_theta(a, b)).epsilon(1e-12));
    }
  // permuted copy of itself: exact zero and the permutation is recovered
  MatrixXd th = random_matrix(30, 4, 77);
  MatrixXd shuffled(30, 4);
  std::vector<int> perm = {3, 0, 2, 1};
  for (int k = 0; k < 4; ++k) shuffled.col(k) = th.col(perm[k]);
  PermutedLoss r = loss_theta(shuffled, th);
  CHECK(r.loss == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("assignment solver maximizes total profit") {
  for (int K = 2; K <= 6; ++K)
    for (int trial = 0; trial < 10; ++trial) {
      MatrixXd profit = random_matrix(K, K, 31 * K + trial);
      std::vector<int> got = max_assignment(profit);
      double got_total = 0.0;
      for (int i = 0; i < K; ++i) got_total += profit(i, got[i]);
      // exhaustive maximum
      std::vector<int> perm(K);
      std::iota(perm.begin(), perm.end(), 0);
      double best = -std::numeric_limits<double>::infinity();
      do {
        double tot = 0.0;
        for (int i = 0; i < K; ++i) tot += profit(i, perm[i]);
        best = std::max(best, tot);
      } while (std::next_permutation(perm.begin(), perm.end()));
      CHECK(got_total == doctest::Approx(best).epsilon(1e-12));
      // result is a permutation
      std::vector<int> sorted = got;
      std::sort(sorted.begin(), sorted.end());
      for (int i = 0; i < K; ++i) CHECK(sorted[i] == i);
    }
}

TEST_CASE("log-log slope fit: exact law and closed-form coefficients") {
  // exact power law y = 3 x^-1.25 is recovered to machine precision
  std::vector<std::pair<double, double>> pts;
  for (double x : {10.0, 20.0, 55.0, 90.0, 200.0})
    pts.push_back({x, 3.0 * std::pow(x, -1.25)});
  SlopeFit f = slope_fit(pts);
  CHECK(f.slope == doctest::Approx(-1.25).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-10));
  CHECK(f.stderr_slope == doctest::Approx(0.0).epsilon(1e-9));

  // noisy case against a closed-form least-squares computation
  std::vector<std::pair<double, double>> noisy = {
      {1.0, 2.0}, {2.0, 3.1}, {4.0, 4.4}, {8.0, 6.6}};
  SlopeFit g = slope_fit(noisy);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = 4;
  for (auto& [x, y] : noisy) {
    double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double intercept = (sy - slope * sx) / n;
  CHECK(g.slope == doctest::Approx(slope).epsilon(1e-12));
  CHECK(g.intercept == doctest::Approx(intercept).epsilon(1e-12));
  double rss = 0.0;
  for (auto& [x, y] : noisy) {
    double e = std::log(y) - intercept - slope * std::log(x);
    rss += e * e;
  }
  double se = std::sqrt(rss / (n - 2) / (sxx - sx * sx / n));
  CHECK(g.stderr_slope == doctest::Approx(se).epsilon(1e-10));

  CHECK_THROWS_AS(slope_fit({{1.0, 1.0}}), Error);         // too few points
  CHECK_THROWS_AS(slope_fit({{1.0, -1.0}, {2.0, 1.0}}), Error);  // domain
}
