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

#include <cstdint>
#include <string>
#include <vector>

#include "spocpp/model.hpp"

namespace spocpp {

using CodeWord = std::vector<std::uint8_t>;  // {0,1} entries, length C(K,2)

/// Binary code over words indexed by 2-subsets of [K]; always contains the
/// all-zeros word, with the pairwise Hamming floor certified exhaustively at
/// construction.
struct BinaryCode {
  int m = 0;
  std::vector<CodeWord> words;
  int min_distance = 0;
  bool size_target_met = true;
};

/// Hard-instance family member: geometric pure-node schedule, uniform mixed
/// rows, and the perturbed community matrix for a code word.
struct HardInstance {
  MembershipMatrix theta0;
  CommunityMatrix b_omega;  // non-normalized form (max entry 1/2)
  double mu = 0.0;
  double rho = 1.0;
  std::vector<int> pure_counts;
  int n_mix = 0;
};

int pair_count(int K);  // C(K, 2)
int pair_index(int K, int k, int kp);

/// Greedy Hamming packing: starts from the zero word, accepts a candidate
/// from a seeded enumeration iff its distance to every accepted word is
/// >= ceil(m/8). Enumeration budget min(2^m, 10^6); if the size target
/// 1 + 2^ceil(m/8) is not reached the achieved (still valid) code is
/// returned with size_target_met = false.
BinaryCode vg_code(int m, std::uint64_t seed);

/// Relabeling a community permutation acts on code words by permuting pair
/// indices; returns the word of B^-1(Pi B(omega) Pi^T).
CodeWord relabel_word(int K, const CodeWord& omega,
                      const std::vector<int>& sigma);

/// Greedy filtering of a base code so that words stay Hamming-separated
/// under every community relabeling (threshold C(K,2)/17); the zero word is
/// appended last. min_distance on the result is the certified minimum
/// *permuted* distance over all pairs and all K! permutations.
BinaryCode perm_resistant_code(int K, const BinaryCode& base);

/// Geometric pure-count schedule used by the hard instances.
std::vector<int> hard_pure_counts(int K, int n);

/// Perturbation scale: K rho^{-1/2}/96 for K >= 512, K rho^{-1/2} sqrt(2)/1152
/// for 2 <= K <= 511.
double hard_mu(int K, double rho);

HardInstance hard_instance(int K, int n, double rho, const CodeWord& omega);

/// Exact sum of Bernoulli KL terms over unordered pairs (diagonal included).
double kl_divergence(const ProbabilityOperator& p1,
                     const ProbabilityOperator& p0);

struct ClaimResult {
  std::string claim;
  bool pass = false;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct LowerBoundReport {
  int K = 0;
  int n = 0;
  double rho = 1.0;
  double mu = 0.0;
  std::string branch;  // "two-point" or "code-family"
  std::vector<ClaimResult> claims;

  bool all_pass() const;
  std::string to_json() const;
};

/// Builds the hard-instance family and numerically certifies every claimed
/// property: singular-value floors, spectral-gap ratios, pure-count
/// schedule, separation identities, and the KL bound. Failures land in the
/// report, not in exceptions.
LowerBoundReport certify_lower_bound(int K, int n, double rho,
                               std::uint64_t seed = 12345);

}  // namespace spocpp
