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
#include "spocpp/lowerbound.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "spocpp/rng.hpp"

namespace spocpp {

namespace {

constexpr std::uint64_t kMaxFactorial = 1000000;  // K! cap for orbit checks

int hamming(const CodeWord& a, const CodeWord& b) {
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

std::vector<std::vector<int>> all_permutations(int K) {
  std::vector<int> sigma(K);
  std::iota(sigma.begin(), sigma.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(sigma);
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return out;
}

double bernoulli_kl(double a, double b) {
  require(!(b <= 0.0 && a > 0.0) && !(b >= 1.0 && a < 1.0), ErrorCode::domain,
          "kl_divergence: reference probability degenerate where the "
          "perturbed one is not");
  double acc = 0.0;
  if (a > 0.0) acc += a * std::log(a / b);
  if (a < 1.0) acc += (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
  return acc;
}

MatrixXd community_bbar(int K, double mu, double n, const CodeWord& omega) {
  MatrixXd bbar = MatrixXd::Constant(K, K, 0.25);
  bbar.diagonal().setConstant(0.5);
  for (int k = 0; k < K; ++k)
    for (int kp = k + 1; kp < K; ++kp)
      if (omega[pair_index(K, k, kp)]) {
        bbar(k, kp) += mu / n;
        bbar(kp, k) += mu / n;
      }
  return bbar;
}

/// Singular values of P = rho Theta bbar Theta^T through the similar
/// symmetric K x K matrix rho G^{1/2} bbar G^{1/2} with G = Theta^T Theta;
/// the nonzero spectra coincide.
VectorXd operator_singular_values(const HardInstance& inst) {
  const int K = inst.theta0.K;
  MatrixXd gram = inst.theta0.rows.transpose() * inst.theta0.rows;
  Eigen::SelfAdjointEigenSolver<MatrixXd> gsolve(gram);
  MatrixXd ghalf = gsolve.operatorSqrt();
  MatrixXd core = inst.rho * ghalf * inst.b_omega.bbar * ghalf;
  Eigen::SelfAdjointEigenSolver<MatrixXd> csolve(core);
  VectorXd sv = csolve.eigenvalues().cwiseAbs();
  std::sort(sv.data(), sv.data() + K, std::greater<double>());
  return sv;
}

VectorXd community_singular_values(const MatrixXd& bbar) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> solve(bbar);
  VectorXd sv = solve.eigenvalues().cwiseAbs();
  std::sort(sv.data(), sv.data() + sv.size(), std::greater<double>());
  return sv;
}

double max_column_variance(const ProbabilityOperator& p) {
  double best = 0.0;
  for (int j = 0; j < p.n(); ++j) {
    VectorXd col = p.row(j);  // symmetric: row j == column j
    double acc = 0.0;
    for (int i = 0; i < p.n(); ++i) acc += col[i] * (1.0 - col[i]);
    best = std::max(best, acc);
  }
  return best;
}

double permuted_frobenius(const MatrixXd& b1, const MatrixXd& b2,
                          const std::vector<int>& sigma) {
  const int K = static_cast<int>(b1.rows());
  double acc = 0.0;
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) {
      double d = b1(sigma[i], sigma[j]) - b2(i, j);
      acc += d * d;
    }
  return std::sqrt(acc);
}

}  // namespace

int pair_count(int K) { return K * (K - 1) / 2; }

int pair_index(int K, int k, int kp) {
  require(0 <= k && k < kp && kp < K, ErrorCode::parameter,
          "pair_index: need 0 <= k < kp < K");
  return k * K - k * (k + 1) / 2 + (kp - k - 1);
}

BinaryCode vg_code(int m, std::uint64_t seed) {
  require(m >= 1, ErrorCode::parameter, "vg_code: word length must be >= 1");
  const int dmin = (m + 7) / 8;
  const std::uint64_t budget =
      m < 20 ? (std::uint64_t{1} << m) : std::uint64_t{1000000};
  const std::uint64_t target =
      dmin < 62 ? std::uint64_t{1} + (std::uint64_t{1} << dmin)
                : std::numeric_limits<std::uint64_t>::max();

  BinaryCode code;
  code.m = m;
  code.words.push_back(CodeWord(m, 0));

  Rng rng(seed);
  auto as_word = [m](std::uint64_t bits) {
    CodeWord w(m);
    for (int i = 0; i < m; ++i) w[i] = (bits >> i) & 1u;
    return w;
  };

  if (m < 20) {
    // exhaustive candidate pool in a seeded random order
    std::vector<std::uint64_t> pool(budget);
    std::iota(pool.begin(), pool.end(), std::uint64_t{0});
    for (std::uint64_t i = budget; i > 1; --i)
      std::swap(pool[i - 1], pool[rng.below(i)]);
    for (std::uint64_t bits : pool) {
      CodeWord cand = as_word(bits);
      bool ok = true;
      for (const CodeWord& w : code.words)
        if (hamming(cand, w) < dmin) {
          ok = false;
          break;
        }
      if (ok) code.words.push_back(std::move(cand));
      if (code.words.size() >= target) break;
    }
  } else {
    for (std::uint64_t it = 0; it < budget && code.words.size() < target;
         ++it) {
      CodeWord cand(m);
      for (int i = 0; i < m; ++i) cand[i] = rng.next_u64() & 1u;
      bool ok = true;
      for (const CodeWord& w : code.words)
        if (hamming(cand, w) < dmin) {
          ok = false;
          break;
        }
      if (ok) code.words.push_back(std::move(cand));
    }
  }

  code.size_target_met = code.words.size() >= target;
  code.min_distance = m;
  for (std::size_t i = 0; i < code.words.size(); ++i)
    for (std::size_t j = i + 1; j < code.words.size(); ++j)
      code.min_distance =
          std::min(code.min_distance, hamming(code.words[i], code.words[j]));
  if (code.words.size() < 2) code.min_distance = 0;
  return code;
}

CodeWord relabel_word(int K, const CodeWord& omega,
                      const std::vector<int>& sigma) {
  const int m = pair_count(K);
  require(static_cast<int>(omega.size()) == m, ErrorCode::parameter,
          "relabel_word: word length mismatch");
  CodeWord out(m);
  for (int k = 0; k < K; ++k)
    for (int kp = k + 1; kp < K; ++kp) {
      int a = sigma[k], b = sigma[kp];
      if (a > b) std::swap(a, b);
      out[pair_index(K, k, kp)] = omega[pair_index(K, a, b)];
    }
  return out;
}

BinaryCode perm_resistant_code(int K, const BinaryCode& base) {
  require(K >= 2, ErrorCode::parameter, "perm_resistant_code: K >= 2");
  const int m = pair_count(K);
  require(base.m == m, ErrorCode::parameter,
          "perm_resistant_code: base word length must be C(K,2)");
  std::uint64_t fact = 1;
  for (int i = 2; i <= K; ++i) {
    fact *= static_cast<std::uint64_t>(i);
    require(fact <= kMaxFactorial, ErrorCode::size,
            "perm_resistant_code: exhaustive orbit checks limited to K <= 9");
  }
  const double threshold = static_cast<double>(m) / 17.0;
  const auto perms = all_permutations(K);
  const CodeWord zero(m, 0);

  BinaryCode out;
  out.m = m;
  for (const CodeWord& cand : base.words) {
    if (cand == zero) continue;
    bool ok = true;
    for (const CodeWord& kept : out.words) {
      for (const auto& sigma : perms) {
        if (hamming(relabel_word(K, kept, sigma), cand) <= threshold) {
          ok = false;
          break;
        }
      }
      if (!ok) break;
    }
    if (ok) out.words.push_back(cand);
  }
  out.words.push_back(zero);
  out.size_target_met = base.size_target_met;

  // exhaustive certification of the permuted-distance floor
  int certified = m;
  for (std::size_t i = 0; i < out.words.size(); ++i)
    for (std::size_t j = 0; j < out.words.size(); ++j) {
      if (i == j) continue;
      for (const auto& sigma : perms)
        certified = std::min(
            certified, hamming(relabel_word(K, out.words[i], sigma),
                               out.words[j]));
    }
  if (out.words.size() < 2) certified = 0;
  out.min_distance = certified;
  return out;
}

std::vector<int> hard_pure_counts(int K, int n) {
  require(K >= 2, ErrorCode::parameter, "hard_pure_counts: K >= 2");
  const double c = 1.0 - std::ldexp(1.0, -(K + 5));
  std::vector<int> counts(K);
  for (int k = 1; k <= K; ++k) {
    double factor;
    if (k <= K - 2)
      factor = std::ldexp(1.0, -k);
    else if (k == K - 1)
      factor = 1.5 * std::ldexp(1.0, -(K - 1));
    else
      factor = std::ldexp(1.0, -K);
    counts[k - 1] = static_cast<int>(std::ceil(c * n * factor));
  }
  return counts;
}

double hard_mu(int K, double rho) {
  require(K >= 2, ErrorCode::parameter, "hard_mu: K >= 2");
  require(rho > 0.0 && rho <= 1.0, ErrorCode::parameter,
          "hard_mu: rho in (0, 1]");
  if (K >= 512) return K / (96.0 * std::sqrt(rho));
  return K * std::sqrt(2.0) / (1152.0 * std::sqrt(rho));
}

HardInstance hard_instance(int K, int n, double rho, const CodeWord& omega) {
  require(K >= 2, ErrorCode::parameter, "hard_instance: K >= 2");
  require(static_cast<int>(omega.size()) == pair_count(K),
          ErrorCode::parameter, "hard_instance: word length must be C(K,2)");
  require(rho > 0.0 && rho <= 1.0, ErrorCode::parameter,
          "hard_instance: rho in (0, 1]");
  require(rho > std::pow(static_cast<double>(n), -1.0 / 3.0),
          ErrorCode::parameter, "hard_instance: need rho > n^{-1/3}");
  const double mu = hard_mu(K, rho);
  require(mu < n / (8.0 * K), ErrorCode::parameter,
          "hard_instance: need mu < n/(8K)");

  std::vector<int> counts = hard_pure_counts(K, n);
  int n_pure = std::accumulate(counts.begin(), counts.end(), 0);
  require(n_pure <= n, ErrorCode::parameter,
          "hard_instance: pure-count schedule exceeds n (n too small for K)");
  const int n_mix = n - n_pure;

  HardInstance inst;
  inst.mu = mu;
  inst.rho = rho;
  inst.pure_counts = counts;
  inst.n_mix = n_mix;

  MembershipMatrix theta;
  theta.n = n;
  theta.K = K;
  theta.rows = MatrixXd::Zero(n, K);
  theta.pure_sets.resize(K);
  int at = 0;
  for (int k = 0; k < K; ++k)
    for (int c = 0; c < counts[k]; ++c, ++at) {
      theta.rows(at, k) = 1.0;
      theta.pure_sets[k].push_back(at);
    }
  for (; at < n; ++at) theta.rows.row(at).setConstant(1.0 / K);
  theta.validate();
  inst.theta0 = std::move(theta);

  inst.b_omega = CommunityMatrix(
      rho, community_bbar(K, mu, static_cast<double>(n), omega),
      /*normalized=*/false);
  return inst;
}

double kl_divergence(const ProbabilityOperator& p1,
                     const ProbabilityOperator& p0) {
  require(p1.n() == p0.n(), ErrorCode::parameter,
          "kl_divergence: operators must share n");
  double acc = 0.0;
  for (int i = 0; i < p1.n(); ++i) {
    VectorXd r1 = p1.row(i);
    VectorXd r0 = p0.row(i);
    for (int j = i; j < p1.n(); ++j) acc += bernoulli_kl(r1[j], r0[j]);
  }
  return acc;
}

bool LowerBoundReport::all_pass() const {
  for (const auto& c : claims)
    if (!c.pass) return false;
  return true;
}

std::string LowerBoundReport::to_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\n  \"K\": " << K << ",\n  \"n\": " << n << ",\n  \"rho\": " << rho
     << ",\n  \"mu\": " << mu << ",\n  \"branch\": \"" << branch
     << "\",\n  \"all_pass\": " << (all_pass() ? "true" : "false")
     << ",\n  \"claims\": [\n";
  for (std::size_t i = 0; i < claims.size(); ++i) {
    const auto& c = claims[i];
    os << "    {\"claim\": \"" << c.claim << "\", \"status\": \""
       << (c.pass ? "pass" : "fail") << "\", \"lhs\": " << c.lhs
       << ", \"rhs\": " << c.rhs << "}" << (i + 1 < claims.size() ? "," : "")
       << "\n";
  }
  os << "  ]\n}\n";
  return os.str();
}

LowerBoundReport certify_lower_bound(int K, int n, double rho, std::uint64_t seed) {
  require(K >= 2 && K <= 9, ErrorCode::size,
          "certify_lower_bound: exhaustive permutation checks limited to K <= 9");
  const int m = pair_count(K);
  const double mu = hard_mu(K, rho);
  const double nd = static_cast<double>(n);

  LowerBoundReport rep;
  rep.K = K;
  rep.n = n;
  rep.rho = rho;
  rep.mu = mu;
  rep.branch = K >= 512 ? "code-family" : "two-point";
  auto claim = [&rep](const std::string& name, double lhs, double rhs,
                      bool pass) {
    rep.claims.push_back({name, pass, lhs, rhs});
  };

  claim("mu-upper-bound", mu, nd / (8.0 * K), mu < nd / (8.0 * K));

  // hypothesis family: permutation-resistant code plus the maximal-weight
  // word used by the two-hypothesis branch
  BinaryCode code = perm_resistant_code(K, vg_code(m, seed));
  const CodeWord ones(m, 1);
  std::vector<CodeWord> family = code.words;
  if (std::find(family.begin(), family.end(), ones) == family.end())
    family.push_back(ones);

  std::vector<HardInstance> instances;
  instances.reserve(family.size());
  for (const CodeWord& w : family) instances.push_back(hard_instance(K, n, rho, w));
  const HardInstance& inst0 =
      instances[std::find(family.begin(), family.end(), CodeWord(m, 0)) -
                family.begin()];

  // pure-count schedule and mass floors (identical across the family)
  {
    std::vector<int> expect = hard_pure_counts(K, n);
    double dev = 0.0;
    for (int k = 0; k < K; ++k)
      dev = std::max(dev,
                     std::abs(static_cast<double>(inst0.pure_counts[k]) -
                              static_cast<double>(expect[k])));
    claim("pure-count-schedule", dev, 0.0, dev == 0.0);

    int min_count =
        *std::min_element(inst0.pure_counts.begin(), inst0.pure_counts.end());
    double floor = (1.0 - std::ldexp(1.0, -(K + 5))) * std::ldexp(nd, -K);
    claim("pure-count-floor", static_cast<double>(min_count), floor,
          min_count >= floor);

    double mix_cap = std::ldexp(nd, -(K + 5));
    claim("mixed-count-bound", static_cast<double>(inst0.n_mix), mix_cap,
          inst0.n_mix <= mix_cap);
  }

  // near-pure impostor count with delta = 1: mixed rows sit at distance
  // sqrt(1 - 1/K) from every vertex, which must exceed the radius
  {
    double radius = std::sqrt(std::log(nd) / (nd * rho));
    double dist = std::sqrt(1.0 - 1.0 / K);
    double indicator_sum = dist <= radius ? static_cast<double>(inst0.n_mix)
                                          : 0.0;
    claim("near-pure-impostor-sum", indicator_sum, 0.0, indicator_sum == 0.0);
  }

  // spectral floors, gap ratios, and variance floors per family member
  {
    double min_sv = std::numeric_limits<double>::infinity();
    double min_ratio = std::numeric_limits<double>::infinity();
    double min_var = std::numeric_limits<double>::infinity();
    for (const auto& inst : instances) {
      VectorXd bsv = community_singular_values(inst.b_omega.bbar);
      min_sv = std::min(min_sv, bsv[K - 1]);
      VectorXd psv = operator_singular_values(inst);
      for (int k = 0; k + 1 < K; ++k)
        min_ratio = std::min(min_ratio, psv[k] / psv[k + 1]);
      ProbabilityOperator p(inst.theta0, inst.b_omega);
      min_var = std::min(min_var, max_column_variance(p));
    }
    claim("community-singular-floor", min_sv, 0.125, min_sv >= 0.125);
    claim("operator-gap-ratio", min_ratio, 1.2, min_ratio >= 1.2);
    claim("column-variance-floor", min_var, nd * rho / 16.0,
          min_var >= nd * rho / 16.0);
  }

  const auto perms = all_permutations(K);

  // Frobenius distance vs Hamming distance identity
  // ||Pi bbar(w1) Pi^T - bbar(w2)||_F = (mu/n) sqrt(2 d_H(T_Pi(w1), w2)),
  // exhaustive over family pairs and permutations
  {
    double max_dev = 0.0;
    for (std::size_t i = 0; i < family.size(); ++i)
      for (std::size_t j = 0; j < family.size(); ++j) {
        if (i == j) continue;
        for (const auto& sigma : perms) {
          double fro = permuted_frobenius(instances[i].b_omega.bbar,
                                          instances[j].b_omega.bbar, sigma);
          int dh = hamming(relabel_word(K, family[i], sigma), family[j]);
          max_dev = std::max(
              max_dev, std::abs(fro - (mu / nd) * std::sqrt(2.0 * dh)));
        }
      }
    claim("frobenius-hamming-identity", max_dev, 1e-12, max_dev <= 1e-12);
  }

  // certified permuted Hamming floor of the code itself
  claim("code-permuted-distance", static_cast<double>(code.min_distance),
        static_cast<double>(m) / 17.0,
        code.min_distance > static_cast<double>(m) / 17.0);

  // code-family separation: min over distinct pairs and permutations
  {
    double min_sep = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < code.words.size(); ++i)
      for (std::size_t j = 0; j < code.words.size(); ++j) {
        if (i == j) continue;
        MatrixXd bi = community_bbar(K, mu, nd, code.words[i]);
        MatrixXd bj = community_bbar(K, mu, nd, code.words[j]);
        for (const auto& sigma : perms)
          min_sep = std::min(min_sep, permuted_frobenius(bi, bj, sigma));
      }
    double bound = mu * K / (std::sqrt(34.0) * nd);
    claim("code-family-separation", min_sep, bound, min_sep >= bound);
  }

  // two-hypothesis separation: zero word vs the maximal-weight word
  {
    MatrixXd b0 = community_bbar(K, mu, nd, CodeWord(m, 0));
    MatrixXd b1 = community_bbar(K, mu, nd, ones);
    double min_sep = std::numeric_limits<double>::infinity();
    for (const auto& sigma : perms)
      min_sep = std::min(min_sep, permuted_frobenius(b0, b1, sigma));
    double bound = mu * K / (std::sqrt(2.0) * nd);
    claim("two-point-separation", min_sep, bound, min_sep >= bound);
  }

  // KL bounds via exact summation against the zero-word hypothesis
  {
    ProbabilityOperator p0(inst0.theta0, inst0.b_omega);
    double max_kl = 0.0;
    double kl_ones = 0.0;
    for (std::size_t i = 0; i < family.size(); ++i) {
      if (family[i] == CodeWord(m, 0)) continue;
      ProbabilityOperator pi(instances[i].theta0, instances[i].b_omega);
      double kl = kl_divergence(pi, p0);
      max_kl = std::max(max_kl, kl);
      if (family[i] == ones) kl_ones = kl;
    }
    double bound = 8.0 * mu * mu * rho;
    claim("kl-upper-bound", max_kl, bound, max_kl <= bound);
    if (K < 512)
      claim("two-point-kl-constant", kl_ones, 3.2, kl_ones <= 3.2);
  }

  return rep;
}

}  // namespace spocpp
