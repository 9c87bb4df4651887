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
#include <optional>
#include <string>
#include <vector>

#include "spocpp/estimators.hpp"
#include "spocpp/model.hpp"

namespace spocpp {

enum class ExperimentKind { n_sweep, rho_sweep, compare, stat_dist, lowerbound };

/// Monte-Carlo experiment description. Loaded from a flat TOML-style config
/// (key = value, '#' comments, [numeric, arrays]); CLI flags override fields
/// after parsing.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::n_sweep;
  int K = 3;
  std::vector<double> grid;  // n values (n-sweep/compare/stat-dist) or rho
  int reps = 1;
  double pure_fraction = 0.09;  // per community
  std::vector<double> alpha;    // Dirichlet; defaults to all-ones
  double rho = 1.0;             // fixed rho for n-indexed experiments
  int n = 1000;                 // fixed n for the rho sweep
  double b_diag = 1.0;
  double b_offdiag = 0.3;
  // diagonal decrement per community; distinct diagonal entries keep the
  // operator eigenvalues separated, which the estimator's eigenvector
  // debiasing needs. < 0: (b_diag - b_offdiag) / (2 (K - 1)).
  double b_diag_step = -1.0;
  std::optional<double> threshold;  // pure-set cutoff; default 2 ln n
  RegMode a_mode = RegMode::zero;
  double a_value = 0.0;
  std::optional<int> fixed_k;  // skip rank estimation when set
  bool clip_theta = false;
  bool signed_rank = true;
  bool include_baseline = true;   // also run the plain vertex-hunting variant
  bool resample_theta = false;    // new membership per replicate
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string output_dir = ".";
  bool emit_plot = true;
  // lowerbound kind
  int lb_K = 3;
  int lb_n = 256;
  double lb_rho = 1.0;

  void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

struct RunResult {
  bool ok = true;              // false iff any lower-bound claim fails
  std::string csv_path;        // empty when not produced
  std::string summary_path;
  std::string plot_path;
  std::string summary_json;    // inline copy of the summary document
};

/// Per-replicate seed stream: splitmix-style finalizer over
/// (base ^ grid_index-block ^ rep-block); see rng.hpp for the constants.
std::uint64_t experiment_seed(const ExperimentConfig& cfg, int grid_index,
                              int rep);

RunResult run_n_sweep(const ExperimentConfig& cfg);
RunResult run_rho_sweep(const ExperimentConfig& cfg);
RunResult run_compare(const ExperimentConfig& cfg);
RunResult run_stat_dist(const ExperimentConfig& cfg);
RunResult run_lowerbound(const ExperimentConfig& cfg);
RunResult run_experiment(const ExperimentConfig& cfg);

/// FNV-1a over the edge list; audits that paired algorithms consumed the
/// same adjacency bits.
std::uint64_t graph_hash(const SparseGraph& g);

}  // namespace spocpp
