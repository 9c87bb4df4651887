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
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "spocpp/harness.hpp"

namespace fs = std::filesystem;
using namespace spocpp;
using nlohmann::json;

namespace {

std::string fresh_dir(const char* stem) {
  fs::path p = fs::temp_directory_path() /
               (std::string("spocpp_harness_") + stem);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// blank the elapsed_ms column so timing noise cannot break byte comparisons
std::string strip_timing(const std::string& csv, int elapsed_col) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!first) {
      std::istringstream cells(line);
      std::string cell;
      int idx = 0;
      std::string rebuilt;
      while (std::getline(cells, cell, ',')) {
        if (idx == elapsed_col) cell = "-";
        rebuilt += (idx ? "," : "") + cell;
        ++idx;
      }
      line = rebuilt;
    }
    first = false;
    out << line << '\n';
  }
  return out.str();
}

const char* tiny_n_sweep = R"(
kind = "n-sweep"
K = 2
grid = [70, 100]
reps = 2
pure_fraction = 0.12
rho = 1.0
b_diag = 1.0
b_offdiag = 0.1
seed = 5
emit_plot = true
)";

}  // namespace

TEST_CASE("config parser: values, arrays, comments, overrides") {
  ExperimentConfig cfg = parse_config(R"(
# full-line comment
kind = "rho-sweep"   # trailing comment
K = 4
n = 500
grid = [0.1, 0.5, 1.0]
reps = 7
pure_fraction = 0.11
alpha = [0.5, 1.0, 1.5, 2.0]
b_diag = 0.9
b_offdiag = 0.2
b_diag_step = 0.05
threshold = 9.5
a = "spectral"
k = 4
clip_theta = true
signed_rank = false
include_baseline = false
resample_theta = true
seed = 99
jobs = 3
output_dir = "/tmp/x"
emit_plot = false
)");
  CHECK(cfg.kind == ExperimentKind::rho_sweep);
  CHECK(cfg.K == 4);
  CHECK(cfg.n == 500);
  REQUIRE(cfg.grid.size() == 3);
  CHECK(cfg.grid[1] == doctest::Approx(0.5));
  CHECK(cfg.reps == 7);
  CHECK(cfg.pure_fraction == doctest::Approx(0.11));
  REQUIRE(cfg.alpha.size() == 4);
  CHECK(cfg.alpha[3] == doctest::Approx(2.0));
  CHECK(cfg.b_diag == doctest::Approx(0.9));
  CHECK(cfg.b_diag_step == doctest::Approx(0.05));
  REQUIRE(cfg.threshold.has_value());
  CHECK(*cfg.threshold == doctest::Approx(9.5));
  CHECK(cfg.a_mode == RegMode::spectral);
  REQUIRE(cfg.fixed_k.has_value());
  CHECK(*cfg.fixed_k == 4);
  CHECK(cfg.clip_theta);
  CHECK_FALSE(cfg.signed_rank);
  CHECK_FALSE(cfg.include_baseline);
  CHECK(cfg.resample_theta);
  CHECK(cfg.seed == 99);
  CHECK(cfg.jobs == 3);
  CHECK(cfg.output_dir == "/tmp/x");
  CHECK_FALSE(cfg.emit_plot);
  cfg.validate();

  // later assignments win: appended override lines replace earlier values
  ExperimentConfig ov = parse_config(std::string(tiny_n_sweep) +
                                     "\nseed = 123\nreps = 9\n");
  CHECK(ov.seed == 123);
  CHECK(ov.reps == 9);

  CHECK_THROWS_AS(parse_config("no_such_key = 1\n"), Error);
  CHECK_THROWS_AS(parse_config("kind = \"mystery\"\n"), Error);
  CHECK_THROWS_AS(parse_config("K = \n"), Error);
}

TEST_CASE("config validation rejects malformed experiments") {
  ExperimentConfig cfg = parse_config(tiny_n_sweep);
  cfg.validate();
  auto expect_invalid = [&](auto&& tweak) {
    ExperimentConfig bad = cfg;
    tweak(bad);
    CHECK_THROWS_AS(bad.validate(), Error);
  };
  expect_invalid([](ExperimentConfig& c) { c.grid.clear(); });
  expect_invalid([](ExperimentConfig& c) { c.grid = {100, 100}; });
  expect_invalid([](ExperimentConfig& c) { c.grid = {100, 70}; });
  expect_invalid([](ExperimentConfig& c) { c.grid = {70.5, 100}; });
  expect_invalid([](ExperimentConfig& c) { c.reps = 0; });
  expect_invalid([](ExperimentConfig& c) { c.jobs = 0; });
  expect_invalid([](ExperimentConfig& c) { c.K = 0; });
  expect_invalid([](ExperimentConfig& c) { c.K = 65; });
  expect_invalid([](ExperimentConfig& c) { c.b_offdiag = 1.5; });
  expect_invalid([](ExperimentConfig& c) {
    // stepped diagonal must stay above the off-diagonal
    c.b_diag = 0.5;
    c.b_offdiag = 0.45;
    c.b_diag_step = 0.3;
  });
  expect_invalid([](ExperimentConfig& c) {
    c.kind = ExperimentKind::rho_sweep;
    c.grid = {0.5, 1.2};  // rho beyond 1
  });
}

TEST_CASE("replicate seeds: deterministic, distinct across the grid") {
  ExperimentConfig cfg = parse_config(tiny_n_sweep);
  CHECK(experiment_seed(cfg, 0, 0) == experiment_seed(cfg, 0, 0));
  CHECK(experiment_seed(cfg, 0, 0) != experiment_seed(cfg, 0, 1));
  CHECK(experiment_seed(cfg, 0, 0) != experiment_seed(cfg, 1, 0));
  ExperimentConfig other = cfg;
  other.seed = 6;
  CHECK(experiment_seed(cfg, 0, 0) != experiment_seed(other, 0, 0));
}

TEST_CASE("size sweep: files, schema, reruns identical, jobs-invariant") {
  ExperimentConfig cfg = parse_config(tiny_n_sweep);
  cfg.output_dir = fresh_dir("nsweep_a");
  RunResult r1 = run_n_sweep(cfg);
  CHECK(r1.ok);
  REQUIRE(fs::exists(r1.csv_path));
  REQUIRE(fs::exists(r1.summary_path));
  REQUIRE(fs::exists(r1.plot_path));  // emit_plot = true

  std::string csv = read_file(r1.csv_path);
  CHECK(csv.rfind("n,rep,seed,algorithm,loss_b,loss_theta,k_hat,elapsed_ms,"
                  "status\n", 0) == 0);
  // 2 grid points x 2 reps x 2 algorithms data lines
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 2 * 2);

  json summary = json::parse(r1.summary_json);
  CHECK(summary["kind"] == "n-sweep");
  CHECK(summary["points"].size() == 2 * 2);  // per (n, algorithm)
  CHECK(summary["reference_slope"] == -1.0);
  CHECK_FALSE(summary["slope"].is_null());

  // independent rerun: identical bytes apart from timings
  ExperimentConfig cfg2 = cfg;
  cfg2.output_dir = fresh_dir("nsweep_b");
  RunResult r2 = run_n_sweep(cfg2);
  CHECK(strip_timing(read_file(r2.csv_path), 7) == strip_timing(csv, 7));

  // worker count must not alter results
  ExperimentConfig cfg3 = cfg;
  cfg3.jobs = 3;
  cfg3.output_dir = fresh_dir("nsweep_c");
  RunResult r3 = run_n_sweep(cfg3);
  CHECK(strip_timing(read_file(r3.csv_path), 7) == strip_timing(csv, 7));
}

TEST_CASE("density sweep couples replicates across rho") {
  ExperimentConfig cfg = parse_config(R"(
kind = "rho-sweep"
K = 2
n = 90
grid = [0.3, 0.6, 1.0]
reps = 2
pure_fraction = 0.12
b_diag = 1.0
b_offdiag = 0.1
seed = 3
emit_plot = false
)");
  cfg.output_dir = fresh_dir("rho");
  RunResult r = run_rho_sweep(cfg);
  CHECK(r.ok);
  std::string csv = read_file(r.csv_path);
  CHECK(csv.rfind("rho,rep,seed,algorithm,loss_b,loss_theta,k_hat,elapsed_ms,"
                  "status,nested\n", 0) == 0);
  CHECK(csv.find("false") == std::string::npos);  // every edge set nested
  json summary = json::parse(r.summary_json);
  CHECK(summary["nested_all"] == true);
  CHECK(summary["reference_slope"] == 0.5);
  // the replicate seed is shared across the rho grid (that is the coupling)
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);  // header
  std::vector<std::string> seeds_rep0;
  while (std::getline(lines, line)) {
    std::istringstream cells(line);
    std::string rho_s, rep_s, seed_s;
    std::getline(cells, rho_s, ',');
    std::getline(cells, rep_s, ',');
    std::getline(cells, seed_s, ',');
    if (rep_s == "0") seeds_rep0.push_back(seed_s);
  }
  REQUIRE(!seeds_rep0.empty());
  for (const std::string& s : seeds_rep0) CHECK(s == seeds_rep0.front());
}

TEST_CASE("paired comparison audits shared graphs and counts wins") {
  ExperimentConfig cfg = parse_config(R"(
kind = "compare"
K = 2
grid = [120]
reps = 3
pure_fraction = 0.12
b_diag = 1.0
b_offdiag = 0.1
seed = 11
emit_plot = false
)");
  cfg.output_dir = fresh_dir("compare");
  RunResult r = run_compare(cfg);
  CHECK(r.ok);
  std::string csv = read_file(r.csv_path);
  CHECK(csv.rfind("n,rep,seed,algorithm,graph_hash,", 0) == 0);
  json summary = json::parse(r.summary_json);
  REQUIRE(summary["paired_wins"].size() == 1);
  CHECK(summary["paired_wins"][0]["n"] == 120);
  CHECK(summary["paired_wins"][0]["paired_reps"] == 3);
  int wins = summary["paired_wins"][0]["improved_wins_loss_b"];
  CHECK(wins >= 0);
  CHECK(wins <= 3);
  // both algorithm rows of a replicate carry the same graph hash
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  std::string last_rep, last_hash;
  while (std::getline(lines, line)) {
    std::istringstream cells(line);
    std::string n_s, rep_s, seed_s, algo_s, hash_s;
    std::getline(cells, n_s, ',');
    std::getline(cells, rep_s, ',');
    std::getline(cells, seed_s, ',');
    std::getline(cells, algo_s, ',');
    std::getline(cells, hash_s, ',');
    if (rep_s == last_rep) CHECK(hash_s == last_hash);
    last_rep = rep_s;
    last_hash = hash_s;
  }
}

TEST_CASE("statistic-distribution run emits ranked statistics per size") {
  ExperimentConfig cfg = parse_config(R"(
kind = "stat-dist"
K = 2
grid = [130]
reps = 1
pure_fraction = 0.12
b_diag = 1.0
b_offdiag = 0.1
seed = 2
emit_plot = false
)");
  cfg.output_dir = fresh_dir("statdist");
  RunResult r = run_stat_dist(cfg);
  CHECK(r.ok);
  std::string csv = read_file(r.csv_path);
  CHECK(csv.rfind("n,rank,node,t_stat,cdf,pure_fraction_ref\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 130);
  json summary = json::parse(r.summary_json);
  REQUIRE(summary["points"].size() == 1);
  double frac = summary["points"][0]["fraction_below_threshold"];
  CHECK(frac > 0.0);
  CHECK(frac <= 1.0);
}

TEST_CASE("lower-bound run reports certified claims through the harness") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::lowerbound;
  cfg.lb_K = 3;
  cfg.lb_n = 256;
  cfg.lb_rho = 1.0;
  cfg.output_dir = fresh_dir("lb");
  RunResult r = run_experiment(cfg);
  CHECK(r.ok);
  json doc = json::parse(r.summary_json);
  CHECK(doc["K"] == 3);
  CHECK(doc["claims"].size() >= 10);
}

TEST_CASE("graph hashes detect different edge sets") {
  ExperimentConfig cfg = parse_config(tiny_n_sweep);
  MembershipMatrix th = make_membership(60, 2, 0.12, {1.0, 1.0}, 4);
  MatrixXd bbar = MatrixXd::Constant(2, 2, 0.1);
  bbar(0, 0) = 1.0;
  bbar(1, 1) = 0.8;
  ProbabilityOperator p(th, CommunityMatrix(1.0, bbar));
  SparseGraph g1 = sample_graph(p, 1);
  SparseGraph g2 = sample_graph(p, 1);
  SparseGraph g3 = sample_graph(p, 2);
  CHECK(graph_hash(g1) == graph_hash(g2));
  CHECK(graph_hash(g1) != graph_hash(g3));
}
