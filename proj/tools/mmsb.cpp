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

// mmsb: command-line front end over the spocpp shared library (C API only).
// Exit codes: 0 success, 2 configuration error, 3 estimation failure,
// 4 lower-bound claim failure.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "spocpp/spocpp.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitEstimation = 3;
constexpr int kExitClaims = 4;

int status_to_exit(spocpp_status st) {
  if (st == SPOCPP_OK) return 0;
  switch (st) {
    case SPOCPP_ERR_PARAMETER:
    case SPOCPP_ERR_SIZE:
    case SPOCPP_ERR_DOMAIN:
      return kExitConfig;
    default:
      return kExitEstimation;
  }
}

int report_failure(spocpp_status st) {
  std::cerr << "error: " << spocpp_last_error() << "\n";
  return status_to_exit(st);
}

struct CommonFlags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> out;
  std::optional<int> k;
  std::optional<double> threshold;
  std::optional<std::string> reg;
  bool clip_theta = false;
  bool abs_rank = false;
  bool signed_rank_flag = false;
};

void add_estimator_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--k", f.k, "fix the number of communities");
  cmd->add_option("--threshold", f.threshold,
                  "pure-set selection cutoff t_n (default 2 ln n)");
  cmd->add_option("--reg", f.reg,
                  "covariance regularizer: zero | spectral | <float>");
  cmd->add_flag("--clip-theta", f.clip_theta,
                "project membership rows onto the probability simplex");
  cmd->add_flag("--signed-rank", f.signed_rank_flag,
                "rank estimation on the signed spectrum (default)");
  cmd->add_flag("--abs-rank", f.abs_rank,
                "rank estimation on the |eigenvalue| spectrum");
}

bool parse_reg(const std::string& reg, int& mode, double& value) {
  if (reg == "zero") {
    mode = 0;
    return true;
  }
  if (reg == "spectral") {
    mode = 1;
    return true;
  }
  try {
    std::size_t at = 0;
    value = std::stod(reg, &at);
    if (at != reg.size()) return false;
    mode = 2;
    return true;
  } catch (...) {
    return false;
  }
}

/// Translates flags into config-document override lines (appended after the
/// file, so they win).
std::string override_lines(const CommonFlags& f, const std::string& kind) {
  std::ostringstream os;
  os.precision(17);
  os << "kind = \"" << kind << "\"\n";
  if (f.seed) os << "seed = " << *f.seed << "\n";
  if (f.jobs) os << "jobs = " << *f.jobs << "\n";
  if (f.out) os << "output_dir = \"" << *f.out << "\"\n";
  if (f.k) os << "k = " << *f.k << "\n";
  if (f.threshold) os << "threshold = " << *f.threshold << "\n";
  if (f.reg) {
    int mode = 0;
    double value = 0.0;
    if (!parse_reg(*f.reg, mode, value)) {
      throw CLI::ValidationError("--reg",
                                 "expects zero, spectral, or a float");
    }
    if (mode == 0) os << "a = \"zero\"\n";
    else if (mode == 1) os << "a = \"spectral\"\n";
    else os << "a = " << value << "\n";
  }
  if (f.clip_theta) os << "clip_theta = true\n";
  if (f.abs_rank) os << "signed_rank = false\n";
  if (f.signed_rank_flag) os << "signed_rank = true\n";
  return os.str();
}

int run_experiment_cmd(const CommonFlags& f, const std::string& kind) {
  std::string text;
  if (f.config) {
    std::ifstream in(*f.config, std::ios::binary);
    if (!in.good()) {
      std::cerr << "error: cannot open config: " << *f.config << "\n";
      return kExitConfig;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  std::string overrides = override_lines(f, kind);
  int all_pass = 1;
  char* summary = nullptr;
  spocpp_status st =
      spocpp_run_experiment(text.c_str(), overrides.c_str(), &all_pass,
                            &summary);
  if (st != SPOCPP_OK) return report_failure(st);
  if (summary != nullptr) {
    std::cout << summary;
    spocpp_string_free(summary);
  }
  if (kind == "lowerbound" && all_pass == 0) return kExitClaims;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-membership block model generation, spectral "
               "estimation, and experiment harness"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate",
                                 "sample a planted instance to disk");
  int g_n = 1000, g_K = 3;
  double g_pf = 0.09, g_rho = 1.0, g_bd = 1.0, g_bo = 0.3;
  std::uint64_t g_seed = 1;
  std::string g_out = "instance";
  gen->add_option("--n", g_n, "number of nodes");
  gen->add_option("--communities", g_K, "number of communities");
  gen->add_option("--pure-fraction", g_pf, "pure fraction per community");
  gen->add_option("--rho", g_rho, "sparsity scale in (0, 1]");
  gen->add_option("--b-diag", g_bd, "community matrix diagonal");
  gen->add_option("--b-offdiag", g_bo, "community matrix off-diagonal");
  gen->add_option("--seed", g_seed, "RNG seed");
  gen->add_option("--out", g_out,
                  "output prefix (<out>.graph, <out>.theta.csv)");

  // estimate
  auto* est = app.add_subcommand("estimate",
                                 "estimate memberships from a graph file");
  std::string e_graph;
  bool e_baseline = false;
  CommonFlags e_flags;
  est->add_option("graph", e_graph, "edge-list graph file")->required();
  est->add_option("--out", e_flags.out,
                  "output prefix (<out>.theta.csv, <out>.b.csv, <out>.json)");
  est->add_flag("--baseline", e_baseline,
                "plain vertex-hunting estimator (no debiasing/averaging)");
  add_estimator_flags(est, e_flags);

  // experiment subcommands
  struct ExpCmd {
    const char* name;
    const char* kind;
    const char* help;
    CommonFlags flags;
    CLI::App* cmd = nullptr;
  };
  ExpCmd experiments[] = {
      {"sweep-n", "n-sweep", "error-vs-n Monte-Carlo sweep", {}, nullptr},
      {"sweep-rho", "rho-sweep", "error-vs-rho sweep with coupled sampling",
       {}, nullptr},
      {"compare", "compare", "paired baseline-vs-improved comparison", {},
       nullptr},
      {"stat-dist", "stat-dist",
       "distribution of the pure-node test statistic", {}, nullptr},
  };
  for (auto& e : experiments) {
    e.cmd = app.add_subcommand(e.name, e.help);
    e.cmd->add_option("--config", e.flags.config, "experiment config file");
    e.cmd->add_option("--seed", e.flags.seed, "base RNG seed");
    e.cmd->add_option("--jobs", e.flags.jobs, "max concurrent replicates");
    e.cmd->add_option("--out", e.flags.out, "output directory");
    add_estimator_flags(e.cmd, e.flags);
  }

  // lowerbound-check
  auto* lb = app.add_subcommand(
      "lowerbound-check", "certify the minimax hard-instance construction");
  int lb_K = 3, lb_n = 256;
  double lb_rho = 1.0;
  std::uint64_t lb_seed = 12345;
  std::string lb_out;
  lb->add_option("--communities", lb_K, "number of communities K");
  lb->add_option("--n", lb_n, "number of nodes");
  lb->add_option("--rho", lb_rho, "sparsity scale");
  lb->add_option("--seed", lb_seed, "code-construction seed");
  lb->add_option("--out", lb_out, "JSON report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  if (gen->parsed()) {
    spocpp_status st = spocpp_generate(
        g_n, g_K, g_pf, nullptr, g_rho, g_bd, g_bo, g_seed,
        (g_out + ".graph").c_str(), (g_out + ".theta.csv").c_str());
    if (st != SPOCPP_OK) return report_failure(st);
    std::cout << "wrote " << g_out << ".graph and " << g_out
              << ".theta.csv\n";
    return 0;
  }

  if (est->parsed()) {
    spocpp_options opts;
    spocpp_options_init(&opts);
    if (e_flags.k) opts.k = *e_flags.k;
    if (e_flags.threshold) opts.threshold = *e_flags.threshold;
    if (e_flags.reg &&
        !parse_reg(*e_flags.reg, opts.reg_mode, opts.reg_value)) {
      std::cerr << "error: --reg expects zero, spectral, or a float\n";
      return kExitConfig;
    }
    opts.clip_theta = e_flags.clip_theta ? 1 : 0;
    if (e_flags.abs_rank) opts.signed_rank = 0;
    opts.baseline = e_baseline ? 1 : 0;

    spocpp_estimate* handle = nullptr;
    spocpp_status st = spocpp_estimate_file(e_graph.c_str(), &opts, &handle);
    if (st != SPOCPP_OK) return report_failure(st);
    std::string prefix = e_flags.out.value_or("estimate");
    st = spocpp_estimate_save(handle, (prefix + ".theta.csv").c_str(),
                              (prefix + ".b.csv").c_str(),
                              (prefix + ".json").c_str());
    int k_hat = spocpp_estimate_k(handle);
    spocpp_estimate_free(handle);
    if (st != SPOCPP_OK) return report_failure(st);
    std::cout << "k_hat=" << k_hat << " outputs=" << prefix << ".{theta.csv,"
              << "b.csv,json}\n";
    return 0;
  }

  for (auto& e : experiments)
    if (e.cmd->parsed()) {
      try {
        return run_experiment_cmd(e.flags, e.kind);
      } catch (const CLI::Error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitConfig;
      }
    }

  if (lb->parsed()) {
    int all_pass = 0;
    char* report = nullptr;
    spocpp_status st = spocpp_lowerbound_check(
        lb_K, lb_n, lb_rho, lb_seed,
        lb_out.empty() ? nullptr : lb_out.c_str(), &all_pass, &report);
    if (st != SPOCPP_OK) return report_failure(st);
    if (report != nullptr) {
      std::cout << report;
      spocpp_string_free(report);
    }
    return all_pass == 1 ? 0 : kExitClaims;
  }

  return 0;
}
