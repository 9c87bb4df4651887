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
#include "spocpp/spocpp.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "spocpp/estimators.hpp"
#include "spocpp/harness.hpp"
#include "spocpp/lowerbound.hpp"
#include "spocpp/model.hpp"
#include "spocpp/rng.hpp"

namespace {

thread_local std::string g_last_error;

spocpp_status map_code(spocpp::ErrorCode code) {
  switch (code) {
    case spocpp::ErrorCode::parameter: return SPOCPP_ERR_PARAMETER;
    case spocpp::ErrorCode::convergence: return SPOCPP_ERR_CONVERGENCE;
    case spocpp::ErrorCode::degenerate_spectrum:
      return SPOCPP_ERR_DEGENERATE_SPECTRUM;
    case spocpp::ErrorCode::rank_deficient: return SPOCPP_ERR_RANK_DEFICIENT;
    case spocpp::ErrorCode::vertex_degenerate:
      return SPOCPP_ERR_VERTEX_DEGENERATE;
    case spocpp::ErrorCode::regularization: return SPOCPP_ERR_REGULARIZATION;
    case spocpp::ErrorCode::rank_estimation: return SPOCPP_ERR_RANK_ESTIMATION;
    case spocpp::ErrorCode::size: return SPOCPP_ERR_SIZE;
    case spocpp::ErrorCode::domain: return SPOCPP_ERR_DOMAIN;
    case spocpp::ErrorCode::io: return SPOCPP_ERR_IO;
  }
  return SPOCPP_ERR_UNKNOWN;
}

template <typename Fn>
spocpp_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return SPOCPP_OK;
  } catch (const spocpp::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SPOCPP_ERR_UNKNOWN;
  } catch (...) {
    g_last_error = "unknown error";
    return SPOCPP_ERR_UNKNOWN;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

spocpp::SpocOptions to_cpp_options(const spocpp_options* opts) {
  spocpp::SpocOptions o;
  if (opts == nullptr) return o;
  if (opts->k > 0) o.k = opts->k;
  if (opts->threshold >= 0.0) o.threshold = opts->threshold;
  switch (opts->reg_mode) {
    case 0: o.reg_mode = spocpp::RegMode::zero; break;
    case 1: o.reg_mode = spocpp::RegMode::spectral; break;
    case 2: o.reg_mode = spocpp::RegMode::fixed; break;
    default:
      throw spocpp::Error(spocpp::ErrorCode::parameter,
                          "reg_mode must be 0, 1 or 2");
  }
  o.reg_value = opts->reg_value;
  o.clip_theta = opts->clip_theta != 0;
  o.signed_rank = opts->signed_rank != 0;
  return o;
}

}  // namespace

struct spocpp_estimate {
  spocpp::EstimateBundle bundle;
  std::vector<double> b_row_major;
  std::vector<double> theta_row_major;
  int n = 0;
};

extern "C" {

const char* spocpp_last_error(void) { return g_last_error.c_str(); }

void spocpp_options_init(spocpp_options* opts) {
  if (opts == nullptr) return;
  opts->k = 0;
  opts->threshold = -1.0;
  opts->reg_mode = 0;
  opts->reg_value = 0.0;
  opts->clip_theta = 0;
  opts->signed_rank = 1;
  opts->baseline = 0;
}

spocpp_status spocpp_generate(int n, int K, double pure_fraction,
                              const double* alpha, double rho, double b_diag,
                              double b_offdiag, uint64_t seed,
                              const char* graph_path,
                              const char* membership_path) {
  return guarded([&] {
    std::vector<double> a =
        alpha != nullptr ? std::vector<double>(alpha, alpha + K)
                         : std::vector<double>(K, 1.0);
    spocpp::MembershipMatrix theta = spocpp::make_membership(
        n, K, pure_fraction, a, spocpp::mix_seed(seed, 0x517a5eedULL, 0));
    spocpp::MatrixXd bbar =
        spocpp::MatrixXd::Constant(K, K, b_offdiag);
    bbar.diagonal().setConstant(b_diag);
    spocpp::CommunityMatrix comm(rho, bbar,
                                 /*normalized=*/bbar.maxCoeff() == 1.0);
    spocpp::ProbabilityOperator p(theta, comm);
    spocpp::SparseGraph g = spocpp::sample_graph(p, seed);
    if (graph_path != nullptr) spocpp::save_graph(g, graph_path);
    if (membership_path != nullptr)
      spocpp::save_membership(theta.rows, membership_path);
  });
}

spocpp_status spocpp_estimate_file(const char* graph_path,
                                   const spocpp_options* opts,
                                   spocpp_estimate** out) {
  return guarded([&] {
    spocpp::require(graph_path != nullptr && out != nullptr,
                    spocpp::ErrorCode::parameter,
                    "graph_path and out must be non-null");
    spocpp::SparseGraph g = spocpp::load_graph(graph_path);
    spocpp::SpocOptions o = to_cpp_options(opts);
    bool baseline = opts != nullptr && opts->baseline != 0;

    auto handle = std::make_unique<spocpp_estimate>();
    if (baseline) {
      int k = o.k ? *o.k : spocpp::estimate_k(g, o.eig, o.signed_rank);
      handle->bundle = spocpp::spoc(g, k, o);
    } else {
      handle->bundle = spocpp::spocpp(g, o);
    }
    handle->n = g.n;
    const auto& b = handle->bundle.b_hat;
    const auto& th = handle->bundle.theta_hat;
    handle->b_row_major.assign(b.size(), 0.0);
    for (int i = 0; i < b.rows(); ++i)
      for (int j = 0; j < b.cols(); ++j)
        handle->b_row_major[i * b.cols() + j] = b(i, j);
    handle->theta_row_major.assign(th.size(), 0.0);
    for (int i = 0; i < th.rows(); ++i)
      for (int j = 0; j < th.cols(); ++j)
        handle->theta_row_major[i * th.cols() + j] = th(i, j);
    *out = handle.release();
  });
}

int spocpp_estimate_k(const spocpp_estimate* est) {
  return est != nullptr ? est->bundle.k_hat : 0;
}

int spocpp_estimate_n(const spocpp_estimate* est) {
  return est != nullptr ? est->n : 0;
}

const double* spocpp_estimate_b(const spocpp_estimate* est) {
  return est != nullptr ? est->b_row_major.data() : nullptr;
}

const double* spocpp_estimate_theta(const spocpp_estimate* est) {
  return est != nullptr ? est->theta_row_major.data() : nullptr;
}

spocpp_status spocpp_estimate_save(const spocpp_estimate* est,
                                   const char* theta_csv, const char* b_csv,
                                   const char* summary_json) {
  return guarded([&] {
    spocpp::require(est != nullptr, spocpp::ErrorCode::parameter,
                    "estimate handle is null");
    if (theta_csv != nullptr)
      spocpp::save_membership(est->bundle.theta_hat, theta_csv);
    if (b_csv != nullptr) {
      std::ofstream outf(b_csv, std::ios::binary);
      spocpp::require(outf.good(), spocpp::ErrorCode::io,
                      std::string("cannot open for writing: ") + b_csv);
      outf.precision(17);
      const auto& b = est->bundle.b_hat;
      for (int j = 0; j < b.cols(); ++j)
        outf << (j ? "," : "") << "b_" << j + 1;
      outf << "\n";
      for (int i = 0; i < b.rows(); ++i) {
        for (int j = 0; j < b.cols(); ++j) outf << (j ? "," : "") << b(i, j);
        outf << "\n";
      }
    }
    if (summary_json != nullptr) {
      nlohmann::json j;
      j["k_hat"] = est->bundle.k_hat;
      j["n"] = est->n;
      j["threshold_used"] = est->bundle.threshold_used;
      j["a_used"] = est->bundle.a_used;
      j["anchors"] = est->bundle.anchors;
      std::vector<std::size_t> sizes;
      for (const auto& s : est->bundle.selected_sets) sizes.push_back(s.size());
      j["selected_set_sizes"] = sizes;
      std::ofstream outf(summary_json, std::ios::binary);
      spocpp::require(outf.good(), spocpp::ErrorCode::io,
                      std::string("cannot open for writing: ") + summary_json);
      outf << j.dump(2) << "\n";
    }
  });
}

void spocpp_estimate_free(spocpp_estimate* est) { delete est; }

spocpp_status spocpp_run_experiment(const char* config_text,
                                    const char* overrides, int* out_all_pass,
                                    char** out_summary) {
  return guarded([&] {
    spocpp::require(config_text != nullptr, spocpp::ErrorCode::parameter,
                    "config_text must be non-null");
    std::string text = config_text;
    if (overrides != nullptr) {
      text += "\n";
      text += overrides;
    }
    spocpp::ExperimentConfig cfg = spocpp::parse_config(text);
    cfg.validate();
    spocpp::RunResult res = spocpp::run_experiment(cfg);
    if (out_all_pass != nullptr) *out_all_pass = res.ok ? 1 : 0;
    if (out_summary != nullptr) *out_summary = dup_string(res.summary_json);
  });
}

spocpp_status spocpp_lowerbound_check(int K, int n, double rho, uint64_t seed,
                                      const char* json_path,
                                      int* out_all_pass, char** out_report) {
  return guarded([&] {
    spocpp::LowerBoundReport rep = spocpp::certify_lower_bound(K, n, rho, seed);
    std::string doc = rep.to_json();
    if (json_path != nullptr) {
      std::ofstream outf(json_path, std::ios::binary);
      spocpp::require(outf.good(), spocpp::ErrorCode::io,
                      std::string("cannot open for writing: ") + json_path);
      outf << doc;
    }
    if (out_all_pass != nullptr) *out_all_pass = rep.all_pass() ? 1 : 0;
    if (out_report != nullptr) *out_report = dup_string(doc);
  });
}

void spocpp_string_free(char* s) { std::free(s); }

}  // extern "C"
