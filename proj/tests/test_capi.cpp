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
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "spocpp/spocpp.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string scratch(const char* name) {
  return (fs::temp_directory_path() / (std::string("spocpp_capi_") + name))
      .string();
}

}  // namespace

TEST_CASE("options initialize to the documented defaults") {
  spocpp_options opts;
  std::memset(&opts, 0x7f, sizeof(opts));
  spocpp_options_init(&opts);
  CHECK(opts.k == 0);
  CHECK(opts.threshold == -1.0);
  CHECK(opts.reg_mode == 0);
  CHECK(opts.reg_value == 0.0);
  CHECK(opts.clip_theta == 0);
  CHECK(opts.signed_rank == 1);
  CHECK(opts.baseline == 0);
  spocpp_options_init(nullptr);  // tolerated
}

TEST_CASE("generate-estimate round trip through files") {
  std::string graph = scratch("g.txt"), theta = scratch("t.csv");
  CHECK(spocpp_generate(300, 3, 0.12, nullptr, 1.0, 1.0, 0.1, 7,
                        graph.c_str(), theta.c_str()) == SPOCPP_OK);
  REQUIRE(fs::exists(graph));
  REQUIRE(fs::exists(theta));

  spocpp_options opts;
  spocpp_options_init(&opts);
  opts.k = 3;
  spocpp_estimate* est = nullptr;
  REQUIRE(spocpp_estimate_file(graph.c_str(), &opts, &est) == SPOCPP_OK);
  REQUIRE(est != nullptr);
  CHECK(spocpp_estimate_k(est) == 3);
  CHECK(spocpp_estimate_n(est) == 300);
  const double* b = spocpp_estimate_b(est);
  REQUIRE(b != nullptr);
  for (int i = 0; i < 9; ++i) {
    CHECK(b[i] == b[i]);  // finite, not NaN
    CHECK(std::abs(b[i]) < 10.0);
  }
  // row-major symmetric
  CHECK(b[1] == doctest::Approx(b[3]));
  const double* th = spocpp_estimate_theta(est);
  REQUIRE(th != nullptr);
  double row0 = th[0] + th[1] + th[2];
  CHECK(row0 == doctest::Approx(1.0).epsilon(0.35));  // unclipped, near simplex

  std::string tout = scratch("theta_out.csv"), bout = scratch("b_out.csv"),
              jout = scratch("summary.json");
  CHECK(spocpp_estimate_save(est, tout.c_str(), bout.c_str(), jout.c_str()) ==
        SPOCPP_OK);
  json doc = json::parse(std::ifstream(jout));
  CHECK(doc["k_hat"] == 3);
  CHECK(doc["n"] == 300);
  CHECK(doc["anchors"].size() == 3);
  CHECK(doc["selected_set_sizes"].size() == 3);
  spocpp_estimate_free(est);

  // baseline variant succeeds on the same input
  opts.baseline = 1;
  spocpp_estimate* base = nullptr;
  REQUIRE(spocpp_estimate_file(graph.c_str(), &opts, &base) == SPOCPP_OK);
  CHECK(spocpp_estimate_k(base) == 3);
  spocpp_estimate_free(base);

  for (const auto& f : {graph, theta, tout, bout, jout})
    fs::remove(f);
}

TEST_CASE("errors map to stable status codes with readable messages") {
  CHECK(spocpp_generate(-5, 3, 0.1, nullptr, 1.0, 1.0, 0.1, 1, nullptr,
                        nullptr) == SPOCPP_ERR_PARAMETER);
  CHECK(std::strlen(spocpp_last_error()) > 0);
  CHECK(spocpp_generate(100, 3, 0.1, nullptr, 2.0, 1.0, 0.1, 1, nullptr,
                        nullptr) == SPOCPP_ERR_PARAMETER);  // rho > 1

  spocpp_estimate* est = nullptr;
  CHECK(spocpp_estimate_file("/nonexistent/graph.txt", nullptr, &est) ==
        SPOCPP_ERR_IO);
  CHECK(est == nullptr);
  CHECK(spocpp_estimate_file(nullptr, nullptr, &est) == SPOCPP_ERR_PARAMETER);

  spocpp_options opts;
  spocpp_options_init(&opts);
  opts.reg_mode = 9;
  std::string graph = scratch("err_g.txt");
  REQUIRE(spocpp_generate(80, 2, 0.2, nullptr, 1.0, 1.0, 0.1, 3,
                          graph.c_str(), nullptr) == SPOCPP_OK);
  CHECK(spocpp_estimate_file(graph.c_str(), &opts, &est) ==
        SPOCPP_ERR_PARAMETER);
  fs::remove(graph);

  // null accessors degrade gracefully
  CHECK(spocpp_estimate_k(nullptr) == 0);
  CHECK(spocpp_estimate_n(nullptr) == 0);
  CHECK(spocpp_estimate_b(nullptr) == nullptr);
  CHECK(spocpp_estimate_theta(nullptr) == nullptr);
  spocpp_estimate_free(nullptr);
}

TEST_CASE("experiment runner accepts config text plus override lines") {
  std::string dir = scratch("exp_out");
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::string cfg = R"(
kind = "n-sweep"
K = 2
grid = [70, 100]
reps = 1
pure_fraction = 0.12
b_diag = 1.0
b_offdiag = 0.1
seed = 4
emit_plot = false
)";
  std::string overrides = "output_dir = \"" + dir + "\"\nseed = 9\n";
  int all_pass = 0;
  char* summary = nullptr;
  REQUIRE(spocpp_run_experiment(cfg.c_str(), overrides.c_str(), &all_pass,
                                &summary) == SPOCPP_OK);
  CHECK(all_pass == 1);
  REQUIRE(summary != nullptr);
  json doc = json::parse(summary);
  CHECK(doc["kind"] == "n-sweep");
  CHECK(doc["seed"] == 9);  // the override line won
  spocpp_string_free(summary);
  CHECK(fs::exists(fs::path(dir) / "n_sweep.csv"));

  CHECK(spocpp_run_experiment("kind = \"mystery\"\n", nullptr, nullptr,
                              nullptr) == SPOCPP_ERR_PARAMETER);
  CHECK(spocpp_run_experiment(nullptr, nullptr, nullptr, nullptr) ==
        SPOCPP_ERR_PARAMETER);
  fs::remove_all(dir);
}

TEST_CASE("lower-bound certification exposed at the boundary") {
  std::string path = scratch("lb.json");
  int all_pass = 0;
  char* report = nullptr;
  REQUIRE(spocpp_lowerbound_check(3, 256, 1.0, 12345, path.c_str(), &all_pass,
                                  &report) == SPOCPP_OK);
  CHECK(all_pass == 1);
  REQUIRE(report != nullptr);
  json doc = json::parse(report);
  CHECK(doc["K"] == 3);
  CHECK(doc["n"] == 256);
  spocpp_string_free(report);
  json disk = json::parse(std::ifstream(path));
  CHECK(disk["claims"].size() >= 10);
  fs::remove(path);

  CHECK(spocpp_lowerbound_check(1, 256, 1.0, 1, nullptr, nullptr, nullptr) ==
        SPOCPP_ERR_SIZE);
}
