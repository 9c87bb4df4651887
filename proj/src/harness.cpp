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
#include "spocpp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "spocpp/lowerbound.hpp"
#include "spocpp/metrics.hpp"
#include "spocpp/rng.hpp"
#include "spocpp/spa.hpp"

namespace spocpp {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

double parse_number(const std::string& v, const std::string& key) {
  try {
    std::size_t at = 0;
    double x = std::stod(v, &at);
    require(trim(v.substr(at)).empty(), ErrorCode::parameter,
            "config: malformed number for key '" + key + "'");
    return x;
  } catch (const Error&) {
    throw;
  } catch (...) {
    throw Error(ErrorCode::parameter,
                "config: malformed number for key '" + key + "'");
  }
}

std::vector<double> parse_array(const std::string& v, const std::string& key) {
  require(v.size() >= 2 && v.front() == '[' && v.back() == ']',
          ErrorCode::parameter, "config: key '" + key + "' expects [ ... ]");
  std::vector<double> out;
  std::stringstream ss(v.substr(1, v.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_number(item, key));
  }
  return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw Error(ErrorCode::parameter,
              "config: key '" + key + "' expects true/false");
}

std::string unquote(const std::string& v, const std::string& key) {
  require(v.size() >= 2 && v.front() == '"' && v.back() == '"',
          ErrorCode::parameter, "config: key '" + key + "' expects a string");
  return v.substr(1, v.size() - 2);
}

const char* kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::n_sweep: return "n-sweep";
    case ExperimentKind::rho_sweep: return "rho-sweep";
    case ExperimentKind::compare: return "compare";
    case ExperimentKind::stat_dist: return "stat-dist";
    case ExperimentKind::lowerbound: return "lowerbound";
  }
  return "unknown";
}

std::string fmt(double x) {
  if (std::isnan(x)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double quantile_of(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  double pos = q * static_cast<double>(v.size() - 1);
  std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

CommunityMatrix make_community(const ExperimentConfig& cfg, double rho) {
  MatrixXd bbar = MatrixXd::Constant(cfg.K, cfg.K, cfg.b_offdiag);
  double step = cfg.b_diag_step;
  if (step < 0.0)
    step = cfg.K > 1 ? (cfg.b_diag - cfg.b_offdiag) / (2.0 * (cfg.K - 1))
                     : 0.0;
  for (int k = 0; k < cfg.K; ++k) bbar(k, k) = cfg.b_diag - k * step;
  double mx = bbar.maxCoeff();
  return CommunityMatrix(rho, bbar, /*normalized=*/mx == 1.0);
}

SpocOptions make_opts(const ExperimentConfig& cfg) {
  SpocOptions o;
  o.threshold = cfg.threshold;
  o.reg_mode = cfg.a_mode;
  o.reg_value = cfg.a_value;
  // sweeps follow the known-rank protocol; rank estimation is exercised by
  // its own operation and tests
  o.k = cfg.fixed_k ? cfg.fixed_k : std::optional<int>(cfg.K);
  o.clip_theta = cfg.clip_theta;
  o.signed_rank = cfg.signed_rank;
  return o;
}

struct AlgoRow {
  std::string algorithm;
  double loss_b = kNaN;
  double rel_loss_b = kNaN;  // loss_b / ||true B||_F, scale-free across rho
  double loss_theta = kNaN;
  int k_hat = 0;
  std::int64_t elapsed_ms = 0;
  std::string status = "ok";
};

AlgoRow run_algorithm(const std::string& name, bool improved,
                      const SparseGraph& g, const MembershipMatrix& theta,
                      const MatrixXd& true_b, const SpocOptions& opts) {
  AlgoRow row;
  row.algorithm = name;
  auto t0 = std::chrono::steady_clock::now();
  try {
    EstimateBundle bundle =
        improved ? spocpp(g, opts) : spoc(g, opts.k.value(), opts);
    row.k_hat = bundle.k_hat;
    row.loss_b = loss_b(bundle.b_hat, true_b).loss;
    row.rel_loss_b = row.loss_b / true_b.norm();
    row.loss_theta = loss_theta(bundle.theta_hat, theta.rows).loss;
  } catch (const Error& e) {
    row.status = error_code_name(e.code());
  } catch (const std::exception&) {
    row.status = "error";
  }
  auto t1 = std::chrono::steady_clock::now();
  row.elapsed_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
  return row;
}

struct RepRecord {
  double grid_value = 0.0;
  int rep = 0;
  std::uint64_t seed = 0;
  std::vector<AlgoRow> rows;
  bool nested = true;
  std::uint64_t ghash = 0;
};

/// Runs `count` tasks with at most `jobs` in flight; results land at their
/// own index so output order is deterministic.
template <typename Task>
std::vector<RepRecord> run_parallel(int count, int jobs, Task&& task) {
  std::vector<RepRecord> out(count);
  if (jobs <= 1) {
    for (int i = 0; i < count; ++i) out[i] = task(i);
    return out;
  }
  int at = 0;
  while (at < count) {
    int batch = std::min(jobs, count - at);
    std::vector<std::future<RepRecord>> fut;
    fut.reserve(batch);
    for (int b = 0; b < batch; ++b)
      fut.push_back(std::async(std::launch::async, task, at + b));
    for (int b = 0; b < batch; ++b) out[at + b] = fut[b].get();
    at += batch;
  }
  return out;
}

std::vector<double> collect(const std::vector<const AlgoRow*>& rows,
                            bool theta) {
  std::vector<double> v;
  for (const AlgoRow* r : rows)
    if (r->status == "ok") v.push_back(theta ? r->loss_theta : r->loss_b);
  return v;
}

json point_stats(const std::vector<const AlgoRow*>& rows) {
  json j;
  int failures = 0;
  for (const AlgoRow* r : rows)
    if (r->status != "ok") ++failures;
  j["failures"] = failures;
  for (bool theta : {false, true}) {
    std::vector<double> v = collect(rows, theta);
    std::string tag = theta ? "loss_theta" : "loss_b";
    if (v.empty()) {
      j["mean_" + tag] = nullptr;
      j["q10_" + tag] = nullptr;
      j["q90_" + tag] = nullptr;
    } else {
      j["mean_" + tag] = mean_of(v);
      j["q10_" + tag] = quantile_of(v, 0.10);
      j["q90_" + tag] = quantile_of(v, 0.90);
    }
  }
  return j;
}

/// Mean loss_b of the improved estimator per grid point -> log-log OLS.
json slope_summary(const std::vector<std::pair<double, double>>& pts,
                   const char* metric = "mean_loss_b") {
  if (pts.size() < 2) return nullptr;
  try {
    SlopeFit fit = slope_fit(pts);
    json j;
    j["metric"] = metric;
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["stderr"] = fit.stderr_slope;
    return j;
  } catch (const Error&) {
    return nullptr;
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::io, "cannot open for writing: " + path);
  out << text;
  require(out.good(), ErrorCode::io, "write failed: " + path);
}

/// Minimal standalone log-log scatter plot with the fitted line and a
/// reference-slope line; data embedded as an SVG comment for diffing.
std::string loglog_svg(const std::string& title, const std::string& xlabel,
                       const std::vector<std::pair<double, double>>& pts,
                       const json& fit, double ref_slope) {
  const int W = 640, H = 480, ML = 70, MR = 20, MT = 40, MB = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (auto& [x, y] : pts) {
    xmin = std::min(xmin, std::log(x));
    xmax = std::max(xmax, std::log(x));
    ymin = std::min(ymin, std::log(y));
    ymax = std::max(ymax, std::log(y));
  }
  if (xmax - xmin < 1e-12) { xmin -= 0.5; xmax += 0.5; }
  double pad = std::max(0.05 * (ymax - ymin), 0.1);
  ymin -= pad;
  ymax += pad;
  auto px = [&](double lx) {
    return ML + (lx - xmin) / (xmax - xmin) * (W - ML - MR);
  };
  auto py = [&](double ly) {
    return H - MB - (ly - ymin) / (ymax - ymin) * (H - MT - MB);
  };
  std::ostringstream os;
  os.precision(10);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\">\n<!-- data (x, y):";
  for (auto& [x, y] : pts) os << " (" << x << ", " << y << ")";
  os << " -->\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H
     << "\" fill=\"white\"/>\n";
  os << "<rect x=\"" << ML << "\" y=\"" << MT << "\" width=\"" << W - ML - MR
     << "\" height=\"" << H - MT - MB
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"25\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"13\">ln " << xlabel << "</text>\n";
  os << "<text x=\"18\" y=\"" << H / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"13\" transform=\"rotate(-90 18 " << H / 2
     << ")\">ln loss</text>\n";
  // reference-slope line anchored at the first point
  if (!pts.empty()) {
    double lx0 = std::log(pts.front().first), ly0 = std::log(pts.front().second);
    os << "<line x1=\"" << px(xmin) << "\" y1=\""
       << py(ly0 + ref_slope * (xmin - lx0)) << "\" x2=\"" << px(xmax)
       << "\" y2=\"" << py(ly0 + ref_slope * (xmax - lx0))
       << "\" stroke=\"red\" stroke-dasharray=\"6 3\"/>\n";
  }
  if (!fit.is_null()) {
    double s = fit["slope"], c = fit["intercept"];
    os << "<line x1=\"" << px(xmin) << "\" y1=\"" << py(c + s * xmin)
       << "\" x2=\"" << px(xmax) << "\" y2=\"" << py(c + s * xmax)
       << "\" stroke=\"blue\"/>\n";
    os << "<text x=\"" << ML + 10 << "\" y=\"" << MT + 20
       << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"blue\">fit "
          "slope " << s << " (reference " << ref_slope << ", dashed)</text>\n";
  }
  for (auto& [x, y] : pts)
    os << "<circle cx=\"" << px(std::log(x)) << "\" cy=\"" << py(std::log(y))
       << "\" r=\"4\" fill=\"black\"/>\n";
  os << "</svg>\n";
  return os.str();
}

std::string out_path(const ExperimentConfig& cfg, const std::string& file) {
  fs::create_directories(cfg.output_dir);
  return (fs::path(cfg.output_dir) / file).string();
}

json base_summary(const ExperimentConfig& cfg) {
  json j;
  j["kind"] = kind_name(cfg.kind);
  j["K"] = cfg.K;
  j["reps"] = cfg.reps;
  j["seed"] = cfg.seed;
  j["pure_fraction"] = cfg.pure_fraction;
  return j;
}

std::vector<double> effective_alpha(const ExperimentConfig& cfg) {
  if (!cfg.alpha.empty()) return cfg.alpha;
  return std::vector<double>(cfg.K, 1.0);
}

bool edge_subset(const SparseGraph& a, const SparseGraph& b) {
  for (int i = 0; i < a.n; ++i)
    if (!std::includes(b.row_begin(i), b.row_end(i), a.row_begin(i),
                       a.row_end(i)))
      return false;
  return true;
}

}  // namespace

void ExperimentConfig::validate() const {
  require(K >= 1 && K <= 64, ErrorCode::parameter, "config: K in [1, 64]");
  require(reps >= 1, ErrorCode::parameter, "config: reps >= 1");
  require(jobs >= 1, ErrorCode::parameter, "config: jobs >= 1");
  require(pure_fraction >= 0.0 && K * pure_fraction <= 1.0,
          ErrorCode::parameter, "config: K * pure_fraction in [0, 1]");
  require(alpha.empty() || static_cast<int>(alpha.size()) == K,
          ErrorCode::parameter, "config: alpha needs K entries");
  for (double a : alpha)
    require(a > 0.0, ErrorCode::parameter, "config: alpha entries > 0");
  require(b_diag >= 0.0 && b_diag <= 1.0 && b_offdiag >= 0.0 &&
              b_offdiag <= 1.0,
          ErrorCode::parameter, "config: community entries in [0, 1]");
  if (K > 1) {
    double step = b_diag_step >= 0.0
                      ? b_diag_step
                      : (b_diag - b_offdiag) / (2.0 * (K - 1));
    require(b_diag - (K - 1) * step > b_offdiag, ErrorCode::parameter,
            "config: stepped community diagonal must stay above the "
            "off-diagonal (reduce b_diag_step)");
  }
  require(rho > 0.0 && rho <= 1.0, ErrorCode::parameter,
          "config: rho in (0, 1]");
  if (kind == ExperimentKind::lowerbound) return;
  require(!grid.empty(), ErrorCode::parameter, "config: grid must be nonempty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    require(grid[i] > grid[i - 1], ErrorCode::parameter,
            "config: grid must be strictly increasing");
  if (kind == ExperimentKind::rho_sweep) {
    require(n >= K, ErrorCode::parameter, "config: n >= K");
    for (double r : grid)
      require(r > 0.0 && r <= 1.0, ErrorCode::parameter,
              "config: rho grid values in (0, 1]");
  } else {
    for (double g : grid) {
      require(g >= K && g == std::floor(g), ErrorCode::parameter,
              "config: n grid values must be integers >= K");
    }
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::parameter,
            "config: expected 'key = value', got: " + line);
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    require(!val.empty(), ErrorCode::parameter,
            "config: empty value for key '" + key + "'");

    if (key == "kind") {
      std::string v = unquote(val, key);
      if (v == "n-sweep") cfg.kind = ExperimentKind::n_sweep;
      else if (v == "rho-sweep") cfg.kind = ExperimentKind::rho_sweep;
      else if (v == "compare") cfg.kind = ExperimentKind::compare;
      else if (v == "stat-dist") cfg.kind = ExperimentKind::stat_dist;
      else if (v == "lowerbound") cfg.kind = ExperimentKind::lowerbound;
      else throw Error(ErrorCode::parameter, "config: unknown kind '" + v + "'");
    } else if (key == "K") {
      cfg.K = static_cast<int>(parse_number(val, key));
    } else if (key == "grid") {
      cfg.grid = parse_array(val, key);
    } else if (key == "reps") {
      cfg.reps = static_cast<int>(parse_number(val, key));
    } else if (key == "pure_fraction") {
      cfg.pure_fraction = parse_number(val, key);
    } else if (key == "alpha") {
      cfg.alpha = parse_array(val, key);
    } else if (key == "rho") {
      cfg.rho = parse_number(val, key);
    } else if (key == "n") {
      cfg.n = static_cast<int>(parse_number(val, key));
    } else if (key == "b_diag") {
      cfg.b_diag = parse_number(val, key);
    } else if (key == "b_offdiag") {
      cfg.b_offdiag = parse_number(val, key);
    } else if (key == "b_diag_step") {
      cfg.b_diag_step = parse_number(val, key);
    } else if (key == "threshold") {
      if (val == "\"auto\"") cfg.threshold.reset();
      else cfg.threshold = parse_number(val, key);
    } else if (key == "a") {
      if (val == "\"zero\"") cfg.a_mode = RegMode::zero;
      else if (val == "\"spectral\"") cfg.a_mode = RegMode::spectral;
      else {
        cfg.a_mode = RegMode::fixed;
        cfg.a_value = parse_number(val, key);
      }
    } else if (key == "k") {
      cfg.fixed_k = static_cast<int>(parse_number(val, key));
    } else if (key == "clip_theta") {
      cfg.clip_theta = parse_bool(val, key);
    } else if (key == "signed_rank") {
      cfg.signed_rank = parse_bool(val, key);
    } else if (key == "include_baseline") {
      cfg.include_baseline = parse_bool(val, key);
    } else if (key == "resample_theta") {
      cfg.resample_theta = parse_bool(val, key);
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_number(val, key));
    } else if (key == "jobs") {
      cfg.jobs = static_cast<int>(parse_number(val, key));
    } else if (key == "output_dir") {
      cfg.output_dir = unquote(val, key);
    } else if (key == "emit_plot") {
      cfg.emit_plot = parse_bool(val, key);
    } else if (key == "lb_K") {
      cfg.lb_K = static_cast<int>(parse_number(val, key));
    } else if (key == "lb_n") {
      cfg.lb_n = static_cast<int>(parse_number(val, key));
    } else if (key == "lb_rho") {
      cfg.lb_rho = parse_number(val, key);
    } else {
      throw Error(ErrorCode::parameter, "config: unknown key '" + key + "'");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::io, "cannot open config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::uint64_t experiment_seed(const ExperimentConfig& cfg, int grid_index,
                              int rep) {
  return mix_seed(cfg.seed, static_cast<std::uint64_t>(grid_index),
                  static_cast<std::uint64_t>(rep));
}

std::uint64_t graph_hash(const SparseGraph& g) {
  std::uint64_t h = 1469598103934665603ULL;
  auto eat = [&h](std::uint64_t x) {
    for (int b = 0; b < 8; ++b) {
      h ^= (x >> (8 * b)) & 0xff;
      h *= 1099511628211ULL;
    }
  };
  eat(static_cast<std::uint64_t>(g.n));
  for (int i = 0; i < g.n; ++i)
    for (const int* it = g.row_begin(i); it != g.row_end(i); ++it)
      if (*it >= i) eat((static_cast<std::uint64_t>(i) << 32) |
                        static_cast<std::uint64_t>(*it));
  return h;
}

namespace {

/// Shared body for the n-indexed sweeps (n-sweep and compare): one
/// membership per grid point, resampled adjacency per replicate, both
/// estimators on the same graph when requested.
std::vector<std::vector<RepRecord>> sweep_over_n(const ExperimentConfig& cfg,
                                                 bool with_baseline) {
  std::vector<double> alpha = effective_alpha(cfg);
  std::vector<std::vector<RepRecord>> all(cfg.grid.size());
  for (std::size_t gi = 0; gi < cfg.grid.size(); ++gi) {
    int n = static_cast<int>(cfg.grid[gi]);
    CommunityMatrix comm = make_community(cfg, cfg.rho);
    std::uint64_t theta_seed =
        mix_seed(cfg.seed ^ 0x517a5eedULL, gi, 0);
    MembershipMatrix theta_shared =
        make_membership(n, cfg.K, cfg.pure_fraction, alpha, theta_seed);
    SpocOptions opts = make_opts(cfg);

    all[gi] = run_parallel(
        cfg.reps, cfg.jobs, [&, gi, n](int rep) -> RepRecord {
          RepRecord rec;
          rec.grid_value = cfg.grid[gi];
          rec.rep = rep;
          rec.seed = experiment_seed(cfg, static_cast<int>(gi), rep);
          const MembershipMatrix theta =
              cfg.resample_theta
                  ? make_membership(n, cfg.K, cfg.pure_fraction, alpha,
                                    mix_seed(rec.seed, 0x7e7aULL, 0))
                  : theta_shared;
          ProbabilityOperator p(theta, comm);
          SparseGraph g = sample_graph(p, rec.seed);
          rec.ghash = graph_hash(g);
          MatrixXd true_b = comm.b();
          rec.rows.push_back(
              run_algorithm("spocpp", true, g, theta, true_b, opts));
          if (with_baseline)
            rec.rows.push_back(
                run_algorithm("spoc", false, g, theta, true_b, opts));
          return rec;
        });
  }
  return all;
}

std::vector<std::pair<double, double>> mean_points(
    const std::vector<std::vector<RepRecord>>& all,
    const std::vector<double>& grid, const std::string& algorithm,
    bool invert_x, bool relative) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t gi = 0; gi < all.size(); ++gi) {
    std::vector<double> v;
    for (const RepRecord& rec : all[gi])
      for (const AlgoRow& r : rec.rows) {
        double x = relative ? r.rel_loss_b : r.loss_b;
        if (r.algorithm == algorithm && r.status == "ok" && x > 0.0)
          v.push_back(x);
      }
    if (!v.empty())
      pts.emplace_back(invert_x ? 1.0 / grid[gi] : grid[gi], mean_of(v));
  }
  return pts;
}

json points_json(const std::vector<std::vector<RepRecord>>& all,
                 const std::vector<double>& grid, const char* grid_key,
                 const std::vector<std::string>& algorithms) {
  json points = json::array();
  for (std::size_t gi = 0; gi < all.size(); ++gi) {
    for (const std::string& algo : algorithms) {
      std::vector<const AlgoRow*> rows;
      for (const RepRecord& rec : all[gi])
        for (const AlgoRow& r : rec.rows)
          if (r.algorithm == algo) rows.push_back(&r);
      if (rows.empty()) continue;
      json j = point_stats(rows);
      j[grid_key] = grid[gi];
      j["algorithm"] = algo;
      points.push_back(j);
    }
  }
  return points;
}

std::vector<std::string> algo_list(const ExperimentConfig& cfg,
                                   bool with_baseline) {
  std::vector<std::string> a{"spocpp"};
  if (with_baseline && cfg.include_baseline) a.push_back("spoc");
  return a;
}

}  // namespace

RunResult run_n_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  auto all = sweep_over_n(cfg, cfg.include_baseline);

  std::ostringstream csv;
  csv << "n,rep,seed,algorithm,loss_b,loss_theta,k_hat,elapsed_ms,status\n";
  for (std::size_t gi = 0; gi < all.size(); ++gi)
    for (const RepRecord& rec : all[gi])
      for (const AlgoRow& r : rec.rows)
        csv << static_cast<int>(rec.grid_value) << ',' << rec.rep << ','
            << rec.seed << ',' << r.algorithm << ',' << fmt(r.loss_b) << ','
            << fmt(r.loss_theta) << ',' << r.k_hat << ',' << r.elapsed_ms
            << ',' << r.status << '\n';

  json summary = base_summary(cfg);
  summary["rho"] = cfg.rho;
  summary["points"] = points_json(all, cfg.grid, "n",
                                  algo_list(cfg, cfg.include_baseline));
  auto pts = mean_points(all, cfg.grid, "spocpp", false, false);
  summary["slope"] = slope_summary(pts);
  summary["reference_slope"] = -1.0;

  RunResult res;
  res.csv_path = out_path(cfg, "n_sweep.csv");
  write_text(res.csv_path, csv.str());
  res.summary_json = summary.dump(2) + "\n";
  res.summary_path = out_path(cfg, "n_sweep_summary.json");
  write_text(res.summary_path, res.summary_json);
  if (cfg.emit_plot && pts.size() >= 2) {
    res.plot_path = out_path(cfg, "n_sweep.svg");
    write_text(res.plot_path,
               loglog_svg("estimation error vs n", "n", pts, summary["slope"],
                          -1.0));
  }
  return res;
}

RunResult run_rho_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<double> alpha = effective_alpha(cfg);
  CommunityMatrix comm_unit = make_community(cfg, 1.0);
  MembershipMatrix theta_shared = make_membership(
      cfg.n, cfg.K, cfg.pure_fraction, alpha,
      mix_seed(cfg.seed ^ 0x517a5eedULL, 0, 0));
  SpocOptions opts = make_opts(cfg);

  // one task per replicate covering the whole rho grid: the coupled sampler
  // shares the per-pair uniforms across rho, which is what makes the edge
  // sets nested
  auto task = [&](int rep) -> RepRecord {
    RepRecord rec;
    rec.rep = rep;
    rec.seed = experiment_seed(cfg, 0, rep);
    const MembershipMatrix theta =
        cfg.resample_theta
            ? make_membership(cfg.n, cfg.K, cfg.pure_fraction, alpha,
                              mix_seed(rec.seed, 0x7e7aULL, 0))
            : theta_shared;
    ProbabilityOperator p_unit(theta, comm_unit);
    SparseGraph prev;
    for (std::size_t gi = 0; gi < cfg.grid.size(); ++gi) {
      double rho = cfg.grid[gi];
      SparseGraph g = sample_graph_coupled(p_unit, rho, rec.seed);
      bool nested = gi == 0 || edge_subset(prev, g);
      CommunityMatrix comm_rho = make_community(cfg, rho);
      MatrixXd true_b = comm_rho.b();
      AlgoRow main = run_algorithm("spocpp", true, g, theta, true_b, opts);
      main.status = nested ? main.status : "coupling_violation";
      rec.rows.push_back(main);
      if (cfg.include_baseline)
        rec.rows.push_back(
            run_algorithm("spoc", false, g, theta, true_b, opts));
      rec.nested = rec.nested && nested;
      prev = std::move(g);
    }
    return rec;
  };
  std::vector<RepRecord> reps = run_parallel(cfg.reps, cfg.jobs, task);

  // reshape into per-grid-point records for shared aggregation, keeping the
  // (grid, rep) output order
  const int algos = cfg.include_baseline ? 2 : 1;
  std::vector<std::vector<RepRecord>> all(cfg.grid.size());
  for (std::size_t gi = 0; gi < cfg.grid.size(); ++gi)
    for (int rep = 0; rep < cfg.reps; ++rep) {
      RepRecord rec;
      rec.grid_value = cfg.grid[gi];
      rec.rep = rep;
      rec.seed = reps[rep].seed;
      rec.nested = reps[rep].nested;
      for (int a = 0; a < algos; ++a)
        rec.rows.push_back(reps[rep].rows[gi * algos + a]);
      all[gi].push_back(std::move(rec));
    }

  std::ostringstream csv;
  csv << "rho,rep,seed,algorithm,loss_b,loss_theta,k_hat,elapsed_ms,status,"
         "nested\n";
  for (std::size_t gi = 0; gi < all.size(); ++gi)
    for (const RepRecord& rec : all[gi])
      for (const AlgoRow& r : rec.rows)
        csv << fmt(rec.grid_value) << ',' << rec.rep << ',' << rec.seed << ','
            << r.algorithm << ',' << fmt(r.loss_b) << ',' << fmt(r.loss_theta)
            << ',' << r.k_hat << ',' << r.elapsed_ms << ',' << r.status << ','
            << (rec.nested ? "true" : "false") << '\n';

  bool nested_all = true;
  for (const RepRecord& rec : reps) nested_all = nested_all && rec.nested;

  json summary = base_summary(cfg);
  summary["n"] = cfg.n;
  summary["points"] = points_json(all, cfg.grid, "rho",
                                  algo_list(cfg, cfg.include_baseline));
  summary["nested_all"] = nested_all;
  // the fit is against rho, so the slope is negative when errors grow as
  // rho shrinks; consumers compare the magnitude against the sqrt(rho)
  // reference rate, so it is exposed separately as slope_abs
  auto pts = mean_points(all, cfg.grid, "spocpp", false, false);
  summary["slope"] = slope_summary(pts);
  if (!summary["slope"].is_null())
    summary["slope_abs"] = std::abs(summary["slope"]["slope"].get<double>());
  else
    summary["slope_abs"] = nullptr;
  summary["reference_slope"] = 0.5;

  RunResult res;
  res.csv_path = out_path(cfg, "rho_sweep.csv");
  write_text(res.csv_path, csv.str());
  res.summary_json = summary.dump(2) + "\n";
  res.summary_path = out_path(cfg, "rho_sweep_summary.json");
  write_text(res.summary_path, res.summary_json);
  if (cfg.emit_plot && pts.size() >= 2) {
    res.plot_path = out_path(cfg, "rho_sweep.svg");
    write_text(res.plot_path,
               loglog_svg("estimation error vs rho", "rho", pts,
                          summary["slope"], 0.5));
  }
  return res;
}

RunResult run_compare(const ExperimentConfig& cfg) {
  cfg.validate();
  auto all = sweep_over_n(cfg, /*with_baseline=*/true);

  std::ostringstream csv;
  csv << "n,rep,seed,algorithm,graph_hash,loss_b,loss_theta,k_hat,elapsed_ms,"
         "status\n";
  for (std::size_t gi = 0; gi < all.size(); ++gi)
    for (const RepRecord& rec : all[gi])
      for (const AlgoRow& r : rec.rows)
        csv << static_cast<int>(rec.grid_value) << ',' << rec.rep << ','
            << rec.seed << ',' << r.algorithm << ',' << rec.ghash << ','
            << fmt(r.loss_b) << ',' << fmt(r.loss_theta) << ',' << r.k_hat
            << ',' << r.elapsed_ms << ',' << r.status << '\n';

  json summary = base_summary(cfg);
  summary["rho"] = cfg.rho;
  summary["points"] = points_json(all, cfg.grid, "n", {"spocpp", "spoc"});
  json wins = json::array();
  for (std::size_t gi = 0; gi < all.size(); ++gi) {
    int won = 0, paired = 0;
    for (const RepRecord& rec : all[gi]) {
      if (rec.rows.size() < 2) continue;
      const AlgoRow& plus = rec.rows[0];
      const AlgoRow& base = rec.rows[1];
      if (plus.status != "ok" || base.status != "ok") continue;
      ++paired;
      if (plus.loss_b < base.loss_b) ++won;
    }
    json j;
    j["n"] = cfg.grid[gi];
    j["paired_reps"] = paired;
    j["improved_wins_loss_b"] = won;
    wins.push_back(j);
  }
  summary["paired_wins"] = wins;

  RunResult res;
  res.csv_path = out_path(cfg, "compare.csv");
  write_text(res.csv_path, csv.str());
  res.summary_json = summary.dump(2) + "\n";
  res.summary_path = out_path(cfg, "compare_summary.json");
  write_text(res.summary_path, res.summary_json);
  return res;
}

RunResult run_stat_dist(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<double> alpha = effective_alpha(cfg);
  CommunityMatrix comm = make_community(cfg, cfg.rho);

  std::ostringstream csv;
  csv << "n,rank,node,t_stat,cdf,pure_fraction_ref\n";
  json per_n = json::array();

  for (std::size_t gi = 0; gi < cfg.grid.size(); ++gi) {
    int n = static_cast<int>(cfg.grid[gi]);
    MembershipMatrix theta = make_membership(
        n, cfg.K, cfg.pure_fraction, alpha,
        mix_seed(cfg.seed ^ 0x517a5eedULL, gi, 0));
    ProbabilityOperator p(theta, comm);
    SparseGraph g = sample_graph(p, experiment_seed(cfg, static_cast<int>(gi), 0));

    AdjacencyOp op(g);
    SpectralPair pair = top_eigs(op, cfg.K);
    VectorXd l_tilde = improved_eigenvalues(pair, op.debias_diagonal());
    std::vector<int> anchors = spa(pair.vectors, cfg.K).indices;
    int anchor = anchors[0];
    double a = cfg.a_mode == RegMode::fixed
                   ? cfg.a_value
                   : default_regularizer(pair.values[0], n, cfg.a_mode);

    VectorXd w_anchor = residual_row(op, pair, l_tilde, anchor);
    std::vector<std::pair<double, int>> stats;
    stats.reserve(n);
    for (int j = 0; j < n; ++j) {
      if (j == anchor) {
        stats.emplace_back(0.0, j);
        continue;
      }
      VectorXd w_j = residual_row(op, pair, l_tilde, j);
      CovarianceEstimate cov = covariance_estimate(
          pair, l_tilde, w_anchor, w_j, w_anchor[j], anchor, j);
      stats.emplace_back(test_statistic(pair.vectors.row(anchor),
                                        pair.vectors.row(j), cov, a),
                         j);
    }
    std::sort(stats.begin(), stats.end());

    int comm_idx;
    theta.rows.row(anchor).maxCoeff(&comm_idx);
    double pure_ref =
        static_cast<double>(theta.pure_sets[comm_idx].size()) / n;

    double t_n = cfg.threshold ? *cfg.threshold : default_threshold(n);
    int below = 0;
    for (std::size_t r = 0; r < stats.size(); ++r) {
      if (stats[r].first < t_n) ++below;
      csv << n << ',' << r + 1 << ',' << stats[r].second << ','
          << fmt(stats[r].first) << ','
          << fmt(static_cast<double>(r + 1) / n) << ',' << fmt(pure_ref)
          << '\n';
    }
    json j;
    j["n"] = n;
    j["anchor"] = anchor;
    j["anchor_community"] = comm_idx;
    j["pure_fraction_ref"] = pure_ref;
    j["threshold"] = t_n;
    j["fraction_below_threshold"] = static_cast<double>(below) / n;
    per_n.push_back(j);
  }

  json summary = base_summary(cfg);
  summary["rho"] = cfg.rho;
  summary["points"] = per_n;

  RunResult res;
  res.csv_path = out_path(cfg, "stat_dist.csv");
  write_text(res.csv_path, csv.str());
  res.summary_json = summary.dump(2) + "\n";
  res.summary_path = out_path(cfg, "stat_dist_summary.json");
  write_text(res.summary_path, res.summary_json);
  return res;
}

RunResult run_lowerbound(const ExperimentConfig& cfg) {
  cfg.validate();
  LowerBoundReport report = certify_lower_bound(cfg.lb_K, cfg.lb_n, cfg.lb_rho,
                                          cfg.seed);
  RunResult res;
  res.ok = report.all_pass();
  res.summary_json = report.to_json();
  res.summary_path = out_path(cfg, "lowerbound_report.json");
  write_text(res.summary_path, res.summary_json);
  return res;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::n_sweep: return run_n_sweep(cfg);
    case ExperimentKind::rho_sweep: return run_rho_sweep(cfg);
    case ExperimentKind::compare: return run_compare(cfg);
    case ExperimentKind::stat_dist: return run_stat_dist(cfg);
    case ExperimentKind::lowerbound: return run_lowerbound(cfg);
  }
  throw Error(ErrorCode::parameter, "unknown experiment kind");
}

}  // namespace spocpp
