// Copyright 2026 The zildp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "zildp/distributions.hpp"
#include "zildp/error.hpp"
#include "zildp/estimation.hpp"
#include "zildp/io.hpp"
#include "zildp/losses.hpp"
#include "zildp/mechanism.hpp"
#include "zildp/parallel.hpp"
#include "zildp/rng.hpp"
#include "zildp/tradeoff.hpp"

namespace zildp {

inline constexpr const char* kVersion = "1.0.0";

struct ExperimentConfig {
  std::string experiment = "table1";
  std::vector<int> ns;
  int replications = 0;
  std::vector<NoiseParams> noise;
  std::uint64_t seed = 20240601;
  std::string output_dir = "results";
  double replication_scale = 1.0;
  int restarts = 5;
  int n_sim = 100000;  // figure1 Monte-Carlo size
  // Restrict the estimators run (empty = all of the experiment's methods).
  std::vector<std::string> methods;

  // Fills unset fields with the experiment's defaults.
  void apply_defaults() {
    if (experiment == "table1") {
      if (ns.empty()) ns = {500, 1000};
      if (noise.empty()) noise = {{0.1, 0.94}, {0.05, 1.4}};
      if (replications == 0) replications = 1000;
    } else if (experiment == "table2") {
      if (ns.empty()) ns = {5000, 7500, 10000};
      if (noise.empty()) noise = {{0.2, 0.5}, {0.2, 1.0}};
      if (replications == 0) replications = 200;
    } else if (experiment == "table3") {
      if (ns.empty()) ns = {2500, 5000, 7500};
      if (noise.empty()) noise = {{0.2, 2.0}, {0.2, 2.5}};
      if (replications == 0) replications = 200;
    } else if (experiment == "figure1") {
      if (noise.empty()) noise = {{0.05, 1.0}};
      if (replications == 0) replications = 1;
    } else {
      throw ParameterError("unknown experiment '" + experiment +
                           "'; expected table1, table2, table3 or figure1");
    }
  }

  int effective_replications() const {
    return std::max(1, static_cast<int>(std::lround(replications *
                                                    replication_scale)));
  }

  void validate() const {
    if (replications < 1) throw ParameterError("replications must be >= 1");
    if (!(replication_scale > 0.0)) {
      throw ParameterError("replication_scale must be positive");
    }
    for (int n : ns) {
      if (n < 2) throw ParameterError("sample sizes must be >= 2");
    }
    for (const auto& p : noise) p.validate();
    if (restarts < 1) throw ParameterError("restarts must be >= 1");
    if (n_sim < 10000) throw ParameterError("n_sim must be >= 10000");
  }

  nlohmann::json to_json() const {
    nlohmann::json noise_j = nlohmann::json::array();
    for (const auto& p : noise) {
      noise_j.push_back({{"zero_mass", p.zero_mass}, {"lambda", p.scale}});
    }
    return {{"experiment", experiment},
            {"ns", ns},
            {"replications", replications},
            {"effective_replications", effective_replications()},
            {"noise", noise_j},
            {"seed", seed},
            {"output_dir", output_dir},
            {"replication_scale", replication_scale},
            {"restarts", restarts},
            {"n_sim", n_sim},
            {"methods", methods}};
  }

  static ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
      c.experiment = j.value("experiment", c.experiment);
      c.ns = j.value("ns", c.ns);
      c.replications = j.value("replications", c.replications);
      c.seed = j.value("seed", c.seed);
      c.output_dir = j.value("output_dir", c.output_dir);
      c.replication_scale = j.value("replication_scale", c.replication_scale);
      c.restarts = j.value("restarts", c.restarts);
      c.n_sim = j.value("n_sim", c.n_sim);
      c.methods = j.value("methods", c.methods);
      if (j.contains("noise")) {
        for (const auto& p : j.at("noise")) {
          c.noise.push_back(
              {p.at("zero_mass").get<double>(), p.at("lambda").get<double>()});
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("experiment config: ") + e.what());
    }
    return c;
  }
};

// One aggregated cell: error summary of one parameter for one estimator.
struct ResultRow {
  std::string experiment;
  int n = 0;
  std::string setting;
  std::string method;
  std::string parameter;
  double rmse = 0.0;
  double mc_se = 0.0;
  double mae = 0.0;
  int replications = 0;
  int failures = 0;
};

struct ResultTable {
  std::vector<ResultRow> rows;

  const ResultRow* find(int n, const std::string& setting,
                        const std::string& method,
                        const std::string& parameter) const {
    for (const auto& r : rows) {
      if (r.n == n && r.setting == setting && r.method == method &&
          r.parameter == parameter) {
        return &r;
      }
    }
    return nullptr;
  }

  const ResultRow& at(int n, const std::string& setting,
                      const std::string& method,
                      const std::string& parameter) const {
    const ResultRow* r = find(n, setting, method, parameter);
    if (!r) {
      throw ParameterError("no result cell n=" + std::to_string(n) + " " +
                           setting + " " + method + " " + parameter);
    }
    return *r;
  }

  static constexpr const char* kHeader =
      "experiment,n,setting,method,parameter,rmse,mc_se,mae,replications,"
      "failures";

  std::string to_csv() const {
    std::string out = std::string(kHeader) + "\n";
    for (const auto& r : rows) {
      out += r.experiment + "," + std::to_string(r.n) + "," + r.setting + "," +
             r.method + "," + r.parameter + "," + format_double(r.rmse) + "," +
             format_double(r.mc_se) + "," + format_double(r.mae) + "," +
             std::to_string(r.replications) + "," +
             std::to_string(r.failures) + "\n";
    }
    return out;
  }

  static ResultTable from_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != kHeader) throw DataError(path.string() + ": unexpected header");
    ResultTable t;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto c = split_csv_line(line);
      if (c.size() != 10) throw DataError(path.string() + ": malformed row");
      ResultRow r;
      r.experiment = c[0];
      r.n = static_cast<int>(parse_double(c[1], path.string()));
      r.setting = c[2];
      r.method = c[3];
      r.parameter = c[4];
      r.rmse = parse_double(c[5], path.string());
      r.mc_se = parse_double(c[6], path.string());
      r.mae = parse_double(c[7], path.string());
      r.replications = static_cast<int>(parse_double(c[8], path.string()));
      r.failures = static_cast<int>(parse_double(c[9], path.string()));
      t.rows.push_back(std::move(r));
    }
    return t;
  }
};

namespace detail {

inline std::string setting_label(const NoiseParams& p) {
  return "zm" + format_double(p.zero_mass) + "_lambda" + format_double(p.scale);
}

// Errors of one (method, parameter) over replications; NaN marks a failed
// replication.
inline ResultRow summarize(const std::vector<double>& errors) {
  ResultRow row;
  double s2 = 0.0, s4 = 0.0, sa = 0.0;
  int ok = 0;
  for (double e : errors) {
    if (std::isnan(e)) {
      ++row.failures;
      continue;
    }
    ++ok;
    s2 += e * e;
    s4 += e * e * e * e;
    sa += std::fabs(e);
  }
  row.replications = ok;
  if (ok == 0) {
    row.rmse = row.mc_se = row.mae = std::nan("");
    return row;
  }
  const double mse = s2 / ok;
  row.rmse = std::sqrt(mse);
  row.mae = sa / ok;
  // Delta method: se(RMSE) = se(MSE) / (2 RMSE).
  const double var_sq = ok > 1 ? (s4 / ok - mse * mse) * ok / (ok - 1) : 0.0;
  row.mc_se = row.rmse > 0.0
                  ? std::sqrt(std::max(var_sq, 0.0) / ok) / (2.0 * row.rmse)
                  : 0.0;
  return row;
}

// Averages a group of rows into one "avg" row; standard errors are combined
// as if independent.
inline ResultRow average_rows(const std::vector<ResultRow>& group,
                              const std::string& parameter) {
  ResultRow out = group.front();
  out.parameter = parameter;
  out.rmse = out.mc_se = out.mae = 0.0;
  double var = 0.0;
  for (const auto& r : group) {
    out.rmse += r.rmse;
    out.mae += r.mae;
    var += r.mc_se * r.mc_se;
    out.failures = std::max(out.failures, r.failures);
    out.replications = std::min(out.replications, r.replications);
  }
  const double k = static_cast<double>(group.size());
  out.rmse /= k;
  out.mae /= k;
  out.mc_se = std::sqrt(var) / k;
  return out;
}

inline bool wants(const ExperimentConfig& c, const std::string& method) {
  if (c.methods.empty()) return true;
  return std::find(c.methods.begin(), c.methods.end(), method) !=
         c.methods.end();
}

// Runs `reps` replications of `body` (writing an errors matrix row per
// method) in parallel and summarises them.
struct CellSpec {
  std::string experiment;
  int n;
  std::string setting;
  std::vector<std::string> methods;
  std::vector<std::string> parameters;
  // Extra averaged row over these parameter indices, if non-empty.
  std::vector<std::size_t> average_over;
  std::string average_name;
};

// body(rep, errors) fills errors[method][parameter]; a thrown zildp::Error
// marks the failing method's entries as NaN through the callback contract.
using ReplicationBody = std::function<void(
    std::size_t rep, std::vector<std::vector<double>>& errors)>;

inline void run_cell(const CellSpec& spec, int reps,
                     const ReplicationBody& body, ResultTable& table) {
  const std::size_t m = spec.methods.size(), q = spec.parameters.size();
  std::vector<std::vector<std::vector<double>>> all(
      static_cast<std::size_t>(reps),
      std::vector<std::vector<double>>(m, std::vector<double>(q, std::nan(""))));
  parallel_for(static_cast<std::size_t>(reps),
               [&](std::size_t r) { body(r, all[r]); });
  for (std::size_t a = 0; a < m; ++a) {
    std::vector<ResultRow> group;
    for (std::size_t b = 0; b < q; ++b) {
      std::vector<double> errs(static_cast<std::size_t>(reps));
      for (int r = 0; r < reps; ++r) errs[r] = all[r][a][b];
      ResultRow row = summarize(errs);
      row.experiment = spec.experiment;
      row.n = spec.n;
      row.setting = spec.setting;
      row.method = spec.methods[a];
      row.parameter = spec.parameters[b];
      table.rows.push_back(row);
      if (std::find(spec.average_over.begin(), spec.average_over.end(), b) !=
          spec.average_over.end()) {
        group.push_back(row);
      }
    }
    if (!group.empty()) {
      table.rows.push_back(average_rows(group, spec.average_name));
    }
  }
}

// Runs one estimator and writes theta_hat - theta0 into `out`; failures leave
// NaN.
inline void record_estimate(EstimatorMethod method, const Loss& loss,
                            const EstimationData& data,
                            const EstimateOptions& opts, const Vector& theta0,
                            std::vector<double>& out) {
  try {
    const EstimateReport rep = estimate(method, loss, data, opts);
    for (Eigen::Index k = 0; k < theta0.size(); ++k) {
      out[static_cast<std::size_t>(k)] = rep.theta_hat[k] - theta0[k];
    }
  } catch (const NumericError&) {
  } catch (const InferenceError&) {
  }
}

inline std::uint64_t cell_key(int n, std::size_t setting) {
  return (static_cast<std::uint64_t>(n) << 8) ^ setting;
}

}  // namespace detail

// Mean estimation under the three squared-transform losses for U(0,1) data.
// Methods: oracle, sl (Laplacian omitted, these losses have none) and drcl.
inline ResultTable run_table1(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  cfg.experiment = "table1";
  cfg.apply_defaults();
  cfg.validate();
  const int reps = cfg.effective_replications();
  const std::vector<std::string> loss_names = {"mean-relu", "mean-indicator",
                                               "mean-abssin"};
  const std::vector<double> truth = {0.5, 0.5, 2.0 / std::numbers::pi};
  std::vector<std::unique_ptr<Loss>> losses_v;
  for (const auto& nm : loss_names) losses_v.push_back(make_loss(nm));
  std::vector<std::string> methods;
  for (const char* m : {"oracle", "sl", "drcl"}) {
    if (detail::wants(cfg, m)) methods.push_back(m);
  }
  ResultTable table;
  const RngStream root(cfg.seed, 1);
  for (int n : cfg.ns) {
    for (std::size_t s = 0; s < cfg.noise.size(); ++s) {
      const NoiseParams params = cfg.noise[s];
      detail::CellSpec spec{"table1", n, detail::setting_label(params),
                            methods, loss_names, {}, ""};
      const RngStream cell = root.substream(detail::cell_key(n, s));
      auto body = [&](std::size_t r, std::vector<std::vector<double>>& err) {
        RngStream stream = cell.substream(r);
        RngStream data_rng = stream.substream(0);
        Matrix x(n, 1);
        for (int i = 0; i < n; ++i) x(i, 0) = data_rng.uniform();
        auto [x1, x2] = drdp_noise_matrix(x, params, stream.substream(1));
        EstimationData data;
        data.clean = x;
        data.x1 = std::move(x1);
        data.x2 = std::move(x2);
        data.publics = Matrix(n, 0);
        data.params = params;
        EstimateOptions opts;
        opts.covariance = false;
        opts.sl_omit_laplacian = true;
        opts.optim.restarts = cfg.restarts;
        opts.optim.seed = cfg.seed ^ r;
        for (std::size_t a = 0; a < methods.size(); ++a) {
          const EstimatorMethod m = parse_estimator(methods[a]);
          for (std::size_t l = 0; l < losses_v.size(); ++l) {
            std::vector<double> one(1, std::nan(""));
            detail::record_estimate(m, *losses_v[l], data, opts,
                                    Vector::Constant(1, truth[l]), one);
            err[a][l] = one[0];
          }
        }
      };
      detail::run_cell(spec, reps, body, table);
    }
  }
  return table;
}

// Covariates: truncated N(0, I_6) on [-1, 1]^6, all private.
inline Matrix truncated_covariates(int n, int d, RngStream rng) {
  const std::vector<double> lo(static_cast<std::size_t>(d), -1.0),
      hi(static_cast<std::size_t>(d), 1.0);
  return sample_truncated_normal(lo, hi, n, rng);
}

// Logistic regression with beta = 1_6; the response stays public.
inline ResultTable run_table2(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  cfg.experiment = "table2";
  cfg.apply_defaults();
  cfg.validate();
  const int reps = cfg.effective_replications();
  constexpr int d = 6;
  const Vector beta = Vector::Ones(d);
  std::vector<std::string> params_names;
  std::vector<std::size_t> avg;
  for (int k = 1; k <= d; ++k) {
    params_names.push_back("beta" + std::to_string(k));
    avg.push_back(static_cast<std::size_t>(k - 1));
  }
  std::vector<std::string> methods;
  for (const char* m : {"oracle", "naive", "sl", "sdrcl", "drcl"}) {
    if (detail::wants(cfg, m)) methods.push_back(m);
  }
  const auto loss = make_loss("logistic");
  ResultTable table;
  const RngStream root(cfg.seed, 2);
  for (int n : cfg.ns) {
    for (std::size_t s = 0; s < cfg.noise.size(); ++s) {
      const NoiseParams params = cfg.noise[s];
      detail::CellSpec spec{"table2", n, detail::setting_label(params),
                            methods, params_names, avg, "avg"};
      const RngStream cell = root.substream(detail::cell_key(n, s));
      auto body = [&](std::size_t r, std::vector<std::vector<double>>& err) {
        RngStream stream = cell.substream(r);
        const Matrix x = truncated_covariates(n, d, stream.substream(0));
        RngStream yr = stream.substream(2);
        Matrix y(n, 1);
        for (int i = 0; i < n; ++i) {
          const double u = x.row(i).dot(beta.transpose());
          y(i, 0) = yr.uniform() < losses::Logistic::sigmoid(u) ? 1.0 : 0.0;
        }
        auto [x1, x2] = drdp_noise_matrix(x, params, stream.substream(1));
        EstimationData data;
        data.clean = x;
        data.x1 = std::move(x1);
        data.x2 = std::move(x2);
        data.publics = y;
        data.params = params;
        EstimateOptions opts;
        opts.covariance = false;
        opts.optim.restarts = cfg.restarts;
        opts.optim.seed = cfg.seed ^ r;
        for (std::size_t a = 0; a < methods.size(); ++a) {
          detail::record_estimate(parse_estimator(methods[a]), *loss, data,
                                  opts, beta, err[a]);
        }
      };
      detail::run_cell(spec, reps, body, table);
    }
  }
  return table;
}

// Median regression y = 1 + x'1_6 + N(0, 1); intercept and response public.
inline ResultTable run_table3(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  cfg.experiment = "table3";
  cfg.apply_defaults();
  cfg.validate();
  const int reps = cfg.effective_replications();
  constexpr int d = 6;
  const Vector theta = Vector::Ones(d + 1);
  std::vector<std::string> params_names = {"beta0"};
  std::vector<std::size_t> avg;
  for (int k = 1; k <= d; ++k) {
    params_names.push_back("beta" + std::to_string(k));
    avg.push_back(static_cast<std::size_t>(k));
  }
  std::vector<std::string> methods;
  for (const char* m : {"oracle", "naive", "drcl"}) {
    if (detail::wants(cfg, m)) methods.push_back(m);
  }
  const auto loss = make_loss("check:0.5");
  ResultTable table;
  const RngStream root(cfg.seed, 3);
  for (int n : cfg.ns) {
    for (std::size_t s = 0; s < cfg.noise.size(); ++s) {
      const NoiseParams params = cfg.noise[s];
      detail::CellSpec spec{"table3", n, detail::setting_label(params),
                            methods, params_names, avg, "avg_slope"};
      const RngStream cell = root.substream(detail::cell_key(n, s));
      auto body = [&](std::size_t r, std::vector<std::vector<double>>& err) {
        RngStream stream = cell.substream(r);
        const Matrix x = truncated_covariates(n, d, stream.substream(0));
        RngStream er = stream.substream(2);
        Matrix y(n, 1);
        for (int i = 0; i < n; ++i) y(i, 0) = 1.0 + x.row(i).sum() + er.normal();
        auto [x1, x2] = drdp_noise_matrix(x, params, stream.substream(1));
        EstimationData data;
        data.clean = x;
        data.x1 = std::move(x1);
        data.x2 = std::move(x2);
        data.publics = y;
        data.params = params;
        EstimateOptions opts;
        opts.covariance = false;
        opts.optim.restarts = cfg.restarts;
        opts.optim.seed = cfg.seed ^ r;
        for (std::size_t a = 0; a < methods.size(); ++a) {
          detail::record_estimate(parse_estimator(methods[a]), *loss, data,
                                  opts, theta, err[a]);
        }
      };
      detail::run_cell(spec, reps, body, table);
    }
  }
  return table;
}

struct Figure1Output {
  std::map<std::string, TradeoffCurve> curves;  // file stem -> curve
  std::vector<double> epsilons;
  std::vector<double> delta_tilde;
};

// Curves for the two panels: beta_{0.5, zm}, empirical T_{2,0.5,zm} and
// T_{4,0.5,zm}, the seven (eps, delta~) envelopes and beta_{c, zm} for four
// values of c.
inline Figure1Output run_figure1(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  cfg.experiment = "figure1";
  cfg.apply_defaults();
  cfg.validate();
  const double zm = cfg.noise.front().zero_mass;
  const double c = 0.5;
  Figure1Output out;
  const auto grid = alpha_grid();
  out.curves["beta_c0.5"] = tabulate_curve(
      "beta_{0.5," + format_double(zm) + "}",
      [&](double a) { return beta_c_delta(a, c, zm); }, grid);
  const RngStream root(cfg.seed, 4);
  for (int d : {2, 4}) {
    TradeoffCurve emp =
        empirical_tradeoff(d, c, cfg.n_sim, root.substream(static_cast<std::uint64_t>(d)));
    TradeoffCurve shrunk = tradeoff_shrink(emp, zm);
    shrunk.label = "T_{" + std::to_string(d) + ",0.5," + format_double(zm) + "}";
    out.curves["empirical_d" + std::to_string(d)] = std::move(shrunk);
  }
  out.epsilons = {0.5, 0.7, 0.9, 1.2, 1.6, 2.1, 2.8};
  for (double e : out.epsilons) {
    const double dt = delta_profile_zil(c, e, zm);
    out.delta_tilde.push_back(dt);
    const PrivacyBudget b{e, dt};
    out.curves["envelope_eps" + format_double(e)] = tabulate_curve(
        "f_{" + format_double(e) + "," + format_double(dt) + "}",
        [&](double a) { return f_eps_delta(a, b); }, grid);
  }
  for (double cc : {0.2, 0.5, 0.8, 1.0}) {
    out.curves["panel_b_c" + format_double(cc)] = tabulate_curve(
        "beta_{" + format_double(cc) + "," + format_double(zm) + "}",
        [&](double a) { return beta_c_delta(a, cc, zm); }, grid);
  }
  return out;
}

// Runs the configured experiment, writes results/<experiment>/<cell>.csv (or
// curve CSVs) plus manifest.json, and returns the manifest.
inline nlohmann::json run_experiment(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  cfg.apply_defaults();
  cfg.validate();
  const std::filesystem::path dir =
      std::filesystem::path(cfg.output_dir) / cfg.experiment;
  std::filesystem::create_directories(dir);
  nlohmann::json files = nlohmann::json::array();
  nlohmann::json extra;
  if (cfg.experiment == "figure1") {
    const Figure1Output fig = run_figure1(cfg);
    for (const auto& [stem, curve] : fig.curves) {
      const auto path = dir / (stem + ".csv");
      write_curve_csv(path, curve);
      files.push_back(path.string());
    }
    nlohmann::json prof = nlohmann::json::array();
    for (std::size_t k = 0; k < fig.epsilons.size(); ++k) {
      prof.push_back({{"epsilon", fig.epsilons[k]},
                      {"delta_dp", fig.delta_tilde[k]}});
    }
    extra["profile"] = prof;
  } else {
    ResultTable table;
    if (cfg.experiment == "table1") {
      table = run_table1(cfg);
      extra["setting_labels"] = {
          {"zm0.1_lambda0.94", "(1.5,0.1)-DP"},
          {"zm0.05_lambda1.4",
           "(1,0.05)-DP in the text; the table caption prints (1.5,0.05)"}};
    } else if (cfg.experiment == "table2") {
      table = run_table2(cfg);
    } else {
      table = run_table3(cfg);
    }
    std::map<std::string, ResultTable> cells;
    for (const auto& r : table.rows) {
      cells["n" + std::to_string(r.n) + "_" + r.setting].rows.push_back(r);
    }
    for (const auto& [name, t] : cells) {
      const auto path = dir / (name + ".csv");
      write_text_file(path, t.to_csv());
      files.push_back(path.string());
    }
    const auto all = dir / "summary.csv";
    write_text_file(all, table.to_csv());
    files.push_back(all.string());
  }
  nlohmann::json manifest;
  manifest["tool"] = "zildp";
  manifest["version"] = kVersion;
  manifest["generator"] = kGeneratorName;
  manifest["seed"] = cfg.seed;
  manifest["config"] = cfg.to_json();
  manifest["outputs"] = files;
  manifest["versions"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                        std::to_string(EIGEN_MAJOR_VERSION) +
                                        "." + std::to_string(EIGEN_MINOR_VERSION)},
                          {"nlohmann_json",
                           std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                               std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                               "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  for (auto it = extra.begin(); it != extra.end(); ++it) {
    manifest[it.key()] = it.value();
  }
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace zildp
