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

#include <cmath>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "zildp/harness.hpp"

namespace zildp {
namespace {

TEST(ResultTable, CsvRoundTrip) {
  ResultTable t;
  t.rows.push_back({"table2", 5000, "zm0.2_lambda0.5", "sdrcl", "beta1",
                    0.2439999999999999, 0.0123, 0.2, 200, 0});
  t.rows.push_back({"table2", 5000, "zm0.2_lambda0.5", "naive", "avg",
                    1.0 / 3.0, 1e-17, 0.7, 200, 2});
  const auto path = std::filesystem::temp_directory_path() / "zildp_rt.csv";
  write_text_file(path, t.to_csv());
  const auto back = ResultTable::from_csv(path);
  EXPECT_EQ(back.to_csv(), t.to_csv());
  ASSERT_EQ(back.rows.size(), 2u);
  EXPECT_EQ(back.rows[0].rmse, t.rows[0].rmse);
  EXPECT_EQ(back.rows[1].failures, 2);
  EXPECT_EQ(back.at(5000, "zm0.2_lambda0.5", "naive", "avg").mae, 0.7);
  EXPECT_THROW(back.at(1, "x", "y", "z"), ParameterError);
  std::filesystem::remove(path);
}

TEST(ExperimentConfig, DefaultsJsonAndValidation) {
  ExperimentConfig c;
  c.experiment = "table3";
  c.apply_defaults();
  EXPECT_EQ(c.ns, (std::vector<int>{2500, 5000, 7500}));
  EXPECT_EQ(c.replications, 200);
  const auto back = ExperimentConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json().dump(), c.to_json().dump());
  ExperimentConfig bad;
  bad.experiment = "table9";
  EXPECT_THROW(bad.apply_defaults(), ParameterError);
  ExperimentConfig neg = c;
  neg.noise = {{1.2, 1.0}};
  EXPECT_THROW(neg.validate(), ParameterError);
  c.replication_scale = 0.25;
  EXPECT_EQ(c.effective_replications(), 50);
}

TEST(Summarize, RmseMaeAndFailures) {
  const auto r = detail::summarize({0.1, -0.2, std::nan(""), 0.2});
  EXPECT_EQ(r.replications, 3);
  EXPECT_EQ(r.failures, 1);
  EXPECT_NEAR(r.rmse, std::sqrt((0.01 + 0.04 + 0.04) / 3.0), 1e-15);
  EXPECT_NEAR(r.mae, 0.5 / 3.0, 1e-15);
}

ExperimentConfig table1_config(int reps, std::vector<int> ns) {
  ExperimentConfig c;
  c.experiment = "table1";
  c.ns = std::move(ns);
  c.replications = reps;
  return c;
}

TEST(Table1, DeterministicForFixedSeed) {
  const auto cfg = table1_config(50, {500});
  EXPECT_EQ(run_table1(cfg).to_csv(), run_table1(cfg).to_csv());
  auto other = cfg;
  other.seed = 7;
  EXPECT_NE(run_table1(cfg).to_csv(), run_table1(other).to_csv());
}

TEST(Table1, RmseShrinksAtRootNRateAndGrowsWithPrivacy) {
  const auto t = run_table1(table1_config(400, {500, 2000}));
  for (const char* setting : {"zm0.1_lambda0.94", "zm0.05_lambda1.4"}) {
    for (const char* method : {"oracle", "drcl"}) {
      for (const char* p : {"mean-relu", "mean-indicator", "mean-abssin"}) {
        const double ratio = t.at(500, setting, method, p).rmse /
                             t.at(2000, setting, method, p).rmse;
        EXPECT_NEAR(ratio, 2.0, 0.5) << setting << " " << method << " " << p;
      }
    }
  }
  for (int n : {500, 2000}) {
    for (const char* p : {"mean-relu", "mean-indicator", "mean-abssin"}) {
      EXPECT_GE(t.at(n, "zm0.05_lambda1.4", "drcl", p).rmse,
                t.at(n, "zm0.1_lambda0.94", "drcl", p).rmse)
          << n << " " << p;
    }
  }
}

TEST(Table2, NaiveIsFlatWhileSdrclShrinks) {
  ExperimentConfig c;
  c.experiment = "table2";
  c.ns = {2000, 8000};
  c.noise = {{0.2, 0.5}};
  c.replications = 60;
  c.methods = {"naive", "sdrcl"};
  const auto t = run_table2(c);
  const std::string s = "zm0.2_lambda0.5";
  const double naive = t.at(2000, s, "naive", "avg").rmse /
                       t.at(8000, s, "naive", "avg").rmse;
  EXPECT_NEAR(naive, 1.0, 0.2);
  const double sdr = t.at(2000, s, "sdrcl", "avg").rmse /
                     t.at(8000, s, "sdrcl", "avg").rmse;
  EXPECT_NEAR(sdr, 2.0, 0.5);
}

TEST(Figure1, CurveProperties) {
  ExperimentConfig c;
  c.experiment = "figure1";
  const auto fig = run_figure1(c);
  const auto& beta = fig.curves.at("beta_c0.5");
  for (const auto& [name, curve] : fig.curves) {
    EXPECT_LE(curve.invariant_violation(), 1e-9) << name;
    if (name.rfind("envelope", 0) == 0) {
      for (std::size_t i = 0; i < curve.size(); ++i) {
        EXPECT_LE(curve.betas[i], beta.betas[i] + 1e-9) << name;
      }
    }
  }
  const auto& c1 = fig.curves.at("panel_b_c1");
  const auto& c02 = fig.curves.at("panel_b_c0.2");
  const auto& e2 = fig.curves.at("empirical_d2");
  const auto& e4 = fig.curves.at("empirical_d4");
  double sup2 = 0.0, sup4 = 0.0;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    EXPECT_LE(c1.betas[i], beta.betas[i] + 1e-12);
    EXPECT_LE(beta.betas[i], c02.betas[i] + 1e-12);
    EXPECT_GE(e4.betas[i], beta.betas[i] - 0.01);
    sup2 = std::max(sup2, std::fabs(e2.betas[i] - beta.betas[i]));
    sup4 = std::max(sup4, std::fabs(e4.betas[i] - beta.betas[i]));
  }
  // The gap to the limit shrinks roughly like 1/d.
  EXPECT_LT(sup4, sup2);
  EXPECT_LE(sup4, 0.07);
  EXPECT_EQ(fig.epsilons.size(), 7u);
}

TEST(RunExperiment, WritesCellsSummaryAndManifest) {
  auto cfg = table1_config(50, {500});
  cfg.output_dir = (std::filesystem::temp_directory_path() / "zildp_exp").string();
  std::filesystem::remove_all(cfg.output_dir);
  const auto m = run_experiment(cfg);
  const auto dir = std::filesystem::path(cfg.output_dir) / "table1";
  EXPECT_TRUE(std::filesystem::exists(dir / "manifest.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "n500_zm0.1_lambda0.94.csv"));
  EXPECT_EQ(m["seed"], cfg.seed);
  EXPECT_TRUE(m.contains("setting_labels"));
  std::filesystem::remove_all(cfg.output_dir);
}

}  // namespace
}  // namespace zildp
