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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code;
  std::string out;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("zildp_cli_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write("sup.json",
          R"({"lower": [-1, -1, -10], "upper": [1, 1, 10],
              "private_mask": [true, true, false],
              "column_names": ["x1", "x2", "y"]})");
    std::ostringstream csv;
    csv << "x1,x2,y\n";
    unsigned s = 17;
    for (int i = 0; i < 400; ++i) {
      s = s * 1103515245u + 12345u;
      const double a = ((s >> 8) % 2000) / 1000.0 - 1.0;
      s = s * 1103515245u + 12345u;
      const double b = ((s >> 8) % 2000) / 1000.0 - 1.0;
      s = s * 1103515245u + 12345u;
      const double e = ((s >> 8) % 1000) / 1000.0 - 0.5;
      csv << a << "," << b << "," << (a - b + e) << "\n";
    }
    write("data.csv", csv.str());
  }
  void TearDown() override { fs::remove_all(dir_); }

  void write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
  }
  std::string read(const std::string& name) const {
    std::ifstream in(dir_ / name, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  CliResult run(const std::string& args) const {
    const fs::path log = dir_ / "stdout.txt";
    const std::string cmd = "cd '" + dir_.string() + "' && SOURCE_DATE_EPOCH=1700000000 '" +
                            std::string(ZILDP_CLI_PATH) + "' " + args + " > '" +
                            log.string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
  }

  fs::path dir_;
};

TEST_F(Cli, UnknownSubcommandIsUsageError) {
  const auto r = run("frobnicate");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("calibrate"), std::string::npos);
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("calibrate --epsilon abc").code, 1);
}

TEST_F(Cli, CalibratePrintsAnchor) {
  const auto r = run(
      "calibrate --epsilon 0.8 --delta-dp 0.17 --zero-mass 0.05 --support "
      "sup.json --mode adp --seed 3 --out cal.json");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("seed: 3"), std::string::npos);
  const auto j = nlohmann::json::parse(read("cal.json"));
  EXPECT_NEAR(j["c_prime"].get<double>(), 0.5, 0.01);
  EXPECT_NEAR(j["lambda"].get<double>(), 2.0 / j["c_prime"].get<double>(), 1e-9);
  EXPECT_TRUE(fs::exists(dir_ / "cal.json.manifest.json"));
}

TEST_F(Cli, CalibrateInfeasibleIsNumericError) {
  const auto r = run(
      "calibrate --epsilon 0.8 --delta-dp 0.17 --zero-mass 0.17 --support "
      "sup.json --seed 1");
  EXPECT_EQ(r.code, 3) << r.out;
}

TEST_F(Cli, ConfigOverridesFlags) {
  write("cfg.json", R"({"delta-dp": 0.17, "epsilon": 0.8})");
  auto r = run(
      "calibrate --epsilon 5 --delta-dp 0.5 --zero-mass 0.05 --support "
      "sup.json --seed 1 --out cal.json --config cfg.json");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NEAR(nlohmann::json::parse(read("cal.json"))["c_prime"].get<double>(),
              0.5, 0.01);
  write("bad.json", R"({"no_such_option": 1})");
  r = run("calibrate --support sup.json --config bad.json");
  EXPECT_EQ(r.code, 1);
  r = run("calibrate --support sup.json --config missing.json");
  EXPECT_EQ(r.code, 2);
}

TEST_F(Cli, ReleaseWritesBundleDeterministically) {
  const std::string args =
      "release --input data.csv --support sup.json --zero-mass 0.2 --lambda 0.5 "
      "--seed 7 --out-prefix rel/run1";
  ASSERT_EQ(run(args).code, 0);
  for (const char* f : {"rel/run1.x1.csv", "rel/run1.x2.csv", "rel/run1.meta.json",
                        "rel/run1.manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  }
  const std::string x2 = read("rel/run1.x2.csv"), meta = read("rel/run1.meta.json"),
                    man = read("rel/run1.manifest.json");
  ASSERT_EQ(run(args).code, 0);
  EXPECT_EQ(read("rel/run1.x2.csv"), x2);
  EXPECT_EQ(read("rel/run1.meta.json"), meta);
  EXPECT_EQ(read("rel/run1.manifest.json"), man);
  const auto j = nlohmann::json::parse(meta);
  EXPECT_EQ(j["seed"], 7);
  EXPECT_NEAR(j["c_attribute"].get<double>(), 4.0, 1e-12);
}

TEST_F(Cli, ReleaseRejectsOutOfSupportData) {
  write("bad.csv", "x1,x2,y\n0.5,1.5,0\n");
  const auto r = run(
      "release --input bad.csv --support sup.json --zero-mass 0.2 --lambda 0.5 "
      "--seed 7 --out-prefix rel/bad");
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_EQ(run("release --input nofile.csv --support sup.json --zero-mass 0.2 "
                "--lambda 0.5 --seed 7 --out-prefix rel/bad").code, 2);
  EXPECT_EQ(run("release --input data.csv --support sup.json --zero-mass 1.2 "
                "--lambda 0.5 --seed 7 --out-prefix rel/bad").code, 1);
}

TEST_F(Cli, EstimateFromBundle) {
  ASSERT_EQ(run("release --input data.csv --support sup.json --zero-mass 0.2 "
                "--lambda 0.5 --seed 7 --out-prefix rel/run1").code, 0);
  auto r = run("estimate --bundle rel/run1 --loss linear --method sdrcl --seed 2 "
               "--out rep.json");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(read("rep.json"));
  EXPECT_EQ(j["theta_hat"].size(), 2u);
  EXPECT_EQ(j["method"], "sdrcl");
  const std::string first = read("rep.json");
  ASSERT_EQ(run("estimate --bundle rel/run1 --loss linear --method sdrcl "
                "--seed 2 --out rep.json").code, 0);
  EXPECT_EQ(read("rep.json"), first);
  r = run("estimate --bundle rel/run1 --loss check:0.5 --method sdrcl --seed 2");
  EXPECT_EQ(r.code, 1);
  r = run("estimate --data data.csv --support sup.json --loss linear "
          "--method oracle --seed 2 --out o.json");
  EXPECT_EQ(r.code, 0) << r.out;
  r = run("estimate --bundle nothere --loss linear --method drcl --seed 2");
  EXPECT_EQ(r.code, 2);
}

TEST_F(Cli, TradeoffAndExperimentAreDeterministic) {
  const std::string t =
      "tradeoff --kind empirical --d 2 --c 0.5 --n-sim 10000 --points 101 "
      "--seed 5 --out emp.csv --profile 0.5 --profile 0.8";
  ASSERT_EQ(run(t).code, 0);
  const std::string a = read("emp.csv"), am = read("emp.csv.manifest.json");
  ASSERT_EQ(run(t).code, 0);
  EXPECT_EQ(read("emp.csv"), a);
  EXPECT_EQ(read("emp.csv.manifest.json"), am);

  const std::string e =
      "experiment --name table1 --n 200 --zero-mass 0.1 --lambda 0.94 "
      "--replications 20 --seed 9 --out-dir res";
  ASSERT_EQ(run(e).code, 0);
  const std::string s1 = read("res/table1/summary.csv"),
                    m1 = read("res/table1/manifest.json");
  ASSERT_EQ(run(e).code, 0);
  EXPECT_EQ(read("res/table1/summary.csv"), s1);
  EXPECT_EQ(read("res/table1/manifest.json"), m1);
}

TEST_F(Cli, UnseededRunReportsSeed) {
  const auto r = run("tradeoff --kind beta --c 0.5 --points 11 --out b.csv");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("seed: "), std::string::npos);
  const auto m = nlohmann::json::parse(read("b.csv.manifest.json"));
  EXPECT_TRUE(m["seed"].is_number_unsigned());
}

}  // namespace
