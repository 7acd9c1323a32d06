// Copyright 2026 The pqst Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pqst/io.hpp"

namespace {

struct Run {
  int status = -1;
  std::string out;
};

/// Runs the CLI with `args` (shell syntax) and captures stdout and stderr.
Run run(const std::string& args) {
  const std::string cmd = std::string(PQST_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) r.out += buf.data();
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

/// Stdout only, for byte comparisons.
std::string run_stdout(const std::string& args) {
  const std::string cmd = std::string(PQST_CLI_PATH) + " " + args + " 2>/dev/null";
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return out;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) out += buf.data();
  pclose(pipe);
  return out;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("pqst_cli_" + name)).string();
}

double field(const std::string& out, const std::string& key) {
  const auto pos = out.find(key + ": ");
  if (pos == std::string::npos) return std::nan("");
  return std::stod(out.substr(pos + key.size() + 2));
}

TEST(Reconstruct, ExactTwoQubitFixture) {
  const auto r = run("reconstruct --state table2-v --sets 'zeta-X,zeta-A:1|zeta-A:2' --exact");
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_GE(field(r.out, "fidelity"), 1 - 1e-10) << r.out;
}

TEST(Reconstruct, ThreeQubitsWithReport) {
  const std::string path = temp_path("report.json");
  const auto r = run("reconstruct --state rho3X --sets zeta-X,zeta-m:1,zeta-m:2 --exact -o " + path);
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_GE(field(r.out, "fidelity"), 1 - 1e-10) << r.out;
  const auto j = pqst::read_json_file(path);
  EXPECT_EQ(j.at("estimators").size(), 3U);
  EXPECT_EQ(j.at("estimate").at("n_qubits"), 3);
  std::filesystem::remove(path);
}

TEST(Reconstruct, SampledFromJsonFile) {
  const std::string path = temp_path("state.json");
  pqst::write_density_matrix(path, pqst::fixture_state("table2-iii").op());
  const auto r = run("reconstruct --state " + path + " --sets zeta-X,zeta-m:1 --shots 100000 --seed 4 --workers 3");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_GE(field(r.out, "fidelity"), 0.97);
  const auto again = run("reconstruct --state " + path + " --sets zeta-X,zeta-m:1 --shots 100000 --seed 4");
  EXPECT_EQ(r.out, again.out);
  std::filesystem::remove(path);
}

TEST(Reconstruct, MissingPatternsExitTwo) {
  const auto r = run("reconstruct --state rho2 --sets zeta-X --exact");
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.out.find("{1}"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("{2}"), std::string::npos) << r.out;
}

TEST(Reconstruct, UsageErrors) {
  EXPECT_EQ(run("reconstruct --state rho2 --sets zeta-X,zeta-m:1 --shots 100").status, 2);
  EXPECT_EQ(run("reconstruct --state rho2 --sets zeta-X,zeta-m:1").status, 2);
  EXPECT_EQ(run("reconstruct --state rho2 --sets zeta-X,zeta-m:1 --exact --shots 10 --seed 1").status, 2);
  EXPECT_EQ(run("reconstruct --state nowhere --sets zeta-X --exact").status, 2);
  EXPECT_EQ(run("reconstruct --state rho2 --sets bogus --exact").status, 2);
  EXPECT_EQ(run("").status, 2);
  EXPECT_EQ(run("frobnicate").status, 2);
}

TEST(Reconstruct, NonPhysicalInputExitsOne) {
  const std::string path = temp_path("bad_state.json");
  std::ofstream(path) << R"({"n_qubits": 1, "re": [1.2, 0, 0, -0.2], "im": [0, 0, 0, 0]})";
  const auto r = run("reconstruct --state " + path + " --sets zeta-X --exact");
  EXPECT_EQ(r.status, 1) << r.out;
  std::filesystem::remove(path);
}

TEST(Estimate, XStructuredExact) {
  const auto r = run("estimate --state rho2X --obs \"1 ZZ\" --exact");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NEAR(field(r.out, "estimate"), field(r.out, "exact"), 1e-12);
  EXPECT_NE(r.out.find("zeta-X"), std::string::npos) << r.out;
}

TEST(Estimate, RotatedMethod) {
  const auto r = run("estimate --state rho2 --obs \"1 ZX\" --method pqst-rotated --exact");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NEAR(field(r.out, "estimate"), field(r.out, "exact"), 1e-12);
  EXPECT_NE(r.out.find("rotated"), std::string::npos);
}

TEST(Estimate, SampledReportsStandardError) {
  const auto r = run("estimate --state rho2 --obs O2 --shots 100000 --seed 9");
  ASSERT_EQ(r.status, 0) << r.out;
  const double se = field(r.out, "stderr");
  EXPECT_GT(se, 0.0);
  EXPECT_LE(std::abs(field(r.out, "estimate") - field(r.out, "exact")), 5 * se);
}

TEST(Estimate, MalformedObservableNamesPosition) {
  const auto r = run("estimate --state rho2 --obs \"8 ZZ; 2 XQ\" --exact");
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.out.find("position 9"), std::string::npos) << r.out;
  EXPECT_EQ(run("estimate --state rho2 --obs O3 --exact").status, 2);
  EXPECT_EQ(run("estimate --state rho2 --obs O2 --exact --method haar").status, 2);
}

TEST(Bench, CsvShapeAndDeterminism) {
  const std::string args = "bench --state rho2 --obs O2X --trials 20 --shots-grid 100,1000,10000,100000 --seed 3";
  const std::string a = run_stdout(args);
  const std::string b = run_stdout(args + " --workers 5");
  const std::string c = run_stdout(args);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  std::istringstream is(a);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "method,n_qubits,state,observable,shots,trials,mse,stderr,true_value,slope_tag,seed");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 16);
  EXPECT_NE(run_stdout("bench --state rho2 --obs O2X --trials 20 --shots-grid 100,1000,10000,100000 --seed 4"), a);
}

TEST(Bench, WritesFileAndRequiresSeed) {
  const std::string path = temp_path("bench.csv");
  const auto r = run("bench --state rho3 --obs O3 --methods pqst,pauli --trials 10 --shots-grid 100,1000 --seed 1 -o " + path);
  ASSERT_EQ(r.status, 0) << r.out;
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_NE(text.find("pqst-auto,3,rho3,O3,1000,10,"), std::string::npos) << text;
  EXPECT_NE(text.find(",NA,1\n"), std::string::npos);
  std::filesystem::remove(path);
  EXPECT_EQ(run("bench --state rho2 --obs O2X --trials 10").status, 2);
}

TEST(Validate, PassesAndNegativeControlFails) {
  const auto ok = run("validate");
  EXPECT_EQ(ok.status, 0) << ok.out;
  EXPECT_NE(ok.out.find("all checks passed"), std::string::npos);
  const auto bad = run("validate --p-offset 0.01");
  EXPECT_EQ(bad.status, 1);
  EXPECT_NE(bad.out.find("FAIL"), std::string::npos);
}

TEST(EnsembleInfo, Describes) {
  const auto r = run("ensemble-info zeta-X -n 3");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("members: 9"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("p: 9"), std::string::npos);
  const auto c = run("ensemble-info clifford -n 3");
  ASSERT_EQ(c.status, 0) << c.out;
  EXPECT_NE(c.out.find("sampled"), std::string::npos);
  EXPECT_EQ(run("ensemble-info zeta-m:5 -n 3").status, 2);
  EXPECT_EQ(run("ensemble-info pauli -n 7").status, 2);
}

TEST(Config, FileValuesAndCommandLinePrecedence) {
  const std::string path = temp_path("run.toml");
  std::ofstream(path) << "[estimate]\nstate = \"rho2X\"\nobs = \"1 ZZ\"\nexact = true\n";
  const auto r = run("--config " + path + " estimate");
  EXPECT_EQ(r.status, 0) << r.out;
  const double from_file = field(r.out, "exact");
  const auto o = run("--config " + path + " estimate --obs \"1 ZI\"");
  EXPECT_EQ(o.status, 0) << o.out;
  EXPECT_NE(field(o.out, "exact"), from_file);
  std::filesystem::remove(path);
}

}  // namespace
