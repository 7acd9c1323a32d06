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

#include <filesystem>
#include <fstream>
#include <string>

#include "pqst/io.hpp"

namespace pqst {
namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("pqst_io_" + name)).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

TEST(DensityMatrixJson, RoundTripIsExact) {
  RandomStream rng(40);
  for (unsigned n = 1; n <= 4; ++n) {
    const auto rho = random_density_matrix(n, rng);
    const std::string path = temp_path("rt" + std::to_string(n) + ".json");
    write_density_matrix(path, rho.op());
    const auto back = read_density_matrix(path);
    EXPECT_EQ(back.op(), rho.op()) << "n=" << n;
    std::filesystem::remove(path);
  }
}

TEST(DensityMatrixJson, LayoutIsRowMajor) {
  Operator m(2);
  m(0, 0) = 0.75;
  m(0, 1) = Complex(0.1, 0.2);
  m(1, 0) = Complex(0.1, -0.2);
  m(1, 1) = 0.25;
  const auto j = density_matrix_json(m);
  EXPECT_EQ(j.at("n_qubits"), 1);
  EXPECT_EQ(j.at("re"), Json::parse("[0.75, 0.1, 0.1, 0.25]"));
  EXPECT_EQ(j.at("im"), Json::parse("[0.0, 0.2, -0.2, 0.0]"));
}

TEST(DensityMatrixJson, MalformedDocumentsRejected) {
  const char* bad[] = {
      R"({"re": [1, 0, 0, 0], "im": [0, 0, 0, 0]})",
      R"({"n_qubits": 1, "re": [1, 0, 0], "im": [0, 0, 0, 0]})",
      R"({"n_qubits": 5, "re": [], "im": []})",
      R"({"n_qubits": 0, "re": [1], "im": [0]})",
      R"({"n_qubits": 1, "re": ["a", 0, 0, 0], "im": [0, 0, 0, 0]})",
  };
  for (const char* text : bad) EXPECT_THROW(density_matrix_from_json(Json::parse(text)), InvalidArgument) << text;
}

TEST(DensityMatrixJson, NonPhysicalStatesRejected) {
  EXPECT_THROW(density_matrix_from_json(Json::parse(R"({"n_qubits": 1, "re": [0.5, 0, 0, 0.4], "im": [0, 0, 0, 0]})")),
               NumericalError);
  EXPECT_THROW(density_matrix_from_json(Json::parse(R"({"n_qubits": 1, "re": [1.2, 0, 0, -0.2], "im": [0, 0, 0, 0]})")),
               NumericalError);
  EXPECT_THROW(density_matrix_from_json(Json::parse(R"({"n_qubits": 1, "re": [0.5, 0, 0, 0.5], "im": [0, 0.1, 0, 0]})")),
               NumericalError);
}

TEST(JsonFiles, ParseErrorsCarryOffset) {
  const std::string path = temp_path("broken.json");
  write_text(path, R"({"n_qubits": 1, "re": [1, 0,, 0]})");
  try {
    read_json_file(path);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_GT(e.position(), 0U);
  }
  std::filesystem::remove(path);
  EXPECT_THROW(read_json_file(temp_path("does-not-exist.json")), InvalidArgument);
}

TEST(Report, FieldsAndTrustedFlags) {
  const auto rho = fixture_state("table2-v");
  ReconstructionReport r;
  r.pses = {ensemble_pse(rho, zeta_X(2)), ensemble_pse(rho, zeta_union(2, {{1}, {2}}))};
  r.estimate = combine_pses(r.pses);
  r.fidelity = fidelity_detail(rho.op(), r.estimate);
  r.state_source = "table2-v";
  const auto j = report_json(r);
  EXPECT_EQ(j.at("mode"), "exact");
  EXPECT_TRUE(j.at("seed").is_null());
  EXPECT_EQ(j.at("estimators").size(), 2U);
  EXPECT_EQ(j.at("estimators")[0].at("p"), 5.0);
  EXPECT_GE(j.at("fidelity").get<double>(), 1 - 1e-10);
  for (const auto& row : j.at("trusted"))
    for (const auto& flag : row) EXPECT_TRUE(flag.get<bool>());
  const auto back = density_matrix_from_json(j.at("estimate"), StateTolerance::printed());
  EXPECT_LE(max_abs_diff(back.op(), rho.op()), 1e-10);

  ReconstructionReport partial;
  partial.pses = {ensemble_pse(rho, zeta_X(2))};
  partial.estimate = partial.pses[0].estimate;
  const auto flags = report_json(partial).at("trusted");
  EXPECT_TRUE(flags[0][3].get<bool>());
  EXPECT_FALSE(flags[0][1].get<bool>());
  EXPECT_TRUE(report_json(partial).at("fidelity").is_null());
}

TEST(Report, PipelineDocument) {
  const auto rep = nmr_pipeline_sim(fixture_state("table2-i"), 1000, 3);
  const auto j = pipeline_json(rep, "table2-i");
  EXPECT_EQ(j.at("mode"), "sampled");
  EXPECT_EQ(j.at("seed"), 3);
  ASSERT_EQ(j.at("populations").size(), 2U);
  EXPECT_EQ(j.at("populations")[0].at("members").size(), 5U);
  EXPECT_EQ(j.at("populations")[0].at("members")[1].at("populations").size(), 4U);
}

}  // namespace
}  // namespace pqst
