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

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "pqst/bench.hpp"

namespace pqst {
namespace {

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

TEST(Fixtures, AllNamesLoad) {
  for (const auto& name : fixture_names()) {
    const auto f = load_fixture(name);
    EXPECT_TRUE(f.state || f.observable) << name;
  }
  EXPECT_THROW(load_fixture("rho9"), InvalidArgument);
  EXPECT_THROW(fixture_state("O2"), InvalidArgument);
  EXPECT_THROW(fixture_observable("rho2"), InvalidArgument);
}

TEST(Fixtures, XStructureOfNamedStatesAndObservables) {
  EXPECT_TRUE(is_x_structured(fixture_state("rho2X").op(), 1e-12));
  EXPECT_FALSE(is_x_structured(fixture_state("rho2").op(), 1e-12));
  EXPECT_TRUE(is_x_structured(fixture_observable("O2X")));
  EXPECT_TRUE(is_x_structured(fixture_observable("O3X")));
  EXPECT_FALSE(is_x_structured(fixture_observable("O2NX")));
  EXPECT_FALSE(is_x_structured(fixture_observable("O2")));
}

TEST(Plan, MethodNames) {
  EXPECT_EQ(canonical_method("pqst"), "pqst-auto");
  EXPECT_EQ(canonical_method("mub"), "mub");
  EXPECT_THROW(canonical_method("haar"), InvalidArgument);
}

TEST(Plan, XStructuredCasesUseXShadowAlone) {
  const auto p1 = estimation_plan("pqst-auto", fixture_observable("O2X"), fixture_state("rho2"));
  ASSERT_EQ(p1.size(), 1U);
  EXPECT_EQ(p1[0].ensemble->id, zeta_X(2).id);
  const auto p2 = estimation_plan("pqst-auto", fixture_observable("O2"), fixture_state("rho2X"));
  ASSERT_EQ(p2.size(), 1U);
  EXPECT_EQ(p2[0].ensemble->id, zeta_X(2).id);
}

TEST(Plan, GeneralCaseSplitsTermsByActiveSet) {
  const auto rho = fixture_state("rho3");
  const auto obs = fixture_observable("O3");
  const auto plan = estimation_plan("pqst-auto", obs, rho);
  ASSERT_GE(plan.size(), 2U);
  std::size_t terms = 0;
  for (const auto& part : plan) {
    terms += part.observable.terms().size();
    const auto trusted = part.ensemble->trusted();
    for (const auto& t : part.observable.terms())
      EXPECT_NE(std::find(trusted.begin(), trusted.end(), t.activity()), trusted.end())
          << t.word_string() << " on " << part.ensemble->id;
  }
  EXPECT_EQ(terms, obs.terms().size());
  RandomStream rng(6);
  const auto sigma = random_density_matrix(3, rng);
  EXPECT_NEAR(estimate_with_plan(sigma, plan, 0, {}).value, expectation(obs, sigma.op()), 1e-10);
}

TEST(Plan, BaselinesUseOneEnsemble) {
  const auto rho = fixture_state("rho2");
  const auto obs = fixture_observable("O2");
  for (const char* m : {"pauli", "clifford", "mub"}) {
    const auto plan = estimation_plan(m, obs, rho);
    ASSERT_EQ(plan.size(), 1U);
    EXPECT_NEAR(estimate_with_plan(rho, plan, 0, {}).value, expectation(obs, rho.op()), 1e-10) << m;
  }
  EXPECT_THROW(estimation_plan("pauli", fixture_observable("O3"), rho), InvalidArgument);
}

TEST(Plan, SampledEstimateWithinFiveSigma) {
  const auto rho = fixture_state("rho2");
  const auto obs = fixture_observable("O2");
  const auto plan = estimation_plan("pqst-auto", obs, rho);
  const auto est = estimate_with_plan(rho, plan, 200000, SamplingOptions{8, 2});
  EXPECT_GT(est.standard_error, 0.0);
  EXPECT_LE(std::abs(est.value - expectation(obs, rho.op())), 5 * est.standard_error);
  EXPECT_THROW(estimate_with_plan(rho, plan, 1, SamplingOptions{8}), InvalidArgument);
}

// With a single shot the squared error has an exact expectation that can be
// computed from the single-shot value table: E[(v - t)^2] over member and
// outcome. The sampled MSE must agree within its standard error.
TEST(Mse, SingleShotMatchesExactSecondMoment) {
  const auto rho = fixture_state("rho2");
  const auto obs = fixture_observable("O2X");
  const auto e = zeta_X(2);
  const double truth = expectation(obs, rho.op());
  double exact = 0.0;
  for (const auto& u : e.members) {
    const auto p = born_probabilities(u * rho.op() * u.adjoint());
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double v = expectation(obs, single_shot_shadow(e, u, k)) - truth;
      exact += p[k] * v * v / static_cast<double>(e.size());
    }
  }
  const std::uint64_t grid[] = {1};
  MseOptions opt;
  opt.trials = 200000;
  opt.seed = 3;
  const auto r = mse_experiment(rho, obs, "pqst-auto", grid, opt);
  ASSERT_EQ(r.size(), 1U);
  EXPECT_NEAR(r[0].mse, exact, 5 * r[0].stderr_mse);
  EXPECT_NEAR(r[0].true_value, truth, 1e-12);
  EXPECT_EQ(r[0].plan, e.id);
}

TEST(Mse, IndependentShotsScaleInverseLinearly) {
  const auto rho = fixture_state("rho2");
  const auto obs = fixture_observable("O2X");
  const std::uint64_t grid[] = {1, 10};
  MseOptions opt;
  opt.trials = 40000;
  opt.seed = 4;
  const auto r = mse_experiment(rho, obs, "clifford", grid, opt);
  ASSERT_EQ(r.size(), 2U);
  // MSE(10) = MSE(1) / 10 for independent shots.
  EXPECT_NEAR(r[1].mse * 10, r[0].mse, 5 * (10 * r[1].stderr_mse + r[0].stderr_mse));
}

TEST(Mse, SlopeNearMinusOneOnSmallRun) {
  const auto rho = fixture_state("rho2");
  const auto obs = fixture_observable("O2X");
  const std::uint64_t grid[] = {100, 300, 1000, 3000, 10000};
  MseOptions opt;
  opt.trials = 300;
  opt.seed = 11;
  opt.workers = 4;
  for (const char* m : {"pqst-auto", "pauli"}) {
    const auto r = mse_experiment(rho, obs, m, grid, opt);
    const auto fit = fit_scaling(r);
    EXPECT_NEAR(fit.slope, -1.0, 0.3) << m;
  }
}

TEST(Mse, WorkerCountDoesNotChangeResults) {
  const auto rho = fixture_state("rho3");
  const auto obs = fixture_observable("O3");
  const std::uint64_t grid[] = {100, 1000};
  MseOptions a;
  a.trials = 50;
  a.seed = 5;
  MseOptions b = a;
  b.workers = 6;
  for (const char* m : {"pqst-auto", "clifford"}) {
    const auto ra = mse_experiment(rho, obs, m, grid, a);
    const auto rb = mse_experiment(rho, obs, m, grid, b);
    for (std::size_t i = 0; i < ra.size(); ++i) {
      EXPECT_EQ(ra[i].mse, rb[i].mse) << m;
      EXPECT_EQ(ra[i].stderr_mse, rb[i].stderr_mse) << m;
    }
  }
}

TEST(Mse, Rejections) {
  const auto rho = fixture_state("rho3");
  const auto obs = fixture_observable("O3");
  const std::uint64_t grid[] = {1};
  MseOptions opt;
  opt.trials = 1;
  EXPECT_THROW(mse_experiment(rho, obs, "pauli", grid, opt), InvalidArgument);
  opt.trials = 10;
  EXPECT_THROW(mse_experiment(rho, obs, "pqst-auto", grid, opt), InvalidArgument);
}

MseResult point(std::uint64_t shots, double mse) {
  MseResult r;
  r.shots = shots;
  r.mse = mse;
  return r;
}

TEST(Fit, RecoversSyntheticPowerLaw) {
  std::vector<MseResult> rs;
  for (std::uint64_t m : {100, 1000, 10000, 100000}) rs.push_back(point(m, 3.0 * std::pow(m, -1.2)));
  const auto f = fit_scaling(rs);
  EXPECT_NEAR(f.slope, -1.2, 1e-12);
  EXPECT_NEAR(f.intercept, std::log10(3.0), 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(Fit, DegenerateGridsRejected) {
  std::vector<MseResult> three{point(100, 1), point(1000, 0.1), point(10000, 0.01)};
  EXPECT_THROW(fit_scaling(three), InvalidArgument);
  std::vector<MseResult> narrow{point(100, 1), point(200, 0.5), point(400, 0.25), point(800, 0.125)};
  EXPECT_THROW(fit_scaling(narrow), InvalidArgument);
  std::vector<MseResult> zero{point(100, 1), point(1000, 0), point(10000, 0.01), point(100000, 0.001)};
  EXPECT_THROW(fit_scaling(zero), InvalidArgument);
}

TEST(Csv, HeaderAndRows) {
  std::vector<MseResult> rs;
  for (std::uint64_t m : {100, 1000, 10000, 100000}) {
    auto r = point(m, 1.0 / static_cast<double>(m));
    r.method = "pauli";
    r.n_qubits = 2;
    r.trials = 10;
    r.true_value = 0.25;
    rs.push_back(r);
  }
  std::ostringstream os;
  write_csv_header(os);
  write_csv_rows(os, rs, CsvContext{"rho2", "O2X", 9});
  const auto lines = split_lines(os.str());
  ASSERT_EQ(lines.size(), 5U);
  EXPECT_EQ(lines[0], "method,n_qubits,state,observable,shots,trials,mse,stderr,true_value,slope_tag,seed");
  EXPECT_EQ(lines[1], "pauli,2,rho2,O2X,100,10,0.01,0,0.25,-1,9");

  std::ostringstream short_run;
  write_csv_rows(short_run, std::span(rs).first(2), CsvContext{"rho2", "O2X", 9});
  EXPECT_NE(short_run.str().find(",NA,9"), std::string::npos);
}

TEST(Pipeline, ExactModeReproducesTheState) {
  for (const auto& name : fixture_names()) {
    const auto f = load_fixture(name);
    if (!f.state || f.state->qubits() != 2) continue;
    const auto rep = nmr_pipeline_sim(*f.state, 0);
    EXPECT_GE(rep.fidelity, 1.0 - 1e-10) << name;
    EXPECT_EQ(rep.sets.size(), 2U);
    EXPECT_EQ(rep.sets[0].populations.size(), 5U);
    EXPECT_EQ(rep.sets[1].populations.size(), 5U);
    for (const auto& set : rep.sets)
      for (const auto& row : set.populations) {
        double total = 0;
        for (double p : row) total += p;
        EXPECT_NEAR(total, 1.0, 1e-12);
      }
  }
}

TEST(Pipeline, SampledModeIsFaithful) {
  const auto rep = nmr_pipeline_sim(fixture_state("table2-v"), 100000, 21, 4);
  EXPECT_GE(rep.fidelity, 0.97);
  EXPECT_EQ(rep.shots_per_set, 100000U);
  const auto again = nmr_pipeline_sim(fixture_state("table2-v"), 100000, 21, 1);
  EXPECT_EQ(rep.estimate, again.estimate);
  EXPECT_THROW(nmr_pipeline_sim(fixture_state("rho3"), 0), InvalidArgument);
}

}  // namespace
}  // namespace pqst
