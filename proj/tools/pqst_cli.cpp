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

// pqst command-line tool. Exit codes: 0 success, 1 numerical failure,
// 2 usage or parse error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pqst/io.hpp"
#include "pqst/pqst.hpp"

namespace {

using namespace pqst;

constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

struct Common {
  std::string state;
  std::optional<std::uint64_t> seed;
  std::uint64_t shots = 0;
  bool exact = false;
  unsigned workers = 1;
  std::string output;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

/// Fixture name, or a path to a density-matrix JSON document.
DensityMatrix load_state(const std::string& source) {
  if (source.empty()) throw InvalidArgument("--state is required");
  if (std::filesystem::exists(source)) return read_density_matrix(source);
  for (const auto& name : fixture_names())
    if (name == source) return fixture_state(name);
  throw InvalidArgument("'" + source + "' is neither a state fixture nor a readable file");
}

/// Fixture name, or observable text such as "8 ZZ; 2 XY".
Observable load_observable(const std::string& source, unsigned n) {
  if (source.empty()) throw InvalidArgument("--obs is required");
  for (const auto& name : fixture_names())
    if (name == source) {
      auto obs = fixture_observable(name);
      if (obs.qubits() != n) throw InvalidArgument("observable '" + name + "' does not match the state size");
      return obs;
    }
  return parse_observable(source, n);
}

/// Shots for a stochastic run, or 0 for ensemble mode.
std::uint64_t resolve_mode(const Common& c) {
  if (c.exact && c.shots > 0) throw InvalidArgument("--exact and --shots are mutually exclusive");
  if (!c.exact && c.shots == 0) throw InvalidArgument("give either --exact or --shots N");
  if (c.shots > 0 && !c.seed) throw InvalidArgument("--seed is required for sampled runs");
  return c.exact ? 0 : c.shots;
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot write '" + path + "'");
  return file;
}

int cmd_reconstruct(const Common& c, const std::vector<std::string>& sets) {
  const std::uint64_t shots = resolve_mode(c);
  const DensityMatrix rho = load_state(c.state);
  if (sets.empty()) throw InvalidArgument("--sets is required");
  std::vector<std::string> specs;
  for (const auto& s : sets)
    for (auto& part : split_ensemble_list(s)) specs.push_back(std::move(part));
  ReconstructionReport report;
  report.state_source = c.state;
  report.shots = shots;
  if (shots) report.seed = *c.seed;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto e = std::make_shared<const UnitaryEnsemble>(make_ensemble(specs[i], rho.qubits()));
    report.pses.push_back(shots == 0 ? ensemble_pse(rho, e)
                                     : sampled_pse(rho, e, shots, SamplingOptions{derive_seed(*c.seed, {i}), c.workers}));
  }
  report.estimate = combine_pses(report.pses);
  report.fidelity = fidelity_detail(rho.op(), report.estimate);
  std::cout << "estimators:";
  for (const auto& p : report.pses) std::cout << ' ' << p.ensemble_id << " (p=" << fmt(p.p) << ')';
  std::cout << "\nmode: " << (shots ? "sampled, " + std::to_string(shots) + " shots per set" : std::string("exact"))
            << "\nfidelity: " << fmt(report.fidelity->value) << '\n';
  if (rho.trace_residual() > 1e-10) std::cout << "reference trace residual: " << fmt(rho.trace_residual()) << '\n';
  if (report.fidelity->clamped_mass > 0) std::cout << "clamped eigenvalue mass: " << fmt(report.fidelity->clamped_mass) << '\n';
  if (!c.output.empty()) {
    write_json_file(c.output, report_json(report));
    std::cout << "report: " << c.output << '\n';
  }
  return 0;
}

int cmd_estimate(const Common& c, const std::string& obs_text, const std::string& method) {
  const std::uint64_t shots = resolve_mode(c);
  const DensityMatrix rho = load_state(c.state);
  const Observable obs = load_observable(obs_text, rho.qubits());
  const SamplingOptions opt{shots ? *c.seed : 0, c.workers};
  double value = 0.0, se = 0.0;
  std::string used;
  if (method == "pqst-rotated") {
    const auto r = x_shadow_rotated(rho, obs, shots, opt);
    value = r.value;
    se = r.standard_error;
    std::string rot;
    for (std::size_t q = 0; q < r.rotation.per_qubit.size(); ++q)
      rot += (q ? "⊗" : "") + std::string(to_string(r.rotation.per_qubit[q]));
    used = "rotated X-shadow (U = " + rot + ")";
  } else {
    const auto plan = estimation_plan(method, obs, rho);
    const auto r = estimate_with_plan(rho, plan, shots, opt);
    value = r.value;
    se = r.standard_error;
    used = "direct PSE (" + r.plan + ")";
  }
  std::cout << "estimate: " << fmt(value) << '\n';
  if (shots) std::cout << "stderr: " << (std::isnan(se) ? std::string("n/a") : fmt(se)) << '\n';
  std::cout << "exact: " << fmt(expectation(obs, rho.op())) << '\n' << "method: " << used << '\n';
  return 0;
}

int cmd_bench(const Common& c, const std::string& obs_text, const std::vector<std::string>& methods,
              const std::vector<std::uint64_t>& grid, std::size_t trials) {
  if (!c.seed) throw InvalidArgument("--seed is required for bench");
  const DensityMatrix rho = load_state(c.state);
  const Observable obs = load_observable(obs_text, rho.qubits());
  std::ofstream file;
  std::ostringstream buf;
  write_csv_header(buf);
  for (const auto& m : methods) {
    const auto rows = mse_experiment(rho, obs, m, grid, MseOptions{trials, *c.seed, c.workers});
    write_csv_rows(buf, rows, CsvContext{c.state, obs_text, *c.seed});
    const auto slope = rows.size() >= 4 ? std::optional(fit_scaling(rows).slope) : std::nullopt;
    std::cerr << canonical_method(m) << " [" << rows.front().plan << "]"
              << (slope ? " slope " + fmt(*slope) : std::string()) << '\n';
  }
  open_output(c.output, file) << buf.str();
  return 0;
}

int cmd_validate(double p_offset, std::uint64_t seed) {
  GoldenOptions opt;
  opt.seed = seed;
  opt.p_offset = p_offset;
  bool ok = true;
  for (const auto& chk : run_golden_suite(opt)) {
    std::cout << (chk.passed() ? "PASS " : "FAIL ") << chk.label << "  max residual " << fmt(chk.max_residual) << '\n';
    ok = ok && chk.passed();
  }
  std::cout << (ok ? "all checks passed" : "some checks failed") << '\n';
  return ok ? 0 : kExitNumerical;
}

int cmd_ensemble_info(const std::string& spec, unsigned n) {
  const auto e = make_ensemble(spec, n);
  std::cout << "ensemble: " << e.id << "\nqubits: " << e.n << "\nmembers: "
            << (e.is_explicit() ? std::to_string(e.size()) : std::string("sampled (not enumerated)"))
            << "\np: " << fmt(e.p) << "\ninverse: " << to_string(e.inverse_kind) << "\nactivity signature:";
  for (const auto& a : e.activity_signature) std::cout << ' ' << a.to_string();
  std::cout << "\ntrusted:";
  for (const auto& a : e.trusted()) std::cout << ' ' << a.to_string();
  std::cout << '\n';
  if (e.is_product() && e.size() <= 32) {
    for (std::size_t i = 0; i < e.size(); ++i) std::cout << "  " << e.label(i) << '\n';
  }
  return 0;
}

void add_common(CLI::App* sub, Common& c, bool stochastic) {
  sub->add_option("--state", c.state, "state fixture name or density-matrix JSON file");
  if (stochastic) {
    sub->add_option("--shots", c.shots, "shots per estimator (sampled mode)");
    sub->add_flag("--exact", c.exact, "ensemble mode: exact populations, no sampling");
  }
  sub->add_option("--seed", c.seed, "seed for sampled runs");
  sub->add_option("--workers", c.workers, "worker threads (never changes results)")->check(CLI::Range(1U, 256U));
  sub->add_option("-o,--output", c.output, "output file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partial quantum shadow tomography toolkit"};
  app.set_config("--config", "", "TOML/INI file with option values; command-line flags take precedence");
  app.require_subcommand(1);

  Common rc, ec, bc;
  std::vector<std::string> sets;
  auto* reconstruct = app.add_subcommand("reconstruct", "reconstruct a state from partial shadow estimators");
  add_common(reconstruct, rc, true);
  reconstruct->add_option("--sets", sets, "ensembles, comma separated; '|' joins equal-size zeta-A sets");

  std::string obs_e, method = "pqst";
  auto* estimate = app.add_subcommand("estimate", "estimate an observable expectation value");
  add_common(estimate, ec, true);
  estimate->add_option("--obs", obs_e, "observable fixture or text, e.g. \"8 ZZ; 2 XY\"");
  estimate->add_option("--method", method, "pqst, pqst-rotated, pauli, clifford or mub")
      ->check(CLI::IsMember({"pqst", "pqst-auto", "pqst-rotated", "pauli", "clifford", "mub"}));

  std::string obs_b;
  std::vector<std::string> methods{"pqst", "pauli", "clifford", "mub"};
  std::vector<std::uint64_t> grid{100, 1000, 10000, 100000};
  std::size_t trials = 1000;
  auto* bench = app.add_subcommand("bench", "mean-squared-error scaling study, written as CSV");
  add_common(bench, bc, false);
  bench->add_option("--obs", obs_b, "observable fixture or text");
  bench->add_option("--methods", methods, "comma-separated methods")->delimiter(',');
  bench->add_option("--shots-grid", grid, "comma-separated shot budgets")->delimiter(',');
  bench->add_option("--trials", trials, "independent trials per budget")->check(CLI::PositiveNumber);

  double p_offset = 0.0;
  std::uint64_t validate_seed = 20260101;
  auto* validate = app.add_subcommand("validate", "run the closed-form channel checks");
  validate->add_option("--p-offset", p_offset, "perturb every inverse strength (negative control)");
  validate->add_option("--seed", validate_seed, "seed for the random test states");

  std::string ens_spec;
  unsigned ens_n = 2;
  auto* info = app.add_subcommand("ensemble-info", "describe a measurement ensemble");
  info->add_option("ensemble", ens_spec, "zeta-X, zeta-A:1,2, zeta-m:2, pauli, clifford or mub")->required();
  info->add_option("-n,--qubits", ens_n, "register size")->check(CLI::Range(1U, 4U));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*reconstruct) return cmd_reconstruct(rc, sets);
    if (*estimate) return cmd_estimate(ec, obs_e, method);
    if (*bench) return cmd_bench(bc, obs_b, methods, grid, trials);
    if (*validate) return cmd_validate(p_offset, validate_seed);
    if (*info) return cmd_ensemble_info(ens_spec, ens_n);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}
