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

/**
 * @file
 * Benchmark fixtures, the mean-squared-error experiment, power-law fits and
 * the simulated diagonal-tomography reconstruction pipeline.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pqst/ensembles.hpp"
#include "pqst/error.hpp"
#include "pqst/pauli.hpp"
#include "pqst/random.hpp"
#include "pqst/shadow.hpp"
#include "pqst/state.hpp"

namespace pqst {

struct Fixture {
  std::string name;
  std::optional<DensityMatrix> state;
  std::optional<Observable> observable;
  std::optional<double> expected_norm;
  std::optional<double> expected_purity;
  std::optional<double> expected_entanglement;
};

namespace detail {

inline Operator printed_matrix(std::size_t d, const std::vector<Complex>& entries) {
  return Operator(d, entries);
}

/// 1/2 - c R, R = a Ix + b Iy + z Iz with I = sigma / 2.
inline Operator spin_factor(double c, double a, double b, double z) {
  Operator r = gates::pauli_x() * Complex(a / 2) + gates::pauli_y() * Complex(b / 2) + gates::pauli_z() * Complex(z / 2);
  return Operator::identity(2) * Complex(0.5) - r * Complex(c);
}

inline std::vector<Complex> qubit_amplitudes(double theta) {
  // cos(theta)|1> + sin(theta)|0>
  return {std::sin(theta), std::cos(theta)};
}

}  // namespace detail

inline const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names{"rho2",      "rho2X",     "rho3",       "rho3X",     "table2-i",
                                              "table2-ii", "table2-iii", "table2-iv", "table2-v",  "O2X",
                                              "O2NX",      "O2",        "O3X",        "O3NX",      "O3"};
  return names;
}

/**
 * Named states and observables. Matrices printed to four decimals are
 * loaded with the relaxed printed-data tolerance; residuals stay available
 * on the DensityMatrix.
 */
inline Fixture load_fixture(const std::string& name) {
  using std::numbers::pi;
  using C = Complex;
  Fixture f{name, {}, {}, {}, {}, {}};
  if (name == "rho2") {
    f.state = DensityMatrix(
        detail::printed_matrix(4, {C(0.3484), C(0.0242, 0.1014), C(0.0118, -0.0301), C(-0.1986, 0.0933),
                                   C(0.0242, -0.1014), C(0.2641), C(0.0447, -0.0050), C(-0.0548, -0.0516),
                                   C(0.0118, 0.0301), C(0.0447, 0.0050), C(0.1210), C(0.0263, -0.0367),
                                   C(-0.1986, -0.0933), C(-0.0548, 0.0516), C(0.0263, 0.0367), C(0.2665)}),
        StateTolerance::printed());
  } else if (name == "rho2X") {
    f.state = DensityMatrix(Operator{{0.19375, 0.0, 0.0, 0.09375},
                                     {0.0, 0.30625, -0.20625, 0.0},
                                     {0.0, -0.20625, 0.30625, 0.0},
                                     {0.09375, 0.0, 0.0, 0.19375}},
                            StateTolerance::printed());
  } else if (name == "rho3") {
    f.state = DensityMatrix(
        detail::printed_matrix(
            8, {C(0.1855),          C(-0.0429, 0.0097),  C(0.0075, -0.0288),  C(0.0319, -0.0305),
                C(-0.0640, -0.0150), C(0.0061, 0.0318),  C(-0.0125, -0.0371), C(0.0348, -0.0563),
                C(-0.0429, -0.0097), C(0.1172),          C(0.0383, 0.0321),   C(0.0171, -0.0024),
                C(0.0434, -0.0252),  C(0.0786, -0.0181), C(-0.0078, 0.0359),  C(-0.0350, 0.0078),
                C(0.0075, 0.0288),   C(0.0383, -0.0321), C(0.1012),           C(0.0545, -0.0414),
                C(0.0106, -0.0673),  C(0.0505, -0.0307), C(0.0487, -0.0143),  C(-0.0449, 0.0372),
                C(0.0319, 0.0305),   C(0.0171, 0.0024),  C(0.0545, 0.0414),   C(0.0957),
                C(0.0118, -0.0219),  C(0.0630, 0.0153),  C(0.0474, -0.0341),  C(-0.0510, 0.0032),
                C(-0.0640, 0.0150),  C(0.0434, 0.0252),  C(0.0106, 0.0673),   C(0.0118, 0.0219),
                C(0.1038),           C(0.0349, 0.0267),  C(-0.0042, 0.0408),  C(-0.0387, -0.0013),
                C(0.0061, -0.0318),  C(0.0786, 0.0181),  C(0.0505, 0.0307),   C(0.0630, -0.0153),
                C(0.0349, -0.0267),  C(0.1308),          C(0.0294, -0.0356),  C(-0.0518, 0.0164),
                C(-0.0125, 0.0371),  C(-0.0078, -0.0359), C(0.0487, 0.0143),  C(0.0474, 0.0341),
                C(-0.0042, -0.0408), C(0.0294, 0.0356),  C(0.1359),           C(-0.0453, 0.0288),
                C(0.0348, 0.0563),   C(-0.0350, -0.0078), C(-0.0449, -0.0372), C(-0.0510, -0.0032),
                C(-0.0387, 0.0013),  C(-0.0518, -0.0164), C(-0.0453, -0.0288), C(0.1300)}),
        StateTolerance::printed());
  } else if (name == "rho3X") {
    Operator m(8);
    const double diag[8] = {0.20, 0.15, 0.10, 0.18, 0.12, 0.10, 0.08, 0.07};
    const Complex anti[4] = {C(0.05, 0.02), C(0.04, 0.03), C(0.03, 0.01), C(0.06, 0.02)};
    for (std::size_t i = 0; i < 8; ++i) m(i, i) = diag[i];
    for (std::size_t i = 0; i < 4; ++i) {
      m(i, 7 - i) = anti[i];
      m(7 - i, i) = std::conj(anti[i]);
    }
    f.state = DensityMatrix(m, StateTolerance::printed());
  } else if (name == "table2-i" || name == "table2-ii") {
    const bool one = name == "table2-i";
    const auto a = detail::qubit_amplitudes(one ? pi / 6 : pi / 8);
    const auto b = detail::qubit_amplitudes(one ? pi / 3 : pi / 12);
    std::vector<Complex> psi;
    for (auto x : a)
      for (auto y : b) psi.push_back(x * y);
    f.state = DensityMatrix::pure(psi);
    f.expected_purity = 1.0;
    f.expected_entanglement = 0.0;
  } else if (name == "table2-iii") {
    const double c = std::cos(pi / 4);
    f.state = DensityMatrix(tensor_product(detail::spin_factor(c, -std::sin(pi / 4), 0, std::cos(pi / 4)),
                                           detail::spin_factor(c, -std::sin(pi / 6), 0, std::cos(pi / 6))));
    f.expected_purity = 0.56;
    f.expected_entanglement = 0.0;
  } else if (name == "table2-iv") {
    const double c = std::cos(pi / 6);
    f.state = DensityMatrix(tensor_product(detail::spin_factor(c, 0, std::sin(pi / 4), std::cos(pi / 4)),
                                           detail::spin_factor(c, std::sin(pi / 3), 0, std::cos(pi / 3))));
    f.expected_purity = 0.765;
    f.expected_entanglement = 0.0;
  } else if (name == "table2-v") {
    const double s6 = std::sin(pi / 6), c6 = std::cos(pi / 6), s12 = std::sin(pi / 12), c12 = std::cos(pi / 12);
    const std::vector<Complex> psi{s6 * s12, s6 * c12, s12 * c6, -c6 * c12};
    f.state = DensityMatrix::pure(psi);
    f.expected_purity = 1.0;
    f.expected_entanglement = 0.28;
  } else if (name == "O2X") {
    f.observable = parse_observable("8 ZZ; 2 XY; 3 XX; -10 IZ");
    f.expected_norm = 18.630;
  } else if (name == "O2NX") {
    f.observable = parse_observable("7 XZ; 15 YZ; 12 ZX");
    f.expected_norm = 28.553;
  } else if (name == "O2") {
    f.observable = parse_observable("8 ZY; 12 XZ; 3 XX; -10 IZ; 9 II");
    f.expected_norm = 34.061;
  } else if (name == "O3X") {
    f.observable = parse_observable("2 IIZ; 4 XXX; 6 XYX; 8 YYX; 10 IZZ; 12 XXX");
    f.expected_norm = 34.819;
  } else if (name == "O3NX") {
    f.observable = parse_observable("2 XZY; 4 YIY");
    f.expected_norm = 4.472;
  } else if (name == "O3") {
    f.observable = parse_observable("5 XXX; 10 ZZZ; 7 XYY; -6 ZIZ; 6 YYY; 7 ZXX; -2 ZXI");
    f.expected_norm = 25.038;
  } else {
    throw InvalidArgument("unknown fixture '" + name + "'");
  }
  return f;
}

inline DensityMatrix fixture_state(const std::string& name) {
  auto f = load_fixture(name);
  if (!f.state) throw InvalidArgument("fixture '" + name + "' is not a state");
  return *f.state;
}

inline Observable fixture_observable(const std::string& name) {
  auto f = load_fixture(name);
  if (!f.observable) throw InvalidArgument("fixture '" + name + "' is not an observable");
  return *f.observable;
}

/// One estimator in an estimation plan and the terms it is responsible for.
struct PlanPart {
  std::shared_ptr<const UnitaryEnsemble> ensemble;
  Observable observable;
};

inline std::string canonical_method(const std::string& method) {
  if (method == "pqst" || method == "pqst-auto") return "pqst-auto";
  if (method == "pauli" || method == "clifford" || method == "mub") return method;
  throw InvalidArgument("unknown method '" + method + "' (expected pqst-auto, pauli, clifford or mub)");
}

/**
 * Ensembles used to estimate `obs` on `rho` by `method`.
 *
 * pqst-auto takes zeta_X alone when the observable or the state is
 * X-structured. Otherwise diagonal and full-register terms go to zeta_X and
 * the remaining terms are grouped by the size of their active set, one
 * equal-cardinality zeta union per group.
 */
inline std::vector<PlanPart> estimation_plan(const std::string& method, const Observable& obs, const DensityMatrix& rho) {
  const unsigned n = obs.qubits();
  if (rho.qubits() != n) throw InvalidArgument("observable and state sizes differ");
  const std::string m = canonical_method(method);
  auto share = [](UnitaryEnsemble e) { return std::make_shared<const UnitaryEnsemble>(std::move(e)); };
  if (m == "pauli") return {{share(pauli_local_ensemble(n)), obs}};
  if (m == "clifford") return {{share(clifford_ensemble(n)), obs}};
  if (m == "mub") return {{share(mub_ensemble(n)), obs}};

  if (is_x_structured(obs) || is_x_structured(rho.op(), 1e-12)) return {{share(zeta_X(n)), obs}};
  std::vector<PauliString> x_terms;
  std::map<unsigned, std::map<std::uint32_t, std::vector<PauliString>>> by_size;
  for (const auto& t : obs.terms()) {
    const auto pat = t.activity();
    if (pat.is_diagonal() || pat.is_full()) {
      x_terms.push_back(t);
    } else {
      by_size[pat.order()][pat.mask].push_back(t);
    }
  }
  std::vector<PlanPart> plan;
  if (!x_terms.empty()) plan.push_back({share(zeta_X(n)), Observable(x_terms)});
  for (const auto& [size, groups] : by_size) {
    std::vector<std::vector<unsigned>> parts;
    std::vector<PauliString> terms;
    for (const auto& [mask, ts] : groups) {
      parts.push_back(ActivityPattern{n, mask}.qubits());
      terms.insert(terms.end(), ts.begin(), ts.end());
    }
    plan.push_back({share(zeta_union(n, parts)), Observable(terms)});
  }
  return plan;
}

struct PlanEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::string plan;
  std::vector<PartialShadowEstimator> pses;
};

/**
 * One estimate of Tr(O rho) following a plan: each part's terms are
 * evaluated on that part's estimator. shots == 0 selects ensemble mode;
 * otherwise the budget is split as in mse_experiment.
 */
inline PlanEstimate estimate_with_plan(const DensityMatrix& rho, std::span<const PlanPart> plan, std::uint64_t shots,
                                       const SamplingOptions& opt) {
  if (shots != 0 && shots < plan.size()) throw InvalidArgument("shot budget is smaller than the number of estimators");
  PlanEstimate out;
  double var = 0.0;
  for (std::size_t j = 0; j < plan.size(); ++j) {
    const auto& part = plan[j];
    out.plan += (out.plan.empty() ? "" : "+") + part.ensemble->id;
    if (shots == 0) {
      out.pses.push_back(ensemble_pse(rho, part.ensemble));
    } else {
      const std::uint64_t share = shots / plan.size() + (j < shots % plan.size() ? 1 : 0);
      SamplingOptions o = opt;
      o.seed = derive_seed(opt.seed, {j});
      out.pses.push_back(sampled_pse(rho, part.ensemble, share, o));
    }
    out.value += expectation(part.observable, out.pses.back().estimate);
    var += observable_variance(part.observable, out.pses.back());
  }
  out.standard_error = std::sqrt(var);
  return out;
}

struct MseResult {
  std::string method;
  unsigned n_qubits = 0;
  std::uint64_t shots = 0;
  std::size_t trials = 0;
  double mse = 0.0;
  double stderr_mse = 0.0;
  double true_value = 0.0;
  /// Ensembles used, e.g. "zeta-X+zeta-A:2".
  std::string plan;
};

struct MseOptions {
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

namespace detail {

/// Precomputed single-shot values Tr(O_part s_ik) and outcome CDFs.
struct ShotTable {
  std::shared_ptr<const UnitaryEnsemble> ensemble;
  Observable observable;
  std::vector<std::vector<double>> cdf;
  std::vector<std::vector<double>> value;
};

inline ShotTable make_shot_table(const PlanPart& part, const DensityMatrix& rho) {
  ShotTable t{part.ensemble, part.observable, {}, {}};
  const auto& e = *part.ensemble;
  if (!e.is_explicit()) return t;
  const std::size_t d = rho.dim();
  for (const auto& u : e.members) {
    const auto probs = born_probabilities(u * rho.op() * u.adjoint());
    std::vector<double> cdf(d), val(d);
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      acc += probs[k];
      cdf[k] = acc;
      val[k] = expectation(part.observable, single_shot_shadow(e, u, k));
    }
    t.cdf.push_back(std::move(cdf));
    t.value.push_back(std::move(val));
  }
  return t;
}

inline std::size_t draw_from_cdf(const std::vector<double>& cdf, double u) {
  const double x = u * cdf.back();
  for (std::size_t k = 0; k + 1 < cdf.size(); ++k)
    if (x < cdf[k]) return k;
  return cdf.size() - 1;
}

/// Mean of `shots` single-shot values for one plan part.
inline double sample_part(const ShotTable& t, const DensityMatrix& rho, std::uint64_t shots, RandomStream& rng) {
  double sum = 0.0;
  if (!t.value.empty()) {
    const std::size_t size = t.value.size();
    for (std::uint64_t s = 0; s < shots; ++s) {
      const std::size_t i = rng.below(size);
      sum += t.value[i][draw_from_cdf(t.cdf[i], rng.uniform())];
    }
  } else {
    const auto& e = *t.ensemble;
    const Operator& o = t.observable.matrix();
    const double tr = o.trace().real();
    const double scale = static_cast<double>(rho.dim() + 1);
    for (std::uint64_t s = 0; s < shots; ++s) {
      const Operator u = e.sampler(rng);
      const Operator rotated = u * rho.op() * u.adjoint();
      std::vector<double> cdf(rho.dim());
      double acc = 0.0;
      for (std::size_t k = 0; k < rho.dim(); ++k) cdf[k] = acc += std::max(rotated(k, k).real(), 0.0);
      const std::size_t k = draw_from_cdf(cdf, rng.uniform());
      // Tr(O ((d+1) U^dag|k><k|U - 1)) = (d+1) <k|U O U^dag|k> - Tr O
      const auto row = u.row(k);
      Complex q = 0.0;
      for (std::size_t a = 0; a < rho.dim(); ++a)
        for (std::size_t b = 0; b < rho.dim(); ++b) q += row[a] * o(a, b) * std::conj(row[b]);
      sum += scale * q.real() - tr;
    }
  }
  return sum / static_cast<double>(shots);
}

}  // namespace detail

/**
 * Mean squared error of Tr(O rho_hat) against Tr(O rho) over independent
 * trials, per shot budget. A budget is split evenly over the plan's
 * estimators (remainder to the first ones). Trial t at budget M draws from
 * its own derived stream, so results do not depend on the worker count.
 */
inline std::vector<MseResult> mse_experiment(const DensityMatrix& rho, const Observable& obs, const std::string& method,
                                             std::span<const std::uint64_t> shots_grid, const MseOptions& opt) {
  if (opt.trials < 2) throw InvalidArgument("need at least two trials");
  const std::string m = canonical_method(method);
  const auto plan = estimation_plan(m, obs, rho);
  std::vector<detail::ShotTable> tables;
  std::string plan_desc;
  for (const auto& part : plan) {
    tables.push_back(detail::make_shot_table(part, rho));
    plan_desc += (plan_desc.empty() ? "" : "+") + part.ensemble->id;
  }
  const double truth = expectation(obs, rho.op());
  std::vector<MseResult> out;
  for (std::uint64_t budget : shots_grid) {
    if (budget < plan.size()) throw InvalidArgument("shot budget is smaller than the number of estimators");
    std::vector<double> err2(opt.trials);
    detail::parallel_for(opt.trials, opt.workers, [&](std::size_t t) {
      RandomStream rng(derive_seed(opt.seed, {stable_hash(m), budget, t}));
      double est = 0.0;
      for (std::size_t j = 0; j < plan.size(); ++j) {
        const std::uint64_t share = budget / plan.size() + (j < budget % plan.size() ? 1 : 0);
        est += detail::sample_part(tables[j], rho, share, rng);
      }
      err2[t] = (est - truth) * (est - truth);
    });
    double mean = 0.0;
    for (double e : err2) mean += e;
    mean /= static_cast<double>(opt.trials);
    double var = 0.0;
    for (double e : err2) var += (e - mean) * (e - mean);
    var /= static_cast<double>(opt.trials - 1);
    out.push_back({m, rho.qubits(), budget, opt.trials, mean, std::sqrt(var / static_cast<double>(opt.trials)), truth,
                   plan_desc});
  }
  return out;
}

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least squares of log10(mse) on log10(shots).
inline ScalingFit fit_scaling(std::span<const MseResult> results) {
  std::map<std::uint64_t, double> points;
  for (const auto& r : results) {
    if (r.shots == 0 || !(r.mse > 0.0)) throw InvalidArgument("fit needs positive shots and MSE");
    points[r.shots] = r.mse;
  }
  if (points.size() < 4) throw InvalidArgument("fit needs at least four shot budgets");
  if (static_cast<double>(points.rbegin()->first) < 100.0 * static_cast<double>(points.begin()->first)) {
    throw InvalidArgument("shot budgets must span at least two decades");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(points.size());
  for (const auto& [s, v] : points) {
    const double x = std::log10(static_cast<double>(s)), y = std::log10(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  ScalingFit f;
  f.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / k;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / k;
  for (const auto& [s, v] : points) {
    const double x = std::log10(static_cast<double>(s)), y = std::log10(v);
    const double fit = f.intercept + f.slope * x;
    ss_res += (y - fit) * (y - fit);
    ss_tot += (y - ybar) * (y - ybar);
  }
  f.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

struct CsvContext {
  std::string state;
  std::string observable;
  std::uint64_t seed = 0;
};

inline void write_csv_header(std::ostream& os) {
  os << "method,n_qubits,state,observable,shots,trials,mse,stderr,true_value,slope_tag,seed\n";
}

/// Rows for one method; slope_tag is the method's fitted log-log slope.
inline void write_csv_rows(std::ostream& os, std::span<const MseResult> rows, const CsvContext& ctx) {
  std::string slope = "NA";
  try {
    slope = format_double(fit_scaling(rows).slope);
  } catch (const InvalidArgument&) {
  }
  for (const auto& r : rows) {
    os << r.method << ',' << r.n_qubits << ',' << ctx.state << ',' << ctx.observable << ',' << r.shots << ','
       << r.trials << ',' << format_double(r.mse) << ',' << format_double(r.stderr_mse) << ','
       << format_double(r.true_value) << ',' << slope << ',' << ctx.seed << '\n';
  }
}

struct SetPopulations {
  std::string ensemble_id;
  std::vector<std::string> labels;
  /// populations[i][k]: probability of outcome k after member i.
  std::vector<std::vector<double>> populations;
};

struct PipelineReport {
  Operator reference;
  Operator estimate;
  double fidelity = 0.0;
  double clamped_mass = 0.0;
  /// 0 for ensemble mode.
  std::uint64_t shots_per_set = 0;
  std::uint64_t seed = 0;
  std::vector<SetPopulations> sets;
  std::vector<PartialShadowEstimator> pses;
};

/**
 * Two-qubit reconstruction from zeta_X and zeta_1 populations: exact
 * populations when shots_per_set is 0, otherwise sampled shots with
 * empirical per-member frequencies.
 */
inline PipelineReport nmr_pipeline_sim(const DensityMatrix& rho, std::uint64_t shots_per_set, std::uint64_t seed = 0,
                                       unsigned workers = 1) {
  if (rho.qubits() != 2) throw InvalidArgument("the reconstruction pipeline is defined for two qubits");
  PipelineReport rep;
  rep.reference = rho.op();
  rep.shots_per_set = shots_per_set;
  rep.seed = seed;
  const std::vector<std::shared_ptr<const UnitaryEnsemble>> sets{
      std::make_shared<const UnitaryEnsemble>(zeta_X(2)),
      std::make_shared<const UnitaryEnsemble>(zeta_union(2, {{1}, {2}}))};
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const auto& e = *sets[s];
    SetPopulations pop{e.id, e.labels, {}};
    if (shots_per_set == 0) {
      rep.pses.push_back(ensemble_pse(rho, sets[s]));
      for (const auto& u : e.members) pop.populations.push_back(born_probabilities(u * rho.op() * u.adjoint()));
    } else {
      rep.pses.push_back(sampled_pse(rho, sets[s], shots_per_set, SamplingOptions{derive_seed(seed, {s}), workers}));
      for (const auto& row : rep.pses.back().counts) {
        double total = 0.0;
        for (auto c : row) total += static_cast<double>(c);
        std::vector<double> freq(row.size(), 0.0);
        if (total > 0)
          for (std::size_t k = 0; k < row.size(); ++k) freq[k] = static_cast<double>(row[k]) / total;
        pop.populations.push_back(std::move(freq));
      }
    }
    rep.sets.push_back(std::move(pop));
  }
  rep.estimate = combine_pses(rep.pses);
  const auto fid = fidelity_detail(rho.op(), rep.estimate);
  rep.fidelity = fid.value;
  rep.clamped_mass = fid.clamped_mass;
  return rep;
}

}  // namespace pqst
