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
 * Partial shadow estimators: sampled and exact (ensemble-mode) estimates,
 * their combination into a full state, and observable estimation.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pqst/channels.hpp"
#include "pqst/ensembles.hpp"
#include "pqst/error.hpp"
#include "pqst/pauli.hpp"
#include "pqst/random.hpp"
#include "pqst/state.hpp"

namespace pqst {

/// One shot. `unitary` is set only for sampler-drawn members.
struct ShadowRecord {
  std::size_t unitary_index = 0;
  std::optional<Operator> unitary;
  Bitstring outcome;
};

struct PartialShadowEstimator {
  Operator estimate;
  std::string ensemble_id;
  double p = 0.0;
  /// 0 in exact ensemble mode.
  std::uint64_t shots = 0;
  std::vector<ActivityPattern> trusted;
  /// Per-entry standard error; real and imaginary parts separately.
  Operator standard_error;
  /// counts[i][k]: shots on member i with outcome k (explicit, sampled).
  std::vector<std::vector<std::uint64_t>> counts;
  std::shared_ptr<const UnitaryEnsemble> ensemble;

  bool exact() const noexcept { return shots == 0; }
  bool trusts(const ActivityPattern& a) const {
    return std::find(trusted.begin(), trusted.end(), a) != trusted.end();
  }
};

inline ShadowRecord single_shot(const DensityMatrix& rho, const UnitaryEnsemble& e, RandomStream& rng) {
  if (rho.qubits() != e.n) throw InvalidArgument("state size does not match ensemble");
  ShadowRecord rec;
  Operator u;
  if (e.is_explicit()) {
    rec.unitary_index = rng.below(e.size());
    u = e.members[rec.unitary_index];
  } else {
    u = e.sampler(rng);
    rec.unitary = u;
  }
  const auto probs = born_probabilities(u * rho.op() * u.adjoint());
  rec.outcome = sample_outcome(probs, rng);
  return rec;
}

/// Exact PSE from Born probabilities, no sampling.
inline PartialShadowEstimator ensemble_pse(const DensityMatrix& rho, std::shared_ptr<const UnitaryEnsemble> e) {
  PartialShadowEstimator out;
  out.estimate = apply_inverse(*e, forward_channel_exact(*e, rho)).hermitian_part();
  out.ensemble_id = e->id;
  out.p = e->p;
  out.trusted = e->trusted();
  out.standard_error = Operator(rho.dim());
  out.ensemble = std::move(e);
  return out;
}

inline PartialShadowEstimator ensemble_pse(const DensityMatrix& rho, const UnitaryEnsemble& e) {
  return ensemble_pse(rho, std::make_shared<const UnitaryEnsemble>(e));
}

struct SamplingOptions {
  std::uint64_t seed = 0;
  unsigned workers = 1;
  /// Shots per independently seeded chunk; fixes the stream layout.
  std::uint64_t chunk = 4096;
};

namespace detail {

/// Runs body(c) for c in [0, count) on up to `workers` threads. Each index
/// is handled exactly once; callers write results into slot c.
template <class Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body) {
  workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t c = 0; c < count; ++c) body(c);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t c = w; c < count; c += workers) body(c);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/**
 * Shot-averaged PSE. Shots are split into fixed-size chunks, each with its
 * own derived stream, so the estimate does not depend on the worker count.
 * Explicit ensembles tally (member, outcome) counts and evaluate each
 * distinct shadow once.
 */
inline PartialShadowEstimator sampled_pse(const DensityMatrix& rho, std::shared_ptr<const UnitaryEnsemble> ens,
                                          std::uint64_t shots, const SamplingOptions& opt) {
  const UnitaryEnsemble& e = *ens;
  if (shots == 0) throw InvalidArgument("sampled estimation needs at least one shot");
  if (rho.qubits() != e.n) throw InvalidArgument("state size does not match ensemble");
  const std::size_t d = rho.dim();
  const std::uint64_t chunk = std::max<std::uint64_t>(opt.chunk, 1);
  const std::size_t chunks = static_cast<std::size_t>((shots + chunk - 1) / chunk);
  auto chunk_shots = [&](std::size_t c) { return std::min<std::uint64_t>(chunk, shots - c * chunk); };

  PartialShadowEstimator out;
  out.ensemble_id = e.id;
  out.p = e.p;
  out.shots = shots;
  out.trusted = e.trusted();
  out.estimate = Operator(d);
  out.standard_error = Operator(d);
  const double m = static_cast<double>(shots);

  if (e.is_explicit()) {
    std::vector<std::vector<double>> probs;
    for (const auto& u : e.members) probs.push_back(born_probabilities(u * rho.op() * u.adjoint()));
    std::vector<std::vector<std::vector<std::uint64_t>>> partial(chunks);
    detail::parallel_for(chunks, opt.workers, [&](std::size_t c) {
      RandomStream rng(derive_seed(opt.seed, {stable_hash("shots"), c}));
      auto& tally = partial[c];
      tally.assign(e.size(), std::vector<std::uint64_t>(d, 0));
      for (std::uint64_t s = 0; s < chunk_shots(c); ++s) {
        const std::size_t i = rng.below(e.size());
        ++tally[i][sample_outcome(probs[i], rng).index];
      }
    });
    out.counts.assign(e.size(), std::vector<std::uint64_t>(d, 0));
    for (const auto& tally : partial)
      for (std::size_t i = 0; i < e.size(); ++i)
        for (std::size_t k = 0; k < d; ++k) out.counts[i][k] += tally[i][k];

    Operator sum_sq_re(d), sum_sq_im(d);
    for (std::size_t i = 0; i < e.size(); ++i)
      for (std::size_t k = 0; k < d; ++k) {
        if (!out.counts[i][k]) continue;
        const double w = static_cast<double>(out.counts[i][k]);
        const Operator s = single_shot_shadow(e, e.members[i], k);
        out.estimate += s * Complex(w);
        for (std::size_t a = 0; a < d; ++a)
          for (std::size_t b = 0; b < d; ++b) {
            sum_sq_re(a, b) += w * s(a, b).real() * s(a, b).real();
            sum_sq_im(a, b) += w * s(a, b).imag() * s(a, b).imag();
          }
      }
    out.estimate *= Complex(1.0 / m);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) {
        const Complex mean = out.estimate(a, b);
        const double var_re = shots > 1 ? std::max(0.0, (sum_sq_re(a, b).real() - m * mean.real() * mean.real()) / (m - 1)) : 0.0;
        const double var_im = shots > 1 ? std::max(0.0, (sum_sq_im(a, b).real() - m * mean.imag() * mean.imag()) / (m - 1)) : 0.0;
        out.standard_error(a, b) = Complex(std::sqrt(var_re / m), std::sqrt(var_im / m));
      }
  } else {
    struct Partial {
      Operator sum, sq_re, sq_im;
    };
    std::vector<Partial> partial(chunks);
    detail::parallel_for(chunks, opt.workers, [&](std::size_t c) {
      RandomStream rng(derive_seed(opt.seed, {stable_hash("shots"), c}));
      Partial acc{Operator(d), Operator(d), Operator(d)};
      for (std::uint64_t s = 0; s < chunk_shots(c); ++s) {
        const Operator u = e.sampler(rng);
        const auto k = sample_outcome(born_probabilities(u * rho.op() * u.adjoint()), rng).index;
        const Operator sh = single_shot_shadow(e, u, k);
        acc.sum += sh;
        for (std::size_t a = 0; a < d; ++a)
          for (std::size_t b = 0; b < d; ++b) {
            acc.sq_re(a, b) += sh(a, b).real() * sh(a, b).real();
            acc.sq_im(a, b) += sh(a, b).imag() * sh(a, b).imag();
          }
      }
      partial[c] = std::move(acc);
    });
    Operator sq_re(d), sq_im(d);
    for (const auto& p : partial) {
      out.estimate += p.sum;
      sq_re += p.sq_re;
      sq_im += p.sq_im;
    }
    out.estimate *= Complex(1.0 / m);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) {
        const Complex mean = out.estimate(a, b);
        const double var_re = shots > 1 ? std::max(0.0, (sq_re(a, b).real() - m * mean.real() * mean.real()) / (m - 1)) : 0.0;
        const double var_im = shots > 1 ? std::max(0.0, (sq_im(a, b).real() - m * mean.imag() * mean.imag()) / (m - 1)) : 0.0;
        out.standard_error(a, b) = Complex(std::sqrt(var_re / m), std::sqrt(var_im / m));
      }
  }
  out.estimate = out.estimate.hermitian_part();
  out.ensemble = std::move(ens);
  return out;
}

inline PartialShadowEstimator sampled_pse(const DensityMatrix& rho, const UnitaryEnsemble& e, std::uint64_t shots,
                                          const SamplingOptions& opt) {
  return sampled_pse(rho, std::make_shared<const UnitaryEnsemble>(e), shots, opt);
}

inline PartialShadowEstimator sampled_pse(const DensityMatrix& rho, const UnitaryEnsemble& e, std::uint64_t shots,
                                          RandomStream& rng) {
  return sampled_pse(rho, e, shots, SamplingOptions{rng.next()});
}

namespace detail {

/// Index of the unique estimator trusting each pattern, or an error naming
/// the uncovered and doubly covered patterns among `needed`.
inline std::map<ActivityPattern, std::size_t> ownership(std::span<const PartialShadowEstimator> pses,
                                                        std::span<const ActivityPattern> needed) {
  std::map<ActivityPattern, std::size_t> owner;
  std::vector<std::string> missing, ambiguous;
  for (const auto& pat : needed) {
    std::vector<std::size_t> hits;
    for (std::size_t s = 0; s < pses.size(); ++s)
      if (pses[s].trusts(pat)) hits.push_back(s);
    if (hits.empty()) {
      missing.push_back(pat.to_string());
    } else if (hits.size() > 1) {
      std::string who;
      for (auto h : hits) who += (who.empty() ? "" : ", ") + pses[h].ensemble_id;
      ambiguous.push_back(pat.to_string() + " (" + who + ")");
    } else {
      owner[pat] = hits.front();
    }
  }
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : " ") + x;
    return s;
  };
  if (!missing.empty() || !ambiguous.empty()) {
    std::string msg;
    if (!missing.empty()) msg += "no estimator trusts activity patterns " + join(missing);
    if (!ambiguous.empty()) msg += std::string(msg.empty() ? "" : "; ") + "patterns trusted by several estimators: " + join(ambiguous);
    throw CoverageError(msg);
  }
  return owner;
}

}  // namespace detail

/**
 * Full estimate assembled from PSEs: every entry is copied from the one
 * estimator trusting its activity pattern; the result is Hermitised.
 */
inline Operator combine_pses(std::span<const PartialShadowEstimator> pses) {
  if (pses.empty()) throw InvalidArgument("nothing to combine");
  const std::size_t d = pses.front().estimate.dim();
  const unsigned n = qubits_for_dim(d);
  for (const auto& p : pses)
    if (p.estimate.dim() != d) throw InvalidArgument("estimators have different sizes");
  const auto patterns = all_patterns(n);
  const auto owner = detail::ownership(pses, patterns);
  Operator out(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) out(i, j) = pses[owner.at(ActivityPattern{n, static_cast<std::uint32_t>(i ^ j)})].estimate(i, j);
  return out.hermitian_part();
}

struct ObservableEstimate {
  double value = 0.0;
  /// NaN when it cannot be computed (sampler-only ensembles).
  double standard_error = 0.0;
};

/// Squared standard error of Tr(O rho_hat) from the shot tallies; 0 in
/// ensemble mode, NaN without tallies.
inline double observable_variance(const Observable& obs, const PartialShadowEstimator& pse) {
  if (pse.exact()) return 0.0;
  if (pse.counts.empty() || !pse.ensemble) return std::numeric_limits<double>::quiet_NaN();
  if (pse.shots < 2) return 0.0;
  double sum = 0.0, sq = 0.0;
  const double m = static_cast<double>(pse.shots);
  for (std::size_t i = 0; i < pse.counts.size(); ++i)
    for (std::size_t k = 0; k < pse.counts[i].size(); ++k) {
      if (!pse.counts[i][k]) continue;
      const double v = expectation(obs, single_shot_shadow(*pse.ensemble, pse.ensemble->members[i], k));
      sum += static_cast<double>(pse.counts[i][k]) * v;
      sq += static_cast<double>(pse.counts[i][k]) * v * v;
    }
  return std::max(0.0, (sq - sum * sum / m) / (m - 1)) / m;
}

/**
 * Tr(O rho_hat) with each Pauli term evaluated on the estimator trusting its
 * activity pattern. Sampled estimators contribute their shot-to-shot
 * standard error; independent estimators add in quadrature.
 */
inline ObservableEstimate estimate_observable_detail(const Observable& obs, std::span<const PartialShadowEstimator> pses) {
  if (pses.empty()) throw InvalidArgument("no estimators given");
  const unsigned n = obs.qubits();
  if (pses.front().estimate.qubits() != n) throw InvalidArgument("observable and estimator sizes differ");
  std::vector<std::string> uncovered;
  std::map<std::size_t, std::vector<PauliString>> parts;
  for (const auto& t : obs.terms()) {
    const auto pat = t.activity();
    std::vector<std::size_t> hits;
    for (std::size_t s = 0; s < pses.size(); ++s)
      if (pses[s].trusts(pat)) hits.push_back(s);
    if (hits.empty()) {
      uncovered.push_back(t.word_string() + " " + pat.to_string());
    } else {
      parts[hits.front()].push_back(t);
    }
  }
  if (!uncovered.empty()) {
    std::string msg = "observable terms outside every trusted pattern:";
    for (const auto& u : uncovered) msg += " " + u;
    throw CoverageError(msg);
  }
  ObservableEstimate out;
  double var = 0.0;
  for (const auto& [s, terms] : parts) {
    const Observable sub(terms);
    out.value += expectation(sub, pses[s].estimate);
    var += observable_variance(sub, pses[s]);
  }
  out.standard_error = std::sqrt(var);
  return out;
}

inline double estimate_observable(const Observable& obs, std::span<const PartialShadowEstimator> pses) {
  return estimate_observable_detail(obs, pses).value;
}

inline double estimate_observable(const Observable& obs, const PartialShadowEstimator& pse) {
  return estimate_observable(obs, std::span(&pse, 1));
}

struct RotatedEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  XRotation rotation;
};

/**
 * Non-X observable through a local rotation: estimate the X-shadow of
 * U rho U^dagger and evaluate the rotated (X-structured) observable on it.
 * shots == 0 selects ensemble mode.
 */
inline RotatedEstimate x_shadow_rotated(const DensityMatrix& rho, const Observable& obs, std::uint64_t shots = 0,
                                        const SamplingOptions& opt = {}) {
  auto rot = rotate_to_x_structure(obs);
  if (!rot) throw InvalidArgument("no local rotation makes every term X-structured");
  const DensityMatrix rotated = conjugate_by_unitary(rho, rot->unitary);
  auto zx = std::make_shared<const UnitaryEnsemble>(zeta_X(rho.qubits()));
  const PartialShadowEstimator pse = shots == 0 ? ensemble_pse(rotated, zx) : sampled_pse(rotated, zx, shots, opt);
  const auto est = estimate_observable_detail(rot->rotated, std::span(&pse, 1));
  return {est.value, est.standard_error, std::move(*rot)};
}

}  // namespace pqst
