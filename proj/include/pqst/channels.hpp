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
 * Measurement channels and their inverse maps, plus closed-form two-qubit
 * channel outputs used as golden references.
 */
#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "pqst/ensembles.hpp"
#include "pqst/error.hpp"
#include "pqst/linalg.hpp"
#include "pqst/random.hpp"
#include "pqst/state.hpp"

namespace pqst {

/// M_p^{-1}(A) = p A - 1.
inline Operator pseudo_inverse(double p, const Operator& a) {
  if (!(p > 0.0)) throw InvalidArgument("pseudo-inverse strength must be positive");
  Operator out = a * Complex(p);
  for (std::size_t i = 0; i < out.dim(); ++i) out(i, i) -= 1.0;
  return out;
}

/// D(A) = (A + Tr(A) 1) / (2^n + 1).
inline Operator depolarizing_channel(const Operator& a) {
  Operator out = a + Operator::identity(a.dim()) * a.trace();
  out *= Complex(1.0 / static_cast<double>(a.dim() + 1));
  return out;
}

/// (2^n + 1) A - Tr(A) 1.
inline Operator depolarizing_inverse(unsigned n, const Operator& a) {
  if (a.qubits() != n) throw InvalidArgument("operator size does not match register");
  return a * Complex(static_cast<double>(a.dim() + 1)) - Operator::identity(a.dim()) * a.trace();
}

/// (x)_j [3 F_j - Tr(F_j) 1] over single-qubit factors F_j.
inline Operator per_site_pauli_inverse(unsigned n, std::span<const Operator> factors) {
  if (factors.size() != n) throw InvalidArgument("per-site inverse needs one factor per qubit");
  std::vector<Operator> sites;
  for (const auto& f : factors) {
    if (f.dim() != 2) throw InvalidArgument("per-site factors must be single-qubit operators");
    sites.push_back(f * Complex(3.0) - Operator::identity(2) * f.trace());
  }
  return tensor_product(sites);
}

/**
 * The same per-site map acting on a full register operator: for each qubit
 * q, A -> 3 A - Tr_q(A) (x) 1_q. On product inputs it agrees with the
 * factor-list form; by linearity it extends to channel outputs.
 */
inline Operator per_site_pauli_inverse(const Operator& a) {
  const unsigned n = a.qubits();
  const std::size_t d = a.dim();
  Operator cur = a;
  for (unsigned q = 1; q <= n; ++q) {
    const std::size_t bit = std::size_t{1} << (n - q);
    Operator next(d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        Complex v = 3.0 * cur(i, j);
        if ((i & bit) == (j & bit)) v -= cur(i & ~bit, j & ~bit) + cur(i | bit, j | bit);
        next(i, j) = v;
      }
    cur = std::move(next);
  }
  return cur;
}

/// The inverse map an ensemble is paired with.
inline Operator apply_inverse(const UnitaryEnsemble& e, const Operator& a) {
  switch (e.inverse_kind) {
    case InverseKind::Pseudo: return pseudo_inverse(e.p, a);
    case InverseKind::GlobalDepolarizing: return depolarizing_inverse(e.n, a);
    case InverseKind::PerSitePauli: return per_site_pauli_inverse(a);
  }
  throw InvalidArgument("unknown inverse kind");
}

/// U^dagger |k><k| U.
inline Operator rotated_projector(const Operator& u, std::size_t k) {
  std::vector<Complex> v = u.row(k);
  for (auto& z : v) z = std::conj(z);
  return Operator::outer(v, v);
}

/// Uniform average over `unitaries` of sum_k <k|U rho U^dagger|k> U^dagger|k><k|U.
inline Operator forward_channel(std::span<const Operator> unitaries, const Operator& rho) {
  if (unitaries.empty()) throw InvalidArgument("forward channel needs at least one unitary");
  const std::size_t d = rho.dim();
  Operator out(d);
  for (const auto& u : unitaries) {
    if (u.dim() != d) throw InvalidArgument("unitary and state dimensions differ");
    const auto probs = born_probabilities(u * rho * u.adjoint());
    for (std::size_t k = 0; k < d; ++k)
      if (probs[k] != 0.0) out += rotated_projector(u, k) * Complex(probs[k]);
  }
  out *= Complex(1.0 / static_cast<double>(unitaries.size()));
  return out;
}

/// Exact channel of an explicit ensemble.
inline Operator forward_channel_exact(const UnitaryEnsemble& e, const Operator& rho) {
  if (!e.is_explicit()) throw InvalidArgument("ensemble '" + e.id + "' has no explicit member list");
  if (rho.qubits() != e.n) throw InvalidArgument("state size does not match ensemble");
  return forward_channel(e.members, rho);
}

inline Operator forward_channel_exact(const UnitaryEnsemble& e, const DensityMatrix& rho) {
  return forward_channel_exact(e, rho.op());
}

/// Inverse image of one outcome: the single-shot shadow.
inline Operator single_shot_shadow(const UnitaryEnsemble& e, const Operator& u, std::size_t outcome) {
  return apply_inverse(e, rotated_projector(u, outcome));
}

namespace golden {

// Closed-form two-qubit outputs, written entry by entry from the symbolic
// state. Index 0..3 is |00>, |01>, |10>, |11>.

inline void require_two_qubits(const Operator& r) {
  if (r.dim() != 4) throw InvalidArgument("closed forms are defined for two qubits");
}

/// zeta_X with p = 5: diagonal and anti-diagonal exact.
inline Operator zeta_x(const Operator& r) {
  require_two_qubits(r);
  return Operator{
      {r(0, 0), r(0, 1) + r(2, 3), r(0, 2) + r(1, 3), r(0, 3)},
      {r(1, 0) + r(3, 2), r(1, 1), r(1, 2), r(1, 3) + r(0, 2)},
      {r(2, 0) + r(3, 1), r(2, 1), r(2, 2), r(2, 3) + r(0, 1)},
      {r(3, 0), r(3, 1) + r(2, 0), r(3, 2) + r(1, 0), r(3, 3)},
  };
}

/// zeta_1 with p = 5: single-active entries exact, double-active zero.
inline Operator zeta_1(const Operator& r) {
  require_two_qubits(r);
  return Operator{
      {2.0 * r(0, 0) - r(3, 3), r(0, 1), r(0, 2), 0.0},
      {r(1, 0), 2.0 * r(1, 1) - r(2, 2), 0.0, r(1, 3)},
      {r(2, 0), 0.0, 2.0 * r(2, 2) - r(1, 1), r(2, 3)},
      {0.0, r(3, 1), r(3, 2), 2.0 * r(3, 3) - r(0, 0)},
  };
}

/// zeta_1a = {1, H (x) 1, HS (x) 1} with p = 3.
inline Operator zeta_1a(const Operator& r) {
  require_two_qubits(r);
  return Operator{
      {-1.0 + 2.0 * r(0, 0) + r(2, 2), 0.0, r(0, 2), 0.0},
      {0.0, -1.0 + 2.0 * r(1, 1) + r(3, 3), 0.0, r(1, 3)},
      {r(2, 0), 0.0, -1.0 + 2.0 * r(2, 2) + r(0, 0), 0.0},
      {0.0, r(3, 1), 0.0, -1.0 + 2.0 * r(3, 3) + r(1, 1)},
  };
}

/// zeta_1b = {1, 1 (x) H, 1 (x) HS} with p = 3.
inline Operator zeta_1b(const Operator& r) {
  require_two_qubits(r);
  return Operator{
      {-1.0 + 2.0 * r(0, 0) + r(1, 1), r(0, 1), 0.0, 0.0},
      {r(1, 0), -1.0 + 2.0 * r(1, 1) + r(0, 0), 0.0, 0.0},
      {0.0, 0.0, -1.0 + 2.0 * r(2, 2) + r(3, 3), r(2, 3)},
      {0.0, 0.0, r(3, 2), -1.0 + 2.0 * r(3, 3) + r(2, 2)},
  };
}

/// Channel matrix B_H of the single unitary H (x) H, scaled by 4.
inline Operator b_h(const Operator& r) {
  require_two_qubits(r);
  const Complex t = r(0, 0) + r(1, 1) + r(2, 2) + r(3, 3);
  const Complex a = r(0, 1) + r(1, 0) + r(2, 3) + r(3, 2);
  const Complex b = r(0, 2) + r(1, 3) + r(2, 0) + r(3, 1);
  const Complex c = r(0, 3) + r(1, 2) + r(2, 1) + r(3, 0);
  return Operator{{t, a, b, c}, {a, t, c, b}, {b, c, t, a}, {c, b, a, t}};
}

/// Channel matrix B_HS of the single unitary HS (x) HS, scaled by 4.
inline Operator b_hs(const Operator& r) {
  require_two_qubits(r);
  const Complex t = r(0, 0) + r(1, 1) + r(2, 2) + r(3, 3);
  const Complex a = r(0, 1) - r(1, 0) + r(2, 3) - r(3, 2);
  const Complex b = r(0, 2) + r(1, 3) - r(2, 0) - r(3, 1);
  const Complex c = r(0, 3) - r(1, 2) - r(2, 1) + r(3, 0);
  return Operator{{t, a, b, c}, {-a, t, -c, b}, {-b, -c, t, a}, {c, -b, -a, t}};
}

/// -1 + (p / 4) B for a single-unitary ensemble.
inline Operator single_unitary(double p, const Operator& b) {
  return pseudo_inverse(p / 4.0, b);
}

}  // namespace golden

/// Worst entrywise residual over the entries of `pattern`-active class.
inline double pattern_residual(const Operator& a, const Operator& b, const ActivityPattern& pattern) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j)
      if (pattern.matches(i, j)) worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
  return worst;
}

inline double trusted_residual(const Operator& a, const Operator& b, std::span<const ActivityPattern> trusted) {
  double worst = 0.0;
  for (const auto& p : trusted) worst = std::max(worst, pattern_residual(a, b, p));
  return worst;
}

struct GoldenCheck {
  std::string label;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool passed() const { return max_residual <= tolerance; }
};

struct GoldenOptions {
  std::uint64_t seed = 20260101;
  int states = 100;
  /// Added to every pseudo-inverse strength; nonzero values must fail.
  double p_offset = 0.0;
  double tolerance = 1e-10;
  bool include_generalized = true;
  int generalized_states = 20;
};

namespace detail {

/// Every family of two or more distinct k-subsets of {1..n}, for each k.
inline std::vector<std::vector<std::vector<unsigned>>> equal_size_families(unsigned n) {
  std::vector<std::vector<std::vector<unsigned>>> out;
  for (unsigned k = 1; k <= n; ++k) {
    std::vector<std::vector<unsigned>> subsets;
    for (std::uint32_t mask = 1; mask < (1U << n); ++mask) {
      if (static_cast<unsigned>(std::popcount(mask)) != k) continue;
      std::vector<unsigned> a;
      for (unsigned q = 1; q <= n; ++q)
        if (mask & (1U << (n - q))) a.push_back(q);
      subsets.push_back(std::move(a));
    }
    for (std::uint32_t pick = 1; pick < (1U << subsets.size()); ++pick) {
      if (std::popcount(pick) < 2) continue;
      std::vector<std::vector<unsigned>> family;
      for (std::size_t s = 0; s < subsets.size(); ++s)
        if (pick & (1U << s)) family.push_back(subsets[s]);
      out.push_back(std::move(family));
    }
  }
  return out;
}

inline double binomial(unsigned n, unsigned k) {
  double r = 1.0;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace detail

/**
 * Two-qubit closed forms against the exact channels on random states, and
 * (optionally) targeted-entry recovery for every subset, union and m-active
 * set at n = 2, 3. One check per label; residuals are worst case over states.
 */
inline std::vector<GoldenCheck> run_golden_suite(const GoldenOptions& opt = {}) {
  const double dp = opt.p_offset;
  const double tol = opt.tolerance;
  RandomStream rng(derive_seed(opt.seed, {stable_hash("golden")}));
  std::vector<DensityMatrix> states;
  for (int s = 0; s < opt.states; ++s) states.push_back(random_density_matrix(2, rng));

  const auto zx = zeta_X(2);
  const auto z1 = zeta_union(2, {{1}, {2}});
  const auto z1a = zeta_A(2, {1});
  const auto z1b = zeta_A(2, {2});
  const Operator hh = tensor_product(gates::hadamard(), gates::hadamard());
  const Operator hshs = tensor_product(gates::hs(), gates::hs());

  std::vector<GoldenCheck> out;
  auto check = [&](std::string label, auto&& compute) {
    GoldenCheck c{std::move(label), 0.0, tol};
    for (const auto& rho : states) c.max_residual = std::max(c.max_residual, compute(rho.op()));
    out.push_back(std::move(c));
  };
  check("zeta-X closed form (p=5)", [&](const Operator& r) {
    return max_abs_diff(pseudo_inverse(zx.p + dp, forward_channel_exact(zx, r)), golden::zeta_x(r));
  });
  check("zeta-1 closed form (p=5)", [&](const Operator& r) {
    return max_abs_diff(pseudo_inverse(z1.p + dp, forward_channel_exact(z1, r)), golden::zeta_1(r));
  });
  check("zeta-1a closed form (p=3)", [&](const Operator& r) {
    return max_abs_diff(pseudo_inverse(z1a.p + dp, forward_channel_exact(z1a, r)), golden::zeta_1a(r));
  });
  check("zeta-1b closed form (p=3)", [&](const Operator& r) {
    return max_abs_diff(pseudo_inverse(z1b.p + dp, forward_channel_exact(z1b, r)), golden::zeta_1b(r));
  });
  for (double p : {3.0, 5.0, 7.0}) {
    const std::string ps = std::to_string(static_cast<int>(p));
    check("B_H single unitary (p=" + ps + ")", [&](const Operator& r) {
      const Operator est = pseudo_inverse(p + dp, forward_channel(std::span(&hh, 1), r));
      return max_abs_diff(est, golden::single_unitary(p, golden::b_h(r)));
    });
    check("B_HS single unitary (p=" + ps + ")", [&](const Operator& r) {
      const Operator est = pseudo_inverse(p + dp, forward_channel(std::span(&hshs, 1), r));
      return max_abs_diff(est, golden::single_unitary(p, golden::b_hs(r)));
    });
  }
  if (!opt.include_generalized) return out;

  for (unsigned n : {2U, 3U}) {
    RandomStream srng(derive_seed(opt.seed, {stable_hash("generalized"), n}));
    std::vector<DensityMatrix> gstates;
    for (int s = 0; s < opt.generalized_states; ++s) gstates.push_back(random_density_matrix(n, srng));
    auto recover = [&](const std::string& label, const UnitaryEnsemble& e, double expected_size) {
      GoldenCheck c{label, 0.0, tol};
      if (static_cast<double>(e.size()) != expected_size || e.p != expected_size) {
        c.max_residual = std::abs(static_cast<double>(e.size()) - expected_size) + std::abs(e.p - expected_size) + 1.0;
      }
      for (const auto& rho : gstates) {
        const Operator est = pseudo_inverse(e.p + dp, forward_channel_exact(e, rho.op()));
        c.max_residual = std::max(c.max_residual, trusted_residual(est, rho.op(), e.trusted()));
      }
      out.push_back(std::move(c));
    };
    const std::string tag = " (n=" + std::to_string(n) + ")";
    for (std::uint32_t mask = 1; mask < (1U << n); ++mask) {
      std::vector<unsigned> a;
      for (unsigned q = 1; q <= n; ++q)
        if (mask & (1U << (n - q))) a.push_back(q);
      const auto e = zeta_A(n, a);
      recover("zeta-A:" + detail::subset_string(a) + tag, e, std::ldexp(1.0, static_cast<int>(a.size())) + 1.0);
    }
    for (const auto& family : detail::equal_size_families(n)) {
      const auto e = zeta_union(n, family);
      recover(e.id + tag, e,
              static_cast<double>(family.size()) * std::ldexp(1.0, static_cast<int>(family.front().size())) + 1.0);
    }
    for (unsigned m = 1; m <= n; ++m) {
      const auto e = zeta_m_active(n, m);
      recover("zeta-m:" + std::to_string(m) + tag, e, detail::binomial(n, m) * std::ldexp(1.0, static_cast<int>(m)) + 1.0);
    }
  }
  return out;
}

}  // namespace pqst
