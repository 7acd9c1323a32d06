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

#include <algorithm>
#include <cmath>
#include <vector>

#include "pqst/channels.hpp"

namespace pqst {
namespace {

Operator random_operator(std::size_t d, RandomStream& rng) {
  Operator m(d);
  for (auto& z : m.entries()) z = Complex(standard_normal(rng), standard_normal(rng));
  return m;
}

/// Measure-and-prepare channel computed from projector matrices directly:
/// (1/|E|) sum_U sum_k Tr(P_k U rho U^dagger) U^dagger P_k U.
Operator brute_force_channel(const std::vector<Operator>& members, const Operator& rho) {
  const std::size_t d = rho.dim();
  Operator out(d);
  for (const auto& u : members)
    for (std::size_t k = 0; k < d; ++k) {
      Operator pk(d);
      pk(k, k) = 1.0;
      const Complex w = (pk * u * rho * u.adjoint()).trace();
      out += u.adjoint() * pk * u * w;
    }
  out *= Complex(1.0 / static_cast<double>(members.size()));
  return out;
}

TEST(InverseMaps, Examples) {
  const Operator quarter = Operator::identity(4) * Complex(0.25);
  EXPECT_LE(max_abs_diff(pseudo_inverse(5.0, quarter), quarter), 1e-15);
  EXPECT_THROW(pseudo_inverse(0.0, quarter), InvalidArgument);
  EXPECT_THROW(pseudo_inverse(-1.0, quarter), InvalidArgument);

  Operator zero(2);
  zero(0, 0) = 1.0;
  EXPECT_LE(max_abs_diff(depolarizing_channel(zero), Operator::diagonal(std::vector<double>{2.0 / 3, 1.0 / 3})), 1e-15);
  EXPECT_LE(max_abs_diff(depolarizing_inverse(1, zero), Operator::diagonal(std::vector<double>{2.0, -1.0})), 1e-15);
  EXPECT_THROW(depolarizing_inverse(2, zero), InvalidArgument);
}

TEST(InverseMaps, DepolarizingRoundTrip) {
  RandomStream rng(12);
  for (unsigned n = 1; n <= 4; ++n) {
    const Operator a = random_operator(std::size_t{1} << n, rng);
    EXPECT_LE(max_abs_diff(depolarizing_inverse(n, depolarizing_channel(a)), a), 1e-12);
    EXPECT_LE(max_abs_diff(depolarizing_channel(depolarizing_inverse(n, a)), a), 1e-12);
  }
}

TEST(InverseMaps, PerSiteFormsAgreeOnProducts) {
  RandomStream rng(13);
  for (unsigned n = 1; n <= 4; ++n) {
    std::vector<Operator> factors;
    for (unsigned q = 0; q < n; ++q) factors.push_back(random_operator(2, rng));
    EXPECT_LE(max_abs_diff(per_site_pauli_inverse(n, factors), per_site_pauli_inverse(tensor_product(factors))), 1e-11);
  }
  const Operator a = random_operator(2, rng);
  EXPECT_LE(max_abs_diff(per_site_pauli_inverse(a), depolarizing_inverse(1, a)), 1e-14);
  std::vector<Operator> wrong{Operator::identity(4)};
  EXPECT_THROW(per_site_pauli_inverse(1, wrong), InvalidArgument);
}

TEST(ForwardChannel, MatchesBruteForceOracle) {
  RandomStream rng(14);
  for (unsigned n = 1; n <= 3; ++n) {
    const auto rho = random_density_matrix(n, rng);
    for (const auto& e : {zeta_X(n), zeta_A(n, {1}), zeta_m_active(n, 1), pauli_local_ensemble(n), mub_ensemble(n)}) {
      EXPECT_LE(max_abs_diff(forward_channel_exact(e, rho), brute_force_channel(e.members, rho.op())), 1e-13)
          << e.id << " n=" << n;
    }
  }
}

TEST(ForwardChannel, IdentityOnlyKeepsTheDiagonal) {
  RandomStream rng(15);
  const auto rho = random_density_matrix(2, rng);
  const Operator id = Operator::identity(4);
  const Operator out = forward_channel(std::span(&id, 1), rho.op());
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(std::abs(out(i, j) - (i == j ? rho(i, i) : 0.0)), 0.0, 1e-15);
}

TEST(ForwardChannel, SingleQubitPauliIsDepolarizing) {
  RandomStream rng(16);
  const auto rho = random_density_matrix(1, rng);
  const Operator expected = (rho.op() + Operator::identity(2)) * Complex(1.0 / 3.0);
  EXPECT_LE(max_abs_diff(forward_channel_exact(pauli_local_ensemble(1), rho), expected), 1e-14);
}

TEST(ForwardChannel, CliffordAndMubAreDepolarizingOnTwoQubits) {
  RandomStream rng(17);
  const auto rho = random_density_matrix(2, rng);
  const Operator expected = (rho.op() + Operator::identity(4)) * Complex(1.0 / 5.0);
  EXPECT_LE(max_abs_diff(forward_channel_exact(clifford_ensemble(2), rho), expected), 1e-12);
  EXPECT_LE(max_abs_diff(forward_channel_exact(mub_ensemble(2), rho), expected), 1e-12);
  const auto one = random_density_matrix(1, rng);
  EXPECT_LE(max_abs_diff(forward_channel_exact(clifford_ensemble(1), one), depolarizing_channel(one.op())), 1e-13);
}

TEST(ForwardChannel, MubIsDepolarizingUpToFourQubits) {
  RandomStream rng(18);
  for (unsigned n = 3; n <= 4; ++n) {
    const auto rho = random_density_matrix(n, rng);
    EXPECT_LE(max_abs_diff(forward_channel_exact(mub_ensemble(n), rho), depolarizing_channel(rho.op())), 1e-12);
  }
}

TEST(ForwardChannel, ImplicitEnsembleRejected) {
  EXPECT_THROW(forward_channel_exact(clifford_ensemble(3), DensityMatrix::maximally_mixed(3)), InvalidArgument);
  EXPECT_THROW(forward_channel_exact(zeta_X(2), DensityMatrix::maximally_mixed(3)), InvalidArgument);
}

TEST(ForwardChannel, AffineOnStates) {
  RandomStream rng(19);
  const auto e = zeta_m_active(3, 2);
  const auto a = random_density_matrix(3, rng), b = random_density_matrix(3, rng);
  const double w = 0.3;
  const Operator mix = a.op() * Complex(w) + b.op() * Complex(1 - w);
  EXPECT_LE(max_abs_diff(forward_channel_exact(e, mix),
                         forward_channel_exact(e, a) * Complex(w) + forward_channel_exact(e, b) * Complex(1 - w)),
            1e-13);
}

TEST(Recovery, PauliEnsembleIsExactEverywhere) {
  RandomStream rng(20);
  for (unsigned n = 1; n <= 3; ++n) {
    const auto e = pauli_local_ensemble(n);
    for (int t = 0; t < 5; ++t) {
      const auto rho = random_density_matrix(n, rng);
      EXPECT_LE(max_abs_diff(apply_inverse(e, forward_channel_exact(e, rho)), rho.op()), 1e-12) << "n=" << n;
    }
  }
}

TEST(Recovery, GlobalEnsemblesAreExactEverywhere) {
  RandomStream rng(21);
  const auto rho = random_density_matrix(2, rng);
  for (const auto& e : {clifford_ensemble(2), mub_ensemble(2)})
    EXPECT_LE(max_abs_diff(apply_inverse(e, forward_channel_exact(e, rho)), rho.op()), 1e-12) << e.id;
}

TEST(Recovery, ZetaSetsRecoverExactlyTheirTrustedEntries) {
  RandomStream rng(22);
  for (unsigned n = 2; n <= 4; ++n) {
    const auto rho = random_density_matrix(n, rng);
    for (const auto& e : {zeta_X(n), zeta_A(n, {1}), zeta_A(n, {2}), zeta_m_active(n, 1), zeta_m_active(n, n - 1)}) {
      const Operator est = apply_inverse(e, forward_channel_exact(e, rho));
      EXPECT_LE(trusted_residual(est, rho.op(), e.trusted()), 1e-12) << e.id << " n=" << n;
      // Untrusted classes are biased for a generic state.
      const auto trusted = e.trusted();
      std::vector<ActivityPattern> others;
      for (const auto& a : all_patterns(n))
        if (std::find(trusted.begin(), trusted.end(), a) == trusted.end()) others.push_back(a);
      EXPECT_GT(trusted_residual(est, rho.op(), others), 1e-3) << e.id << " n=" << n;
    }
  }
}

TEST(Recovery, PartialRegisterSetsDistortTheDiagonal) {
  RandomStream rng(26);
  for (unsigned n = 2; n <= 3; ++n)
    for (const auto& a : std::vector<std::vector<unsigned>>{{1}, {2}}) {
      const auto e = zeta_A(n, a);
      double worst = 0.0;
      for (int t = 0; t < 20; ++t) {
        const auto rho = random_density_matrix(n, rng);
        worst = std::max(worst, pattern_residual(apply_inverse(e, forward_channel_exact(e, rho)), rho.op(),
                                                 ActivityPattern{n, 0}));
      }
      EXPECT_GT(worst, 0.1) << e.id << " n=" << n;
    }
}

TEST(Recovery, SingleShotShadowsAverageToTheEstimate) {
  RandomStream rng(23);
  const auto rho = random_density_matrix(2, rng);
  const auto e = zeta_X(2);
  Operator avg(4);
  for (const auto& u : e.members) {
    const auto probs = born_probabilities(u * rho.op() * u.adjoint());
    for (std::size_t k = 0; k < 4; ++k) avg += single_shot_shadow(e, u, k) * Complex(probs[k] / e.size());
  }
  EXPECT_LE(max_abs_diff(avg, apply_inverse(e, forward_channel_exact(e, rho))), 1e-13);
}

TEST(Golden, ClosedFormsHold) {
  const auto checks = run_golden_suite();
  EXPECT_GE(checks.size(), 10U);
  for (const auto& c : checks) EXPECT_TRUE(c.passed()) << c.label << " residual " << c.max_residual;
}

TEST(Golden, StrengthOffsetIsDetected) {
  GoldenOptions opt;
  opt.p_offset = 0.01;
  opt.states = 5;
  opt.generalized_states = 2;
  for (const auto& c : run_golden_suite(opt)) EXPECT_FALSE(c.passed()) << c.label;
}

TEST(Golden, ClosedFormsAreSelfConsistent) {
  // The zeta-1 form is the union of the 1a and 1b channels at p = 5:
  // 5 * (3 C_1a + 3 C_1b - C_id) / 5 - 1 with C = channel outputs.
  RandomStream rng(24);
  const auto rho = random_density_matrix(2, rng).op();
  const Operator ca = (golden::zeta_1a(rho) + Operator::identity(4)) * Complex(1.0 / 3.0);
  const Operator cb = (golden::zeta_1b(rho) + Operator::identity(4)) * Complex(1.0 / 3.0);
  Operator diag(4);
  for (std::size_t i = 0; i < 4; ++i) diag(i, i) = rho(i, i);
  const Operator union_channel = (ca * Complex(3.0) + cb * Complex(3.0) - diag) * Complex(1.0 / 5.0);
  EXPECT_LE(max_abs_diff(pseudo_inverse(5.0, union_channel), golden::zeta_1(rho)), 1e-13);
}

TEST(NegativeControl, PerSiteInverseOnZetaXIsWrong) {
  RandomStream rng(25);
  double worst = 0.0;
  const auto e = zeta_X(2);
  for (int t = 0; t < 10; ++t) {
    const auto rho = random_density_matrix(2, rng);
    const Operator est = per_site_pauli_inverse(forward_channel_exact(e, rho));
    worst = std::max(worst, trusted_residual(est, rho.op(), e.trusted()));
  }
  EXPECT_GT(worst, 0.01);
}

}  // namespace
}  // namespace pqst
