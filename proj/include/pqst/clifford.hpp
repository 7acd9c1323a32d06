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
 * Global Clifford group: exact enumeration for one and two qubits, and a
 * uniform tableau sampler for larger registers.
 *
 * All matrices are reported modulo global phase: the first nonzero entry in
 * row-major order is made real and positive.
 */
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <unordered_map>
#include <vector>

#include "pqst/error.hpp"
#include "pqst/linalg.hpp"
#include "pqst/pauli.hpp"
#include "pqst/random.hpp"

namespace pqst {

inline Operator canonicalize_phase(Operator u, double zero_tol = 1e-9) {
  for (const auto& z : u.entries()) {
    if (std::abs(z) > zero_tol) {
      u *= std::conj(z) / std::abs(z);
      break;
    }
  }
  return u;
}

/// Hashable key of a phase-canonical matrix, entries rounded to 1e-8.
struct OperatorKey {
  std::vector<std::int64_t> parts;

  explicit OperatorKey(const Operator& canonical) {
    parts.reserve(canonical.entries().size() * 2);
    for (const auto& z : canonical.entries()) {
      parts.push_back(std::llround(z.real() * 1e8));
      parts.push_back(std::llround(z.imag() * 1e8));
    }
  }

  bool operator==(const OperatorKey&) const = default;
};

struct OperatorKeyHash {
  std::size_t operator()(const OperatorKey& k) const noexcept {
    std::uint64_t h = 0x84222325CBF29CE4ULL;
    for (auto v : k.parts) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
    return static_cast<std::size_t>(h);
  }
};

/// Closure of a generator set under multiplication, modulo global phase.
inline std::vector<Operator> group_closure(std::span<const Operator> generators) {
  if (generators.empty()) throw InvalidArgument("closure needs at least one generator");
  std::vector<Operator> elements;
  std::unordered_map<OperatorKey, std::size_t, OperatorKeyHash> seen;
  std::deque<std::size_t> frontier;
  Operator id = Operator::identity(generators.front().dim());
  seen.emplace(OperatorKey(id), 0);
  elements.push_back(id);
  frontier.push_back(0);
  while (!frontier.empty()) {
    const std::size_t i = frontier.front();
    frontier.pop_front();
    for (const auto& g : generators) {
      Operator next = canonicalize_phase(g * elements[i]);
      OperatorKey key(next);
      if (seen.contains(key)) continue;
      seen.emplace(std::move(key), elements.size());
      frontier.push_back(elements.size());
      elements.push_back(std::move(next));
    }
  }
  return elements;
}

/// Generators {H_q, S_q} on every qubit and CNOT between neighbours
/// (control on the lower-numbered qubit).
inline std::vector<Operator> clifford_generators(unsigned n) {
  std::vector<Operator> gens;
  for (unsigned q = 1; q <= n; ++q) {
    gens.push_back(gates::on_qubit(gates::hadamard(), q, n));
    gens.push_back(gates::on_qubit(gates::phase_s(), q, n));
  }
  for (unsigned q = 1; q < n; ++q) {
    Operator c = gates::cnot();
    for (unsigned j = 1; j < q; ++j) c = tensor_product(gates::identity(), c);
    for (unsigned j = q + 2; j <= n; ++j) c = tensor_product(c, gates::identity());
    gens.push_back(std::move(c));
  }
  return gens;
}

/// Order of Cl(2^n) modulo phase: 2^{n^2+2n} prod_j (4^j - 1).
inline std::uint64_t clifford_group_order(unsigned n) {
  std::uint64_t order = std::uint64_t{1} << (n * n + 2 * n);
  for (unsigned j = 1; j <= n; ++j) order *= (std::uint64_t{1} << (2 * j)) - 1;
  return order;
}

/// Every element of Cl(2^n) for n <= 2 (24 and 11520 matrices). Cached.
inline const std::vector<Operator>& enumerate_clifford_group(unsigned n) {
  if (n < 1 || n > 2) throw InvalidArgument("Clifford enumeration is limited to n <= 2");
  static const std::vector<Operator> one = [] {
    const auto g = clifford_generators(1);
    return group_closure(g);
  }();
  static const std::vector<Operator> two = [] {
    const auto g = clifford_generators(2);
    return group_closure(g);
  }();
  return n == 1 ? one : two;
}

/// Signed Hermitian Pauli: (-1)^negative i^{|x&z|} X^x Z^z.
struct SignedPauli {
  std::uint32_t x = 0;
  std::uint32_t z = 0;
  bool negative = false;

  Operator matrix(unsigned n) const {
    Operator m = pauli_from_xz(n, x, z);
    if (negative) m *= Complex(-1.0);
    return m;
  }
};

inline int symplectic_product(std::uint32_t x1, std::uint32_t z1, std::uint32_t x2, std::uint32_t z2) {
  return std::popcount((x1 & z2) ^ (z1 & x2)) & 1;
}

/// Images of X_q and Z_q (q = 1..n, index q-1) under conjugation U P U^dagger.
struct CliffordTableau {
  unsigned n = 0;
  std::vector<SignedPauli> x_images;
  std::vector<SignedPauli> z_images;

  bool is_symplectic() const {
    for (unsigned a = 0; a < n; ++a)
      for (unsigned b = 0; b < n; ++b) {
        const auto &xa = x_images[a], &za = z_images[a], &xb = x_images[b], &zb = z_images[b];
        if (symplectic_product(xa.x, xa.z, xb.x, xb.z) != 0) return false;
        if (symplectic_product(za.x, za.z, zb.x, zb.z) != 0) return false;
        if (symplectic_product(xa.x, xa.z, zb.x, zb.z) != (a == b ? 1 : 0)) return false;
      }
    return true;
  }
};

/**
 * Uniformly random Clifford tableau.
 *
 * Builds a symplectic basis one hyperbolic pair at a time: v uniform over
 * nonzero vectors of the current subspace, w uniform over vectors with
 * <v, w> = 1, then recurse into the symplectic complement of span(v, w).
 * Every symplectic matrix arises from exactly one sequence of choices, and
 * the 2n image signs are uniform, so the result is uniform over Cl(2^n)
 * modulo phase.
 */
inline CliffordTableau random_clifford_tableau(unsigned n, RandomStream& rng) {
  if (n < 1 || n > kMaxQubits) throw InvalidArgument("tableau size out of range");
  struct Vec {
    std::uint32_t x, z;
  };
  auto ip = [](Vec a, Vec b) { return symplectic_product(a.x, a.z, b.x, b.z); };
  auto combo = [](const std::vector<Vec>& basis, std::uint64_t coeffs) {
    Vec v{0, 0};
    for (std::size_t i = 0; i < basis.size(); ++i)
      if ((coeffs >> i) & 1U) {
        v.x ^= basis[i].x;
        v.z ^= basis[i].z;
      }
    return v;
  };

  std::vector<Vec> basis;
  for (unsigned q = 0; q < n; ++q) {
    basis.push_back({1U << q, 0});
    basis.push_back({0, 1U << q});
  }
  CliffordTableau t{n, std::vector<SignedPauli>(n), std::vector<SignedPauli>(n)};
  for (unsigned q = 0; q < n; ++q) {
    const std::uint64_t span = std::uint64_t{1} << basis.size();
    const Vec v = combo(basis, 1 + rng.below(span - 1));
    Vec w;
    do {
      w = combo(basis, rng.below(span));
    } while (ip(v, w) != 1);
    t.x_images[q] = {v.x, v.z, (rng.next() >> 63) != 0};
    t.z_images[q] = {w.x, w.z, (rng.next() >> 63) != 0};

    // Project the old basis onto the complement of span(v, w) and keep an
    // independent subset by elimination.
    std::vector<Vec> projected;
    for (Vec b : basis) {
      Vec p = b;
      if (ip(b, w)) { p.x ^= v.x; p.z ^= v.z; }
      if (ip(b, v)) { p.x ^= w.x; p.z ^= w.z; }
      projected.push_back(p);
    }
    std::vector<Vec> next;
    std::vector<std::uint64_t> reduced;  // row-echelon copies, packed x | z << 32
    for (Vec p : projected) {
      std::uint64_t r = p.x | (std::uint64_t{p.z} << 32);
      for (std::uint64_t e : reduced) r = std::min(r, r ^ e);
      if (r == 0) continue;
      reduced.push_back(r);
      std::sort(reduced.begin(), reduced.end(), std::greater<>());
      next.push_back(p);
    }
    basis = std::move(next);
  }
  return t;
}

/**
 * Unitary (up to phase) realising a tableau.
 *
 * U|0> is the joint +1 eigenvector of the Z images; columns follow from
 * U|x> = prod_q (X-image_q)^{x_q} U|0>. Output is phase-canonical.
 */
inline Operator tableau_to_matrix(const CliffordTableau& t) {
  if (!t.is_symplectic()) throw InvalidArgument("tableau is not symplectic");
  const unsigned n = t.n;
  const std::size_t d = std::size_t{1} << n;
  Operator proj = Operator::identity(d);
  for (const auto& g : t.z_images) proj = proj * ((Operator::identity(d) + g.matrix(n)) * Complex(0.5));
  std::size_t best = 0;
  double best_norm = -1.0;
  for (std::size_t c = 0; c < d; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < d; ++r) s += std::norm(proj(r, c));
    if (s > best_norm) {
      best_norm = s;
      best = c;
    }
  }
  std::vector<Complex> psi0 = proj.column(best);
  const double norm = std::sqrt(best_norm);
  for (auto& a : psi0) a /= norm;

  std::vector<Operator> x_mats;
  for (const auto& g : t.x_images) x_mats.push_back(g.matrix(n));
  Operator u(d);
  for (std::size_t col = 0; col < d; ++col) {
    std::vector<Complex> v = psi0;
    // Column index bit for qubit q (1-based) is n - q.
    for (unsigned q = 1; q <= n; ++q)
      if ((col >> (n - q)) & 1U) v = x_mats[q - 1].apply(v);
    for (std::size_t r = 0; r < d; ++r) u(r, col) = v[r];
  }
  return canonicalize_phase(std::move(u));
}

/**
 * Uniformly random element of Cl(2^n) modulo phase. n <= 2 indexes into the
 * enumerated group; larger registers go through the tableau sampler.
 */
inline Operator sample_global_clifford(unsigned n, RandomStream& rng) {
  if (n <= 2) {
    const auto& group = enumerate_clifford_group(n);
    return group[rng.below(group.size())];
  }
  return tableau_to_matrix(random_clifford_tableau(n, rng));
}

}  // namespace pqst
