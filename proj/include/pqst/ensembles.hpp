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
 * Measurement ensembles.
 *
 * Partial sets zeta_A contain the identity plus every {H, HS} word on the
 * qubits in A (identity elsewhere) and are inverted with p = |zeta_A|.
 * Equal-cardinality unions of such sets use p = |union|. The baselines are
 * the full local set {1, H, HS}^n, global Cliffords and mutually unbiased
 * bases.
 */
#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pqst/clifford.hpp"
#include "pqst/error.hpp"
#include "pqst/linalg.hpp"
#include "pqst/pauli.hpp"
#include "pqst/random.hpp"

namespace pqst {

enum class InverseKind : std::uint8_t {
  Pseudo,              // A -> p A - 1
  GlobalDepolarizing,  // A -> (2^n + 1) A - Tr(A) 1
  PerSitePauli,        // A -> (x)_j [3 A_j - Tr(A_j) 1]
};

inline const char* to_string(InverseKind k) {
  switch (k) {
    case InverseKind::Pseudo: return "pseudo";
    case InverseKind::GlobalDepolarizing: return "global-depolarizing";
    case InverseKind::PerSitePauli: return "per-site-pauli";
  }
  return "?";
}

enum class LocalGate : std::uint8_t { I, H, HS };

inline Operator local_gate_matrix(LocalGate g) {
  switch (g) {
    case LocalGate::I: return gates::identity();
    case LocalGate::H: return gates::hadamard();
    case LocalGate::HS: return gates::hs();
  }
  return gates::identity();
}

inline std::string word_label(const std::vector<LocalGate>& word) {
  std::string s;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i) s += "⊗";
    s += word[i] == LocalGate::I ? "1" : word[i] == LocalGate::H ? "H" : "HS";
  }
  return s;
}

struct UnitaryEnsemble {
  std::string id;
  unsigned n = 0;
  /// Explicit members; empty for sampler-only ensembles.
  std::vector<Operator> members;
  /// Per-site gate words, present for product ensembles.
  std::vector<std::vector<LocalGate>> words;
  std::vector<std::string> labels;
  /// Draws one member of an implicit ensemble.
  std::function<Operator(RandomStream&)> sampler;
  double p = 0.0;
  InverseKind inverse_kind = InverseKind::Pseudo;
  std::vector<ActivityPattern> activity_signature;
  bool diagonal_trusted = false;

  bool is_explicit() const noexcept { return !members.empty(); }
  bool is_product() const noexcept { return !words.empty(); }
  std::size_t size() const noexcept { return members.size(); }

  std::string label(std::size_t i) const {
    return i < labels.size() ? labels[i] : "U" + std::to_string(i + 1);
  }

  /// Element classes whose estimates are unbiased.
  std::vector<ActivityPattern> trusted() const {
    std::set<ActivityPattern> s(activity_signature.begin(), activity_signature.end());
    if (diagonal_trusted) s.insert(ActivityPattern{n, 0});
    return {s.begin(), s.end()};
  }

  /// Site factors of member i (product ensembles only).
  std::vector<Operator> site_factors(std::size_t i) const {
    if (!is_product()) throw InvalidArgument("ensemble '" + id + "' is not a product ensemble");
    std::vector<Operator> out;
    for (auto g : words.at(i)) out.push_back(local_gate_matrix(g));
    return out;
  }
};

namespace detail {

inline void check_register(unsigned n) {
  if (n < 1 || n > kMaxQubits) throw InvalidArgument("register size must be between 1 and 4 qubits");
}

/// Sorted, deduplicated 1-based subset.
inline std::vector<unsigned> normalize_subset(unsigned n, std::vector<unsigned> a) {
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  for (unsigned q : a)
    if (q < 1 || q > n) throw InvalidArgument("qubit " + std::to_string(q) + " outside 1.." + std::to_string(n));
  return a;
}

/// Identity word followed by all {H, HS} words on `subset`.
inline std::vector<std::vector<LocalGate>> zeta_words(unsigned n, const std::vector<unsigned>& subset) {
  std::vector<std::vector<LocalGate>> out;
  out.emplace_back(n, LocalGate::I);
  const std::size_t k = subset.size();
  for (std::uint32_t code = 0; code < (1U << k); ++code) {
    std::vector<LocalGate> w(n, LocalGate::I);
    for (std::size_t i = 0; i < k; ++i) {
      const bool hs = (code >> (k - 1 - i)) & 1U;
      w[subset[i] - 1] = hs ? LocalGate::HS : LocalGate::H;
    }
    out.push_back(std::move(w));
  }
  return out;
}

inline void fill_members(UnitaryEnsemble& e) {
  e.members.clear();
  e.labels.clear();
  for (const auto& w : e.words) {
    std::vector<Operator> f;
    for (auto g : w) f.push_back(local_gate_matrix(g));
    e.members.push_back(tensor_product(f));
    e.labels.push_back(word_label(w));
  }
}

inline std::string subset_string(const std::vector<unsigned>& a) {
  std::string s;
  for (std::size_t i = 0; i < a.size(); ++i) s += (i ? "," : "") + std::to_string(a[i]);
  return s;
}

}  // namespace detail

/// zeta_A: identity plus {H, HS}^A (x) 1 on the complement; p = 2^{|A|} + 1.
inline UnitaryEnsemble zeta_A(unsigned n, std::vector<unsigned> subset) {
  detail::check_register(n);
  subset = detail::normalize_subset(n, std::move(subset));
  if (subset.empty()) throw InvalidArgument("zeta_A needs a nonempty qubit subset");
  UnitaryEnsemble e;
  e.n = n;
  e.id = subset.size() == n ? "zeta-X" : "zeta-A:" + detail::subset_string(subset);
  e.words = detail::zeta_words(n, subset);
  detail::fill_members(e);
  e.p = static_cast<double>(e.members.size());
  e.inverse_kind = InverseKind::Pseudo;
  e.activity_signature = {ActivityPattern::from_qubits(n, subset)};
  e.diagonal_trusted = subset.size() == n;
  return e;
}

inline UnitaryEnsemble zeta_X(unsigned n) {
  std::vector<unsigned> all(n);
  for (unsigned q = 0; q < n; ++q) all[q] = q + 1;
  return zeta_A(n, all);
}

/// Union of zeta_A over distinct subsets of equal size; p = |union|.
inline UnitaryEnsemble zeta_union(unsigned n, std::vector<std::vector<unsigned>> parts) {
  detail::check_register(n);
  if (parts.empty()) throw InvalidArgument("zeta union needs at least one subset");
  std::set<std::vector<unsigned>> distinct;
  for (auto& a : parts) {
    a = detail::normalize_subset(n, a);
    if (a.empty()) throw InvalidArgument("zeta union parts must be nonempty");
    if (a.size() != parts.front().size()) {
      throw InvalidArgument("zeta union requires subsets of equal cardinality");
    }
    if (!distinct.insert(a).second) throw InvalidArgument("zeta union subsets must be distinct");
  }
  std::sort(parts.begin(), parts.end());
  if (parts.size() == 1) return zeta_A(n, parts.front());

  UnitaryEnsemble e;
  e.n = n;
  std::set<std::vector<LocalGate>> seen;
  for (const auto& a : parts) {
    e.id += (e.id.empty() ? "" : "|") + std::string("zeta-A:") + detail::subset_string(a);
    for (auto& w : detail::zeta_words(n, a))
      if (seen.insert(w).second) e.words.push_back(std::move(w));
    e.activity_signature.push_back(ActivityPattern::from_qubits(n, a));
  }
  std::sort(e.activity_signature.begin(), e.activity_signature.end());
  detail::fill_members(e);
  e.p = static_cast<double>(e.members.size());
  e.inverse_kind = InverseKind::Pseudo;
  e.diagonal_trusted = false;
  return e;
}

/// Union over all m-subsets; |members| = C(n, m) 2^m + 1.
inline UnitaryEnsemble zeta_m_active(unsigned n, unsigned m) {
  detail::check_register(n);
  if (m < 1 || m > n) throw InvalidArgument("m must satisfy 1 <= m <= n");
  std::vector<std::vector<unsigned>> parts;
  for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
    if (static_cast<unsigned>(std::popcount(mask)) != m) continue;
    std::vector<unsigned> a;
    for (unsigned q = 1; q <= n; ++q)
      if (mask & (1U << (n - q))) a.push_back(q);
    parts.push_back(std::move(a));
  }
  std::sort(parts.begin(), parts.end());
  UnitaryEnsemble e = zeta_union(n, parts);
  if (m != n) e.id = "zeta-m:" + std::to_string(m);
  return e;
}

inline std::vector<ActivityPattern> full_signature(unsigned n) { return all_patterns(n); }

/// {1, H, HS}^n with the per-site inverse.
inline UnitaryEnsemble pauli_local_ensemble(unsigned n) {
  detail::check_register(n);
  UnitaryEnsemble e;
  e.n = n;
  e.id = "pauli";
  std::size_t total = 1;
  for (unsigned q = 0; q < n; ++q) total *= 3;
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<LocalGate> w(n);
    std::size_t c = code;
    for (unsigned q = n; q-- > 0;) {
      w[q] = static_cast<LocalGate>(c % 3);
      c /= 3;
    }
    e.words.push_back(std::move(w));
  }
  detail::fill_members(e);
  e.p = 3.0;
  e.inverse_kind = InverseKind::PerSitePauli;
  e.activity_signature = full_signature(n);
  e.diagonal_trusted = true;
  return e;
}

/**
 * Uniform global Cliffords. For n <= 2 the ensemble is explicit (the full
 * enumerated group, so uniform member choice is exact); above that it is
 * sampler-only.
 */
inline UnitaryEnsemble clifford_ensemble(unsigned n) {
  detail::check_register(n);
  UnitaryEnsemble e;
  e.n = n;
  e.id = "clifford";
  if (n <= 2) e.members = enumerate_clifford_group(n);
  e.sampler = [n](RandomStream& rng) { return sample_global_clifford(n, rng); };
  e.p = static_cast<double>((1U << n) + 1);
  e.inverse_kind = InverseKind::GlobalDepolarizing;
  e.activity_signature = full_signature(n);
  e.diagonal_trusted = true;
  return e;
}

/// A Pauli word as (x, z) masks in basis-index layout.
struct PauliXZ {
  std::uint32_t x = 0;
  std::uint32_t z = 0;
  auto operator<=>(const PauliXZ&) const = default;
};

namespace detail {

/// Rows of an n x n GF(2) matrix; row i acts on bit i.
using BitMatrix = std::vector<std::uint32_t>;

inline std::uint32_t apply(const BitMatrix& m, std::uint32_t a) {
  std::uint32_t out = 0;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (std::popcount(m[i] & a) & 1) out |= 1U << i;
  return out;
}

inline bool invertible(BitMatrix m) {
  const std::size_t n = m.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && !((m[pivot] >> col) & 1U)) ++pivot;
    if (pivot == n) return false;
    std::swap(m[col], m[pivot]);
    for (std::size_t r = 0; r < n; ++r)
      if (r != col && ((m[r] >> col) & 1U)) m[r] ^= m[col];
  }
  return true;
}

/// Product in GF(2^n) modulo x^n + x + 1 (irreducible for n = 1..4).
inline std::uint32_t gf_mul(std::uint32_t a, std::uint32_t b, unsigned n) {
  const std::uint32_t top = 1U << n, reduce = n == 1 ? 1U : 0b11U;
  std::uint32_t out = 0;
  for (; b != 0; b >>= 1) {
    if (b & 1U) out ^= a;
    a <<= 1;
    if (a & top) a ^= top | reduce;
  }
  return out;
}

/// Absolute trace y + y^2 + ... + y^(2^(n-1)), an element of GF(2).
inline unsigned gf_trace(std::uint32_t y, unsigned n) {
  std::uint32_t t = 0, power = y;
  for (unsigned k = 0; k < n; ++k) {
    t ^= power;
    power = gf_mul(power, power, n);
  }
  return t & 1U;
}

/**
 * 2^n symmetric matrices with pairwise invertible differences:
 * M_a[i][j] = Tr(a f_i f_j) over the polynomial basis f_i = x^i. The map
 * a -> M_a is linear and M_a is nonsingular for a != 0, since the trace
 * form is nondegenerate.
 */
inline std::vector<BitMatrix> mub_symmetric_set(unsigned n) {
  std::vector<BitMatrix> out;
  for (std::uint32_t a = 0; a < (1U << n); ++a) {
    BitMatrix m(n, 0);
    for (unsigned i = 0; i < n; ++i)
      for (unsigned j = 0; j < n; ++j)
        if (gf_trace(gf_mul(a, gf_mul(1U << i, 1U << j, n), n), n)) m[i] |= 1U << j;
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace detail

/**
 * Partition of the 4^n - 1 nontrivial Pauli words into 2^n + 1 classes of
 * 2^n - 1 mutually commuting words. Class 0 is {Z^b}; class k >= 1 is
 * {X^a Z^{M_k a}} for the k-th symmetric matrix of the MUB set.
 */
inline std::vector<std::vector<PauliXZ>> mub_pauli_classes(unsigned n) {
  detail::check_register(n);
  std::vector<std::vector<PauliXZ>> classes;
  std::vector<PauliXZ> zs;
  for (std::uint32_t b = 1; b < (1U << n); ++b) zs.push_back({0, b});
  classes.push_back(std::move(zs));
  for (const auto& m : detail::mub_symmetric_set(n)) {
    std::vector<PauliXZ> cls;
    for (std::uint32_t a = 1; a < (1U << n); ++a) cls.push_back({a, detail::apply(m, a)});
    classes.push_back(std::move(cls));
  }
  return classes;
}

/**
 * Mutually unbiased bases as basis-change unitaries: row k of member i is
 * the k-th vector of basis i (conjugated), so measuring after U_i reads out
 * basis i. Each basis diagonalises one commuting Pauli class; inverted with
 * the global depolarizing inverse at strength 2^n + 1.
 */
inline UnitaryEnsemble mub_ensemble(unsigned n) {
  detail::check_register(n);
  UnitaryEnsemble e;
  e.n = n;
  e.id = "mub";
  const std::size_t d = std::size_t{1} << n;
  e.members.push_back(Operator::identity(d));
  e.labels.push_back("Z-basis");
  const auto mats = detail::mub_symmetric_set(n);
  for (std::size_t k = 0; k < mats.size(); ++k) {
    // Nondegenerate element of the class algebra: sum_i 2^i g_i over the n
    // generators g_i = X^{e_i} Z^{M e_i}.
    Operator h(d);
    for (unsigned i = 0; i < n; ++i) {
      const std::uint32_t a = 1U << i;
      h += pauli_from_xz(n, a, detail::apply(mats[k], a)) * Complex(static_cast<double>(1U << i));
    }
    const auto es = eigh(h);
    Operator u(d);
    for (std::size_t row = 0; row < d; ++row)
      for (std::size_t c = 0; c < d; ++c) u(row, c) = std::conj(es.vectors(c, row));
    e.members.push_back(canonicalize_phase(std::move(u)));
    e.labels.push_back("mub-" + std::to_string(k + 1));
  }
  e.p = static_cast<double>(d + 1);
  e.inverse_kind = InverseKind::GlobalDepolarizing;
  e.activity_signature = full_signature(n);
  e.diagonal_trusted = true;
  return e;
}

namespace detail {

inline std::vector<unsigned> parse_qubit_list(std::string_view text) {
  std::vector<unsigned> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    const std::string_view item = text.substr(pos, end - pos);
    if (item.empty()) throw ParseError("empty qubit label", pos);
    unsigned v = 0;
    for (char c : item) {
      if (c < '0' || c > '9') throw ParseError("qubit labels must be positive integers", pos);
      v = v * 10 + static_cast<unsigned>(c - '0');
    }
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

}  // namespace detail

/**
 * Ensemble from its command-line name: "zeta-X", "zeta-A:1,2", "zeta-m:2",
 * "pauli", "clifford", "mub". zeta-A specs joined with '|' form a union,
 * e.g. "zeta-A:1|zeta-A:2".
 */
inline UnitaryEnsemble make_ensemble(std::string_view spec, unsigned n) {
  detail::check_register(n);
  if (spec == "zeta-X") return zeta_X(n);
  if (spec == "pauli") return pauli_local_ensemble(n);
  if (spec == "clifford") return clifford_ensemble(n);
  if (spec == "mub") return mub_ensemble(n);
  if (spec.starts_with("zeta-m:")) {
    const auto m = detail::parse_qubit_list(spec.substr(7));
    if (m.size() != 1) throw ParseError("zeta-m takes a single integer", 7);
    return zeta_m_active(n, m.front());
  }
  if (spec.starts_with("zeta-A:")) {
    std::vector<std::vector<unsigned>> parts;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
      const std::size_t end = std::min(spec.find('|', pos), spec.size());
      const std::string_view item = spec.substr(pos, end - pos);
      if (!item.starts_with("zeta-A:")) throw ParseError("union members must be zeta-A specs", pos);
      parts.push_back(detail::parse_qubit_list(item.substr(7)));
      pos = end + 1;
    }
    return zeta_union(n, std::move(parts));
  }
  throw ParseError("unknown ensemble '" + std::string(spec) + "'", 0);
}

/**
 * Splits a comma-separated list of ensemble specs. Bare integers continue
 * the preceding zeta-A qubit list, so "zeta-X,zeta-A:1,2" yields
 * {"zeta-X", "zeta-A:1,2"}.
 */
inline std::vector<std::string> split_ensemble_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    std::string item(text.substr(pos, end - pos));
    const bool numeric = !item.empty() && std::all_of(item.begin(), item.end(), [](char c) { return c >= '0' && c <= '9'; });
    if (numeric && !out.empty() && out.back().find("zeta-A:") != std::string::npos) {
      out.back() += "," + item;
    } else if (!item.empty()) {
      out.push_back(std::move(item));
    } else {
      throw ParseError("empty ensemble name in list", pos);
    }
    pos = end + 1;
  }
  return out;
}

}  // namespace pqst
