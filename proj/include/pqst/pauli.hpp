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
 * Pauli-string observables and the matrix-element classes they touch.
 *
 * A matrix element (i, j) is "A-active" when the bitstrings i and j differ
 * exactly on the qubit set A. A Pauli word with X or Y on exactly the
 * qubits in A only has nonzero entries on A-active elements, which is how
 * observables are matched against partial estimators.
 */
#pragma once

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pqst/error.hpp"
#include "pqst/linalg.hpp"
#include "pqst/state.hpp"

namespace pqst {

enum class Pauli : std::uint8_t { I, X, Y, Z };

inline char to_char(Pauli p) { return "IXYZ"[static_cast<int>(p)]; }

inline Operator pauli_matrix(Pauli p) {
  switch (p) {
    case Pauli::I: return gates::identity();
    case Pauli::X: return gates::pauli_x();
    case Pauli::Y: return gates::pauli_y();
    case Pauli::Z: return gates::pauli_z();
  }
  return gates::identity();
}

/// Hermitian Pauli i^{|x&z|} X^x Z^z with masks in basis-index layout.
inline Operator pauli_from_xz(unsigned n, std::uint32_t x, std::uint32_t z) {
  const std::size_t d = std::size_t{1} << n;
  Operator out(d);
  static constexpr Complex kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const Complex phase = kIPow[std::popcount(x & z) % 4];
  for (std::uint32_t j = 0; j < d; ++j) {
    const double sign = (std::popcount(z & j) % 2) ? -1.0 : 1.0;
    out(j ^ x, j) = phase * sign;
  }
  return out;
}

/// Set of qubits (1-based) on which a matrix element's row and column differ.
struct ActivityPattern {
  unsigned n = 0;
  std::uint32_t mask = 0;  // basis-index layout: qubit q is bit n - q

  static ActivityPattern from_qubits(unsigned n, std::span<const unsigned> qubits) {
    return {n, detail::qubit_mask(n, qubits)};
  }

  std::vector<unsigned> qubits() const {
    std::vector<unsigned> out;
    for (unsigned q = 1; q <= n; ++q)
      if (mask & (1U << (n - q))) out.push_back(q);
    return out;
  }

  unsigned order() const { return static_cast<unsigned>(std::popcount(mask)); }
  bool is_diagonal() const { return mask == 0; }
  bool is_full() const { return mask == (1U << n) - 1; }
  bool matches(std::size_t i, std::size_t j) const { return ((i ^ j) & ((1U << n) - 1)) == mask; }

  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for (unsigned q : qubits()) {
      if (!first) s += ",";
      s += std::to_string(q);
      first = false;
    }
    return s + "}";
  }

  auto operator<=>(const ActivityPattern&) const = default;
};

inline ActivityPattern activity_of_element(const Bitstring& i, const Bitstring& j) {
  if (i.n != j.n) throw InvalidArgument("bitstrings have different lengths");
  return {i.n, i.index ^ j.index};
}

/// All 2^n patterns of an n-qubit register, ordered by mask.
inline std::vector<ActivityPattern> all_patterns(unsigned n) {
  std::vector<ActivityPattern> out;
  for (std::uint32_t m = 0; m < (1U << n); ++m) out.push_back({n, m});
  return out;
}

struct PauliString {
  std::vector<Pauli> word;
  double coefficient = 1.0;

  unsigned qubits() const { return static_cast<unsigned>(word.size()); }

  std::uint32_t x_mask() const {
    std::uint32_t m = 0;
    const unsigned n = qubits();
    for (unsigned q = 1; q <= n; ++q)
      if (word[q - 1] == Pauli::X || word[q - 1] == Pauli::Y) m |= 1U << (n - q);
    return m;
  }

  std::uint32_t z_mask() const {
    std::uint32_t m = 0;
    const unsigned n = qubits();
    for (unsigned q = 1; q <= n; ++q)
      if (word[q - 1] == Pauli::Z || word[q - 1] == Pauli::Y) m |= 1U << (n - q);
    return m;
  }

  ActivityPattern activity() const { return {qubits(), x_mask()}; }

  /// Word lies entirely in {I,Z} or entirely in {X,Y}.
  bool is_x_structured() const {
    const std::uint32_t x = x_mask();
    return x == 0 || x == (1U << qubits()) - 1;
  }

  std::string word_string() const {
    std::string s;
    for (Pauli p : word) s.push_back(to_char(p));
    return s;
  }
};

/// coefficient * (P_1 (x) ... (x) P_n)
inline Operator pauli_matrix(const PauliString& ps) {
  if (ps.word.empty()) throw InvalidArgument("empty Pauli word");
  if (!std::isfinite(ps.coefficient)) throw InvalidArgument("Pauli coefficient must be finite");
  Operator out = pauli_matrix(ps.word.front());
  for (std::size_t i = 1; i < ps.word.size(); ++i) out = tensor_product(out, pauli_matrix(ps.word[i]));
  out *= Complex(ps.coefficient);
  return out;
}

/// Real linear combination of Pauli strings on a fixed register.
class Observable {
 public:
  Observable() = default;

  explicit Observable(std::vector<PauliString> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw InvalidArgument("observable has no terms");
    n_ = terms_.front().qubits();
    if (n_ < 1 || n_ > kMaxQubits) throw InvalidArgument("observable register size out of range");
    matrix_ = Operator(std::size_t{1} << n_);
    for (const auto& t : terms_) {
      if (t.qubits() != n_) throw InvalidArgument("Pauli words of different lengths in one observable");
      matrix_ += pauli_matrix(t);
    }
  }

  unsigned qubits() const noexcept { return n_; }
  std::span<const PauliString> terms() const noexcept { return terms_; }
  const Operator& matrix() const noexcept { return matrix_; }

  /// Terms whose activity pattern satisfies pred, as a new observable.
  template <typename Pred>
  std::optional<Observable> filter(Pred&& pred) const {
    std::vector<PauliString> kept;
    for (const auto& t : terms_)
      if (pred(t)) kept.push_back(t);
    if (kept.empty()) return std::nullopt;
    return Observable(std::move(kept));
  }

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (i) s += "; ";
      char buf[64];
      auto res = std::to_chars(buf, buf + sizeof buf, terms_[i].coefficient);
      s.append(buf, res.ptr);
      s += " " + terms_[i].word_string();
    }
    return s;
  }

 private:
  unsigned n_ = 0;
  std::vector<PauliString> terms_;
  Operator matrix_;
};

/**
 * Parses `coeff WORD (';' coeff WORD)*`, e.g. "8 ZZ; 2 XY; -10 IZ".
 * Letters are I, X, Y, Z ('1' is accepted for I). If expected_qubits is
 * nonzero every word must have that length.
 */
inline Observable parse_observable(std::string_view text, unsigned expected_qubits = 0) {
  std::vector<PauliString> terms;
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  unsigned n = expected_qubits;
  while (true) {
    skip_ws();
    const std::size_t coeff_start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) && text[pos] != ';') ++pos;
    if (pos == coeff_start) throw ParseError("expected a coefficient", coeff_start);
    double coeff = 0.0;
    std::string_view ctext = text.substr(coeff_start, pos - coeff_start);
    if (!ctext.empty() && ctext.front() == '+') ctext.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(ctext.data(), ctext.data() + ctext.size(), coeff);
    if (ec != std::errc() || ptr != ctext.data() + ctext.size() || !std::isfinite(coeff)) {
      throw ParseError("malformed coefficient '" + std::string(text.substr(coeff_start, pos - coeff_start)) + "'",
                       coeff_start);
    }
    skip_ws();
    const std::size_t word_start = pos;
    PauliString ps{{}, coeff};
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) && text[pos] != ';') {
      switch (text[pos]) {
        case 'I': case 'i': case '1': ps.word.push_back(Pauli::I); break;
        case 'X': case 'x': ps.word.push_back(Pauli::X); break;
        case 'Y': case 'y': ps.word.push_back(Pauli::Y); break;
        case 'Z': case 'z': ps.word.push_back(Pauli::Z); break;
        default: throw ParseError(std::string("invalid Pauli letter '") + text[pos] + "'", pos);
      }
      ++pos;
    }
    if (ps.word.empty()) throw ParseError("expected a Pauli word", word_start);
    if (ps.word.size() > kMaxQubits) throw ParseError("Pauli word longer than 4 qubits", word_start);
    if (n == 0) n = ps.qubits();
    if (ps.qubits() != n) {
      throw ParseError("Pauli word '" + ps.word_string() + "' has length " + std::to_string(ps.qubits()) +
                           ", expected " + std::to_string(n),
                       word_start);
    }
    terms.push_back(std::move(ps));
    skip_ws();
    if (pos == text.size()) break;
    if (text[pos] != ';') throw ParseError("expected ';' between terms", pos);
    ++pos;
    skip_ws();
    if (pos == text.size()) break;  // trailing separator
  }
  if (terms.empty()) throw ParseError("empty observable", 0);
  return Observable(std::move(terms));
}

/// Union of the term-wise activity patterns, sorted by mask.
inline std::vector<ActivityPattern> activity_support(const Observable& obs) {
  std::set<ActivityPattern> s;
  for (const auto& t : obs.terms()) s.insert(t.activity());
  return {s.begin(), s.end()};
}

inline bool is_x_structured(const Observable& obs) {
  return std::all_of(obs.terms().begin(), obs.terms().end(),
                     [](const PauliString& t) { return t.is_x_structured(); });
}

/// Support only on the diagonal and the anti-diagonal.
inline bool is_x_structured(const Operator& m, double tol = 1e-14) {
  const std::size_t d = m.dim();
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c)
      if (r != c && r + c != d - 1 && std::abs(m(r, c)) > tol) return false;
  return true;
}

enum class LocalRotation : std::uint8_t { Identity, H, HSH };

inline Operator rotation_matrix(LocalRotation r) {
  switch (r) {
    case LocalRotation::Identity: return gates::identity();
    case LocalRotation::H: return gates::hadamard();
    case LocalRotation::HSH: return gates::hsh();
  }
  return gates::identity();
}

inline const char* to_string(LocalRotation r) {
  switch (r) {
    case LocalRotation::Identity: return "1";
    case LocalRotation::H: return "H";
    case LocalRotation::HSH: return "HSH";
  }
  return "?";
}

/// R P R^dagger for one qubit, as (letter, sign).
inline std::pair<Pauli, double> conjugate_letter(LocalRotation r, Pauli p) {
  switch (r) {
    case LocalRotation::Identity: return {p, 1.0};
    case LocalRotation::H:
      if (p == Pauli::X) return {Pauli::Z, 1.0};
      if (p == Pauli::Z) return {Pauli::X, 1.0};
      if (p == Pauli::Y) return {Pauli::Y, -1.0};
      return {p, 1.0};
    case LocalRotation::HSH:
      if (p == Pauli::Y) return {Pauli::Z, 1.0};
      if (p == Pauli::Z) return {Pauli::Y, -1.0};
      return {p, 1.0};
  }
  return {p, 1.0};
}

struct XRotation {
  std::vector<LocalRotation> per_qubit;
  Operator unitary;     // U with U O U^dagger = rotated
  Observable rotated;   // X-structured
};

namespace detail {

inline Observable rotate_terms(const Observable& obs, std::span<const LocalRotation> rot) {
  std::vector<PauliString> out;
  for (const auto& t : obs.terms()) {
    PauliString r{t.word, t.coefficient};
    for (std::size_t q = 0; q < r.word.size(); ++q) {
      auto [letter, sign] = conjugate_letter(rot[q], r.word[q]);
      r.word[q] = letter;
      r.coefficient *= sign;
    }
    out.push_back(std::move(r));
  }
  return Observable(std::move(out));
}

inline XRotation make_rotation(const Observable& obs, std::vector<LocalRotation> rot) {
  std::vector<Operator> factors;
  for (auto r : rot) factors.push_back(rotation_matrix(r));
  Observable rotated = rotate_terms(obs, rot);
  return {std::move(rot), tensor_product(factors), std::move(rotated)};
}

}  // namespace detail

/**
 * Finds a product of local rotations from {1, H, HSH} taking obs to an
 * X-structured observable. Already X-structured input gets the identity.
 * Otherwise each qubit whose non-identity letters agree across all terms is
 * rotated to Z (X by H, Y by HSH); if that leaves some term unstructured,
 * all 3^n choices are searched, fewest non-identity factors first. Returns
 * nullopt when no choice structures every term simultaneously.
 */
inline std::optional<XRotation> rotate_to_x_structure(const Observable& obs) {
  const unsigned n = obs.qubits();
  std::vector<LocalRotation> rot(n, LocalRotation::Identity);
  if (is_x_structured(obs)) return detail::make_rotation(obs, rot);

  bool consistent = true;
  for (unsigned q = 0; q < n && consistent; ++q) {
    std::optional<Pauli> letter;
    for (const auto& t : obs.terms()) {
      const Pauli p = t.word[q];
      if (p == Pauli::I) continue;
      if (letter && *letter != p) {
        consistent = false;
        break;
      }
      letter = p;
    }
    if (letter == Pauli::X) rot[q] = LocalRotation::H;
    if (letter == Pauli::Y) rot[q] = LocalRotation::HSH;
  }
  if (consistent && is_x_structured(detail::rotate_terms(obs, rot))) return detail::make_rotation(obs, rot);

  std::size_t total = 1;
  for (unsigned q = 0; q < n; ++q) total *= 3;
  std::optional<std::vector<LocalRotation>> best;
  unsigned best_weight = n + 1;
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<LocalRotation> cand(n);
    std::size_t c = code;
    unsigned weight = 0;
    for (unsigned q = n; q-- > 0;) {
      cand[q] = static_cast<LocalRotation>(c % 3);
      c /= 3;
      weight += cand[q] != LocalRotation::Identity;
    }
    if (weight >= best_weight) continue;
    if (is_x_structured(detail::rotate_terms(obs, cand))) {
      best = cand;
      best_weight = weight;
    }
  }
  if (!best) return std::nullopt;
  return detail::make_rotation(obs, *best);
}

struct ExpectationResult {
  double value = 0.0;
  double imag_residual = 0.0;
};

/// Tr(O M); the imaginary part is returned separately.
inline ExpectationResult expectation_detail(const Observable& obs, const Operator& m) {
  if (obs.matrix().dim() != m.dim()) throw InvalidArgument("observable and operator dimensions differ");
  const Complex t = trace_of_product(obs.matrix(), m);
  return {t.real(), std::abs(t.imag())};
}

inline double expectation(const Observable& obs, const Operator& m) { return expectation_detail(obs, m).value; }

}  // namespace pqst
