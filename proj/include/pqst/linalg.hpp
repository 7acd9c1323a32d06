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
 * Dense complex matrices for registers of at most four qubits.
 *
 * Everything here works on square matrices of dimension 2^n, n in 1..4,
 * stored row-major. Basis index k of an n-qubit register has qubit 1 as its
 * most significant bit, so A (x) B places A on the leading qubits.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pqst/error.hpp"

namespace pqst {

using Complex = std::complex<double>;

inline constexpr unsigned kMaxQubits = 4;
inline constexpr std::size_t kMaxDim = std::size_t{1} << kMaxQubits;

inline bool is_register_dim(std::size_t dim) {
  return dim >= 2 && dim <= kMaxDim && (dim & (dim - 1)) == 0;
}

inline unsigned qubits_for_dim(std::size_t dim) {
  unsigned n = 0;
  while ((std::size_t{1} << n) < dim) ++n;
  return n;
}

class Operator {
 public:
  Operator() = default;

  explicit Operator(std::size_t dim) : dim_(dim), data_(dim * dim) {
    if (!is_register_dim(dim)) {
      throw InvalidArgument("operator dimension " + std::to_string(dim) +
                            " is not 2^n with 1 <= n <= 4");
    }
  }

  Operator(std::size_t dim, std::vector<Complex> entries) : Operator(dim) {
    if (entries.size() != dim * dim) {
      throw InvalidArgument("operator entry count does not match dimension");
    }
    for (const auto& z : entries) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw InvalidArgument("operator entries must be finite");
      }
    }
    data_ = std::move(entries);
  }

  Operator(std::initializer_list<std::initializer_list<Complex>> rows)
      : Operator(rows.size()) {
    std::size_t r = 0;
    for (const auto& row : rows) {
      if (row.size() != dim_) throw InvalidArgument("ragged operator literal");
      std::size_t c = 0;
      for (const auto& z : row) (*this)(r, c++) = z;
      ++r;
    }
  }

  static Operator identity(std::size_t dim) {
    Operator out(dim);
    for (std::size_t i = 0; i < dim; ++i) out(i, i) = 1.0;
    return out;
  }

  static Operator diagonal(std::span<const double> values) {
    Operator out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out(i, i) = values[i];
    return out;
  }

  /// |v><w|
  static Operator outer(std::span<const Complex> v, std::span<const Complex> w) {
    if (v.size() != w.size()) throw InvalidArgument("outer product length mismatch");
    Operator out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < w.size(); ++j) out(i, j) = v[i] * std::conj(w[j]);
    return out;
  }

  std::size_t dim() const noexcept { return dim_; }
  unsigned qubits() const noexcept { return qubits_for_dim(dim_); }
  bool empty() const noexcept { return dim_ == 0; }

  Complex& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * dim_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * dim_ + c];
  }

  std::span<const Complex> entries() const noexcept { return data_; }
  std::span<Complex> entries() noexcept { return data_; }

  std::vector<Complex> column(std::size_t c) const {
    std::vector<Complex> out(dim_);
    for (std::size_t r = 0; r < dim_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  std::vector<Complex> row(std::size_t r) const {
    return {data_.begin() + static_cast<std::ptrdiff_t>(r * dim_),
            data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * dim_)};
  }

  Operator adjoint() const {
    Operator out(dim_);
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t c = 0; c < dim_; ++c) out(c, r) = std::conj((*this)(r, c));
    return out;
  }

  Operator transpose() const {
    Operator out(dim_);
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t c = 0; c < dim_; ++c) out(c, r) = (*this)(r, c);
    return out;
  }

  Complex trace() const noexcept {
    Complex t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
  }

  /// Diagonal part only, off-diagonal entries zeroed.
  Operator diagonal_part() const {
    Operator out(dim_);
    for (std::size_t i = 0; i < dim_; ++i) out(i, i) = (*this)(i, i);
    return out;
  }

  /// (A + A^dagger) / 2
  Operator hermitian_part() const {
    Operator out(dim_);
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t c = 0; c < dim_; ++c)
        out(r, c) = 0.5 * ((*this)(r, c) + std::conj((*this)(c, r)));
    return out;
  }

  Operator& operator+=(const Operator& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Operator& operator-=(const Operator& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Operator& operator*=(Complex s) noexcept {
    for (auto& z : data_) z *= s;
    return *this;
  }

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator*(Operator a, Complex s) { return a *= s; }
  friend Operator operator*(Complex s, Operator a) { return a *= s; }
  friend Operator operator*(double s, Operator a) { return a *= Complex(s); }

  friend Operator operator*(const Operator& a, const Operator& b) {
    a.check_same(b);
    const std::size_t d = a.dim_;
    Operator out(d);
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t k = 0; k < d; ++k) {
        const Complex ark = a(r, k);
        if (ark == Complex(0.0)) continue;
        for (std::size_t c = 0; c < d; ++c) out(r, c) += ark * b(k, c);
      }
    return out;
  }

  std::vector<Complex> apply(std::span<const Complex> v) const {
    if (v.size() != dim_) throw InvalidArgument("vector length does not match operator");
    std::vector<Complex> out(dim_);
    for (std::size_t r = 0; r < dim_; ++r) {
      Complex acc = 0.0;
      for (std::size_t c = 0; c < dim_; ++c) acc += (*this)(r, c) * v[c];
      out[r] = acc;
    }
    return out;
  }

  bool operator==(const Operator&) const = default;

 private:
  void check_same(const Operator& o) const {
    if (o.dim_ != dim_) {
      throw InvalidArgument("operator dimension mismatch: " + std::to_string(dim_) +
                            " vs " + std::to_string(o.dim_));
    }
  }

  std::size_t dim_ = 0;
  std::vector<Complex> data_;
};

/// Kronecker product a (x) b; a occupies the more significant qubits.
inline Operator tensor_product(const Operator& a, const Operator& b) {
  const std::size_t da = a.dim(), db = b.dim();
  if (da * db > kMaxDim) {
    throw InvalidArgument("tensor product exceeds the " + std::to_string(kMaxQubits) +
                          "-qubit register limit");
  }
  Operator out(da * db);
  for (std::size_t r1 = 0; r1 < da; ++r1)
    for (std::size_t c1 = 0; c1 < da; ++c1) {
      const Complex s = a(r1, c1);
      if (s == Complex(0.0)) continue;
      for (std::size_t r2 = 0; r2 < db; ++r2)
        for (std::size_t c2 = 0; c2 < db; ++c2) out(r1 * db + r2, c1 * db + c2) = s * b(r2, c2);
    }
  return out;
}

inline Operator tensor_product(std::span<const Operator> factors) {
  if (factors.empty()) throw InvalidArgument("tensor product of no factors");
  Operator out = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) out = tensor_product(out, factors[i]);
  return out;
}

inline double max_abs_diff(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("operator dimension mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.entries().size(); ++i)
    m = std::max(m, std::abs(a.entries()[i] - b.entries()[i]));
  return m;
}

inline double max_abs(const Operator& a) {
  double m = 0.0;
  for (const auto& z : a.entries()) m = std::max(m, std::abs(z));
  return m;
}

inline double frobenius_norm(const Operator& a) {
  double s = 0.0;
  for (const auto& z : a.entries()) s += std::norm(z);
  return std::sqrt(s);
}

/// max |A - A^dagger| entrywise.
inline double hermiticity_residual(const Operator& a) {
  double m = 0.0;
  for (std::size_t r = 0; r < a.dim(); ++r)
    for (std::size_t c = r; c < a.dim(); ++c)
      m = std::max(m, std::abs(a(r, c) - std::conj(a(c, r))));
  return m;
}

/// max |U^dagger U - 1| entrywise.
inline double unitarity_residual(const Operator& u) {
  return max_abs_diff(u.adjoint() * u, Operator::identity(u.dim()));
}

/// Tr(A B) without forming the product.
inline Complex trace_of_product(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("operator dimension mismatch");
  Complex t = 0.0;
  for (std::size_t r = 0; r < a.dim(); ++r)
    for (std::size_t k = 0; k < a.dim(); ++k) t += a(r, k) * b(k, r);
  return t;
}

struct EigenSystem {
  std::vector<double> values;  // ascending
  Operator vectors;            // column i pairs with values[i]
};

/**
 * Hermitian eigendecomposition by cyclic complex Jacobi rotations.
 *
 * The input is symmetrised first. Sweeps stop once the off-diagonal
 * Frobenius norm drops below 1e-12 (scaled by the matrix norm when that
 * exceeds one).
 */
inline EigenSystem eigh(const Operator& input) {
  Operator a = input.hermitian_part();
  const std::size_t d = a.dim();
  Operator v = Operator::identity(d);

  const double scale = std::max(1.0, frobenius_norm(a));
  const double tol = 1e-12 * scale;
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c)
        if (r != c) s += std::norm(a(r, c));
    return std::sqrt(s);
  };

  constexpr int kMaxSweeps = 100;
  int sweep = 0;
  for (; sweep < kMaxSweeps && off_norm() >= tol; ++sweep) {
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const Complex apq = a(p, q);
        const double r = std::abs(apq);
        if (r < 1e-300) continue;
        const Complex phase = apq / r;
        const double app = a(p, p).real(), aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * r);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // Column rotation G: g_pp = c, g_pq = s, g_qp = -s conj(phase), g_qq = c conj(phase).
        const Complex gpp = c, gpq = s, gqp = -s * std::conj(phase), gqq = c * std::conj(phase);
        for (std::size_t k = 0; k < d; ++k) {
          const Complex akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * gpp + akq * gqp;
          a(k, q) = akp * gpq + akq * gqq;
          const Complex vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * gpp + vkq * gqp;
          v(k, q) = vkp * gpq + vkq * gqq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const Complex apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(gpp) * apk + std::conj(gqp) * aqk;
          a(q, k) = std::conj(gpq) * apk + std::conj(gqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
      }
    }
  }
  if (off_norm() >= tol) throw NumericalError("Jacobi eigensolver did not converge");

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
  EigenSystem out{std::vector<double>(d), Operator(d)};
  for (std::size_t i = 0; i < d; ++i) {
    out.values[i] = a(order[i], order[i]).real();
    for (std::size_t k = 0; k < d; ++k) out.vectors(k, i) = v(k, order[i]);
  }
  return out;
}

inline std::vector<double> eigenvalues(const Operator& a) { return eigh(a).values; }

/// Largest |eigenvalue| of a Hermitian operator.
inline double spectral_norm(const Operator& hermitian) {
  const auto ev = eigenvalues(hermitian);
  return std::max(std::abs(ev.front()), std::abs(ev.back()));
}

/// f applied to the spectrum: V diag(f(lambda)) V^dagger.
template <typename F>
Operator spectral_map(const EigenSystem& es, F&& f) {
  const std::size_t d = es.values.size();
  Operator out(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double fi = f(es.values[i]);
    if (fi == 0.0) continue;
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c)
        out(r, c) += fi * es.vectors(r, i) * std::conj(es.vectors(c, i));
  }
  return out;
}

namespace gates {

inline Operator identity() { return Operator::identity(2); }
inline Operator pauli_x() { return {{0.0, 1.0}, {1.0, 0.0}}; }
inline Operator pauli_y() { return {{0.0, Complex(0, -1)}, {Complex(0, 1), 0.0}}; }
inline Operator pauli_z() { return {{1.0, 0.0}, {0.0, -1.0}}; }
inline Operator hadamard() {
  const double h = 1.0 / std::sqrt(2.0);
  return {{h, h}, {h, -h}};
}
inline Operator phase_s() { return {{1.0, 0.0}, {0.0, Complex(0, 1)}}; }
/// H * S, the matrix product (S acts first).
inline Operator hs() { return hadamard() * phase_s(); }
/// H * S * H, maps Y to Z under conjugation.
inline Operator hsh() { return hadamard() * phase_s() * hadamard(); }
/// Control on the more significant qubit.
inline Operator cnot() {
  return {{1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 1.0}, {0.0, 0.0, 1.0, 0.0}};
}

/// Single-qubit gate u on qubit q (1-based) of an n-qubit register.
inline Operator on_qubit(const Operator& u, unsigned q, unsigned n) {
  Operator out = q == 1 ? u : identity();
  for (unsigned j = 2; j <= n; ++j) out = tensor_product(out, j == q ? u : identity());
  return out;
}

}  // namespace gates

}  // namespace pqst
