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

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "pqst/error.hpp"
#include "pqst/linalg.hpp"
#include "pqst/random.hpp"

namespace pqst {

/// Acceptance bounds used when a DensityMatrix is constructed.
struct StateTolerance {
  double hermiticity = 1e-10;
  double trace = 1e-10;
  double min_eigenvalue = -1e-9;

  /// For matrices transcribed at four printed decimals.
  static StateTolerance printed() { return {1e-10, 5e-3, -5e-3}; }
};

/// Hermitian, unit-trace, positive semidefinite operator (validated).
class DensityMatrix {
 public:
  DensityMatrix() = default;

  explicit DensityMatrix(Operator op, StateTolerance tol = {}) : op_(std::move(op)) {
    const double herm = hermiticity_residual(op_);
    if (herm > tol.hermiticity) {
      throw NumericalError("density matrix is not Hermitian (residual " + fmt(herm) + ")");
    }
    op_ = op_.hermitian_part();
    trace_residual_ = std::abs(op_.trace() - Complex(1.0));
    if (trace_residual_ > tol.trace) {
      throw NumericalError("density matrix trace differs from 1 by " + fmt(trace_residual_));
    }
    min_eigenvalue_ = eigenvalues(op_).front();
    if (min_eigenvalue_ < tol.min_eigenvalue) {
      throw NumericalError("density matrix has negative eigenvalue " + fmt(min_eigenvalue_));
    }
  }

  static DensityMatrix pure(std::span<const Complex> amplitudes) {
    double norm = 0.0;
    for (const auto& a : amplitudes) norm += std::norm(a);
    if (norm <= 0.0) throw InvalidArgument("zero state vector");
    Operator op = Operator::outer(amplitudes, amplitudes);
    op *= Complex(1.0 / norm);
    return DensityMatrix(std::move(op));
  }

  static DensityMatrix basis_state(unsigned n, std::size_t index) {
    Operator op(std::size_t{1} << n);
    if (index >= op.dim()) throw InvalidArgument("basis index out of range");
    op(index, index) = 1.0;
    return DensityMatrix(std::move(op));
  }

  static DensityMatrix maximally_mixed(unsigned n) {
    const std::size_t d = std::size_t{1} << n;
    return DensityMatrix(Operator::identity(d) * Complex(1.0 / static_cast<double>(d)));
  }

  const Operator& op() const noexcept { return op_; }
  std::size_t dim() const noexcept { return op_.dim(); }
  unsigned qubits() const noexcept { return op_.qubits(); }
  Complex operator()(std::size_t r, std::size_t c) const noexcept { return op_(r, c); }

  double trace_residual() const noexcept { return trace_residual_; }
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  static std::string fmt(double x) {
    std::ostringstream os;
    os.precision(3);
    os << x;
    return os.str();
  }

  Operator op_;
  double trace_residual_ = 0.0;
  double min_eigenvalue_ = 0.0;
};

/// Computational-basis label; bits[0] is qubit 1, the most significant bit.
struct Bitstring {
  unsigned n = 0;
  std::uint32_t index = 0;

  static Bitstring from_bits(std::span<const int> bits) {
    Bitstring b{static_cast<unsigned>(bits.size()), 0};
    for (int bit : bits) {
      if (bit != 0 && bit != 1) throw InvalidArgument("bit values must be 0 or 1");
      b.index = (b.index << 1) | static_cast<std::uint32_t>(bit);
    }
    return b;
  }

  int bit(unsigned qubit) const { return static_cast<int>((index >> (n - qubit)) & 1U); }

  std::vector<int> bits() const {
    std::vector<int> out(n);
    for (unsigned q = 1; q <= n; ++q) out[q - 1] = bit(q);
    return out;
  }

  std::string to_string() const {
    std::string s;
    for (unsigned q = 1; q <= n; ++q) s.push_back(bit(q) ? '1' : '0');
    return s;
  }

  bool operator==(const Bitstring&) const = default;
};

/// U rho U^dagger. Rejects u whose unitarity residual exceeds 1e-10.
inline DensityMatrix conjugate_by_unitary(const DensityMatrix& rho, const Operator& u) {
  if (u.dim() != rho.dim()) throw InvalidArgument("unitary and state dimensions differ");
  const double res = unitarity_residual(u);
  if (res > 1e-10) {
    std::ostringstream os;
    os << "operator is not unitary (residual " << res << ")";
    throw NumericalError(os.str());
  }
  return DensityMatrix(u * rho.op() * u.adjoint(),
                       StateTolerance{1e-9, 1e-9, std::min(-1e-9, rho.min_eigenvalue() - 1e-9)});
}

/// Born distribution of a computational-basis measurement.
inline std::vector<double> born_probabilities(const Operator& rho) {
  std::vector<double> p(rho.dim());
  double total = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    double v = rho(k, k).real();
    if (v < 0.0 && v >= -1e-10) v = 0.0;
    p[k] = v;
    total += v;
  }
  if (total <= 0.0) throw NumericalError("Born distribution has no mass");
  for (auto& v : p) v /= total;
  return p;
}

inline std::vector<double> born_probabilities(const DensityMatrix& rho) {
  return born_probabilities(rho.op());
}

/// Draws index k with probability probs[k].
inline Bitstring sample_outcome(std::span<const double> probs, RandomStream& rng) {
  if (!is_register_dim(probs.size())) throw InvalidArgument("probability vector length must be 2^n");
  double total = 0.0;
  for (double v : probs) {
    if (v < -1e-10) throw InvalidArgument("negative probability in Born distribution");
    total += std::max(v, 0.0);
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("probabilities do not sum to 1");
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    last = k;
    acc += probs[k];
    if (u < acc) return {qubits_for_dim(probs.size()), static_cast<std::uint32_t>(k)};
  }
  return {qubits_for_dim(probs.size()), static_cast<std::uint32_t>(last)};
}

struct FidelityResult {
  double value = 0.0;
  /// Total weight of negative eigenvalues clamped from sqrt(rho) sigma sqrt(rho).
  double clamped_mass = 0.0;
};

/**
 * Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
 *
 * sigma only needs to be Hermitian: shadow estimates can carry negative
 * eigenvalues, which are clamped to zero and reported in clamped_mass.
 */
inline FidelityResult fidelity_detail(const Operator& rho, const Operator& sigma) {
  if (rho.dim() != sigma.dim()) throw InvalidArgument("fidelity: dimension mismatch");
  const Operator sqrt_rho = spectral_map(eigh(rho), [](double x) { return std::sqrt(std::max(x, 0.0)); });
  const auto inner = eigh(sqrt_rho * sigma.hermitian_part() * sqrt_rho);
  FidelityResult out;
  double root_sum = 0.0;
  for (double v : inner.values) {
    if (v < 0.0) {
      out.clamped_mass += -v;
    } else {
      root_sum += std::sqrt(v);
    }
  }
  out.value = root_sum * root_sum;
  return out;
}

inline double fidelity(const DensityMatrix& rho, const Operator& sigma) {
  return fidelity_detail(rho.op(), sigma).value;
}

inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return fidelity_detail(rho.op(), sigma.op()).value;
}

inline double purity(const DensityMatrix& rho) { return trace_of_product(rho.op(), rho.op()).real(); }

namespace detail {

/// Index-layout mask for a 1-based qubit list.
inline std::uint32_t qubit_mask(unsigned n, std::span<const unsigned> qubits) {
  std::uint32_t m = 0;
  for (unsigned q : qubits) {
    if (q < 1 || q > n) throw InvalidArgument("qubit label out of range");
    m |= 1U << (n - q);
  }
  return m;
}

/// Scatters the bits of `packed` into the set positions of `mask`, low to high.
inline std::uint32_t deposit(std::uint32_t packed, std::uint32_t mask) {
  std::uint32_t out = 0;
  for (std::uint32_t bit = 1; mask != 0; bit <<= 1) {
    const std::uint32_t low = mask & (~mask + 1);
    if (packed & bit) out |= low;
    mask &= mask - 1;
  }
  return out;
}

}  // namespace detail

/// Reduced operator on the kept qubits (1-based), tracing out the rest.
inline Operator partial_trace_keep(const Operator& rho, std::span<const unsigned> keep) {
  const unsigned n = rho.qubits();
  const std::uint32_t kmask = detail::qubit_mask(n, keep);
  const std::uint32_t emask = ((1U << n) - 1) & ~kmask;
  const unsigned nk = static_cast<unsigned>(std::popcount(kmask));
  const unsigned ne = n - nk;
  if (nk == 0) throw InvalidArgument("partial trace must keep at least one qubit");
  Operator out(std::size_t{1} << nk);
  for (std::uint32_t i = 0; i < (1U << nk); ++i)
    for (std::uint32_t j = 0; j < (1U << nk); ++j) {
      Complex acc = 0.0;
      const std::uint32_t bi = detail::deposit(i, kmask), bj = detail::deposit(j, kmask);
      for (std::uint32_t e = 0; e < (1U << ne); ++e) {
        const std::uint32_t be = detail::deposit(e, emask);
        acc += rho(bi | be, bj | be);
      }
      out(i, j) = acc;
    }
  return out;
}

/// Transpose on the listed qubits only.
inline Operator partial_transpose(const Operator& rho, std::span<const unsigned> qubits) {
  const std::uint32_t m = detail::qubit_mask(rho.qubits(), qubits);
  Operator out(rho.dim());
  for (std::uint32_t i = 0; i < rho.dim(); ++i)
    for (std::uint32_t j = 0; j < rho.dim(); ++j) {
      const std::uint32_t swap = (i ^ j) & m;
      out(i ^ swap, j ^ swap) = rho(i, j);
    }
  return out;
}

/// Von Neumann entropy in bits.
inline double von_neumann_entropy(const Operator& rho) {
  double s = 0.0;
  for (double v : eigenvalues(rho))
    if (v > 1e-15) s -= v * std::log2(v);
  return s;
}

/// log2 of the trace norm of the partial transpose.
inline double log_negativity(const Operator& rho, std::span<const unsigned> partition) {
  double norm = 0.0;
  for (double v : eigenvalues(partial_transpose(rho, partition))) norm += std::abs(v);
  return std::log2(norm);
}

/**
 * Entanglement across (partition | rest): entanglement entropy of the
 * reduced state for pure inputs (purity > 1 - 1e-8), logarithmic negativity
 * otherwise. Base-2 logarithms, so a Bell pair scores 1.
 */
inline double entanglement_measure(const DensityMatrix& rho, std::span<const unsigned> partition) {
  const unsigned n = rho.qubits();
  if (partition.empty() || partition.size() >= n) {
    throw InvalidArgument("partition must be a proper nonempty qubit subset");
  }
  if (purity(rho) > 1.0 - 1e-8) return von_neumann_entropy(partial_trace_keep(rho.op(), partition));
  return log_negativity(rho.op(), partition);
}

/// Standard normal draw (Box-Muller on the stream's portable uniforms).
inline double standard_normal(RandomStream& rng) {
  double u1 = rng.uniform();
  while (u1 <= 0.0) u1 = rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

/// Full-rank random state G G^dagger / Tr, G a complex Ginibre matrix.
inline DensityMatrix random_density_matrix(unsigned n, RandomStream& rng) {
  if (n < 1 || n > kMaxQubits) throw InvalidArgument("register size must be between 1 and 4 qubits");
  Operator g(std::size_t{1} << n);
  for (auto& z : g.entries()) z = Complex(standard_normal(rng), standard_normal(rng));
  Operator rho = g * g.adjoint();
  rho *= Complex(1.0 / rho.trace().real());
  return DensityMatrix(rho.hermitian_part());
}

/// Random state supported on the diagonal and anti-diagonal. Each {i, ~i}
/// block is a principal submatrix of a random state, so positivity holds.
inline DensityMatrix random_x_state(unsigned n, RandomStream& rng) {
  const Operator full = random_density_matrix(n, rng).op();
  const std::size_t d = full.dim();
  Operator x(d);
  for (std::size_t i = 0; i < d; ++i) {
    x(i, i) = full(i, i);
    x(i, d - 1 - i) = full(i, d - 1 - i);
  }
  return DensityMatrix(std::move(x));
}

}  // namespace pqst
