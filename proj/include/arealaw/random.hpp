#pragma once

// Seeded random operators for ensembles and tests.
//
// Only the raw mt19937_64 bit stream is used (its output sequence is fixed by
// the standard), so a seed reproduces the same matrices on every platform.

#include "arealaw/linalg.hpp"

#include <cstdint>
#include <random>

namespace arealaw {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  Complex complex_uniform() { return {uniform(-1.0, 1.0), uniform(-1.0, 1.0)}; }

 private:
  std::mt19937_64 engine_;
};

inline ComplexMatrix random_matrix(Index rows, Index cols, Rng& rng) {
  ComplexMatrix m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = rng.complex_uniform();
  return m;
}

/// Hermitian with entries of modulus ~scale.
inline ComplexMatrix random_hermitian(Index n, Rng& rng, double scale = 1.0) {
  const ComplexMatrix g = random_matrix(n, n, rng);
  return 0.5 * scale * (g + g.adjoint());
}

/// Real symmetric variant, for time-reversal-symmetric models.
inline ComplexMatrix random_real_symmetric(Index n, Rng& rng, double scale = 1.0) {
  ComplexMatrix m(n, n);
  for (Index r = 0; r < n; ++r)
    for (Index c = r; c < n; ++c) {
      const double v = scale * rng.uniform(-1.0, 1.0);
      m(r, c) = v;
      m(c, r) = v;
    }
  return m;
}

inline ComplexVector random_unit_vector(Index n, Rng& rng) {
  ComplexVector v(n);
  for (Index k = 0; k < n; ++k) v(k) = rng.complex_uniform();
  return v / v.norm();
}

inline ComplexMatrix random_unitary(Index n, Rng& rng) {
  return matexp_hermitian_generator(random_hermitian(n, rng, 3.0), 1.0);
}

/// Full-rank density matrix G G^dagger / Tr.
inline ComplexMatrix random_density_matrix(Index n, Rng& rng) {
  const ComplexMatrix g = random_matrix(n, n, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace();
  return 0.5 * (rho + rho.adjoint());
}

}  // namespace arealaw
