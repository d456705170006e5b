#pragma once

// Exact time evolution of the composite system and its reduction to A.

#include "arealaw/linalg.hpp"
#include "arealaw/model.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace arealaw {

/// Density matrix with subsystem metadata. After reduction dim_e == 1.
struct DensityMatrix {
  ComplexMatrix mat;
  Index dim_a = 1;
  Index dim_e = 1;

  struct Diagnostics {
    double hermitian_dev = 0.0;
    double trace_dev = 0.0;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
  };

  Diagnostics diagnostics() const {
    Diagnostics d;
    d.hermitian_dev = hermitian_asymmetry(mat);
    d.trace_dev = std::abs(mat.trace() - Complex{1.0, 0.0});
    const RealVector ev = hermitian_eig(mat, 1e-10).values;
    d.min_eigenvalue = ev.minCoeff();
    d.max_eigenvalue = ev.maxCoeff();
    return d;
  }

  /// Hermitian, unit trace and PSD, all within 1e-10.
  bool valid(double tol = 1e-10) const {
    if (hermitian_asymmetry(mat) > tol) return false;
    const Diagnostics d = diagnostics();
    return d.trace_dev <= tol && d.min_eigenvalue >= -tol;
  }

  double purity() const { return (mat * mat).trace().real(); }
};

struct TimeGrid {
  std::vector<double> times;

  /// `steps` points uniformly spaced on [0, t_max].
  static TimeGrid uniform(double t_max, std::size_t steps) {
    if (!(t_max > 0.0) || steps < 2) {
      throw std::invalid_argument("TimeGrid::uniform: need t_max > 0 and steps >= 2");
    }
    TimeGrid g;
    g.times.resize(steps);
    for (std::size_t k = 0; k < steps; ++k) {
      g.times[k] = t_max * static_cast<double>(k) / static_cast<double>(steps - 1);
    }
    return g;
  }

  void validate() const {
    if (times.empty()) throw std::invalid_argument("TimeGrid: empty grid");
    if (times.front() != 0.0) throw std::invalid_argument("TimeGrid: grid must start at 0");
    for (std::size_t k = 1; k < times.size(); ++k) {
      if (!(times[k] > times[k - 1])) {
        throw std::invalid_argument("TimeGrid: grid must be strictly increasing");
      }
    }
  }
};

/// U(t) rho(0) U(t)^dagger for the total Hamiltonian. Accepts both initial
/// kinds; the env-weighted kind starts from |c><c| (x) d.
inline DensityMatrix rho_full(const BipartiteSystem& sys, const InitialState& init,
                              double t) {
  sys.validate();
  init.validate(sys.dim_a, sys.dim_e);
  const ComplexMatrix u = matexp_hermitian_generator(total_hamiltonian(sys), t);
  if (init.kind == InitialState::Kind::pure_amplitudes) {
    const ComplexVector psi = u * init.amplitudes;
    return {psi * psi.adjoint(), sys.dim_a, sys.dim_e};
  }
  return {u * init.global_density() * u.adjoint(), sys.dim_a, sys.dim_e};
}

/// The literal index-sum form of the full density matrix:
///   rho^{j1 j2}_{nu1 nu2} = sum a_{i1 a1} a*_{i2 a2} <j1 nu1|U|i1 a1> <i2 a2|U^dagger|j2 nu2>
/// Kept independent of rho_full as an internal cross-check. Pure kind only.
inline DensityMatrix rho_full_index_sum(const BipartiteSystem& sys,
                                        const InitialState& init, double t) {
  sys.validate();
  init.validate(sys.dim_a, sys.dim_e);
  if (init.kind != InitialState::Kind::pure_amplitudes) {
    throw std::invalid_argument("rho_full_index_sum: pure initial state required");
  }
  const Index da = sys.dim_a, de = sys.dim_e, n = sys.dim();
  const ComplexMatrix u = matexp_hermitian_generator(total_hamiltonian(sys), t);
  auto idx = [de](Index i, Index a) { return i * de + a; };
  ComplexMatrix rho = ComplexMatrix::Zero(n, n);
  for (Index j1 = 0; j1 < da; ++j1)
    for (Index n1 = 0; n1 < de; ++n1)
      for (Index j2 = 0; j2 < da; ++j2)
        for (Index n2 = 0; n2 < de; ++n2) {
          Complex acc{0.0, 0.0};
          for (Index i1 = 0; i1 < da; ++i1)
            for (Index a1 = 0; a1 < de; ++a1) {
              const Complex left = init.amplitudes(idx(i1, a1)) * u(idx(j1, n1), idx(i1, a1));
              if (left == Complex{0.0, 0.0}) continue;
              for (Index i2 = 0; i2 < da; ++i2)
                for (Index a2 = 0; a2 < de; ++a2) {
                  acc += left * std::conj(init.amplitudes(idx(i2, a2))) *
                         std::conj(u(idx(j2, n2), idx(i2, a2)));
                }
            }
          rho(idx(j1, n1), idx(j2, n2)) = acc;
        }
  return {rho, da, de};
}

/// rho_A(t) = Tr_E rho_AE(t).
inline DensityMatrix rho_reduced(const BipartiteSystem& sys, const InitialState& init,
                                 double t) {
  const DensityMatrix full = rho_full(sys, init, t);
  return {partial_trace_env(full.mat, sys.dim_a, sys.dim_e), sys.dim_a, 1};
}

/// Closed-form spectrum of a 2x2 density matrix.
struct TwoLevelSpectrum {
  double sigma11 = 0.0;  // smaller eigenvalue
  double sigma22 = 0.0;  // larger eigenvalue
  double delta = 0.0;    // discriminant, clamped at 0 below 1e-12 noise
};

inline TwoLevelSpectrum two_level_spectrum(const DensityMatrix& rho) {
  if (rho.mat.rows() != 2 || rho.mat.cols() != 2) {
    throw std::invalid_argument("two_level_spectrum: 2x2 density matrix required");
  }
  const Complex r11 = rho.mat(0, 0), r22 = rho.mat(1, 1);
  const Complex off = rho.mat(0, 1) * rho.mat(1, 0);
  const Complex diff = r11 - r22;
  // Delta = (rho11 - rho22)^2 + 4 rho12 rho21; real for Hermitian input.
  double delta = (diff * diff + 4.0 * off).real();
  if (delta < -1e-12) {
    std::ostringstream os;
    os << "two_level_spectrum: negative discriminant " << delta
       << " (input is not Hermitian)";
    throw std::invalid_argument(os.str());
  }
  delta = std::max(delta, 0.0);
  const double sum = (r11 + r22).real();
  const double root = std::sqrt(delta);
  return {(sum - root) / 2.0, (sum + root) / 2.0, delta};
}

/// One reduced density matrix per grid point, ordered as the grid.
inline std::vector<DensityMatrix> sweep(const BipartiteSystem& sys,
                                        const InitialState& init, const TimeGrid& grid) {
  grid.validate();
  sys.validate();
  init.validate(sys.dim_a, sys.dim_e);
  const HermitianEigen eig = hermitian_eig(total_hamiltonian(sys));
  const ComplexMatrix rho0 = init.global_density();
  std::vector<DensityMatrix> out;
  out.reserve(grid.times.size());
  for (double t : grid.times) {
    ComplexVector phases(eig.values.size());
    for (Index k = 0; k < eig.values.size(); ++k) phases(k) = std::exp(-kI * eig.values(k) * t);
    const ComplexMatrix u = eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
    const ComplexMatrix full = u * rho0 * u.adjoint();
    out.push_back({partial_trace_env(full, sys.dim_a, sys.dim_e), sys.dim_a, 1});
  }
  return out;
}

}  // namespace arealaw
