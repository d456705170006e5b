#pragma once

// Semi-group (divisibility) test of the reduced dynamics through the
// supermatrix of the dynamical map, plus the one-time memory diagnostics of
// the projected master equation.

#include "arealaw/dynamics.hpp"
#include "arealaw/linalg.hpp"
#include "arealaw/model.hpp"

#include <sstream>
#include <string_view>
#include <vector>

namespace arealaw {

/// C_{(i1,i2),(j1,j2)}(t, s). Row index i1*dimA + i2 is the input pair,
/// column index j1*dimA + j2 the output pair, so that
///   rho_A(t)_{j1 j2} = sum_{i1 i2} rho_A(s)_{i1 i2} C_{(i1,i2),(j1,j2)}(t, s)
/// and composition over an intermediate time is the matrix product
///   C(t, 0) = C(s, 0) C(t, s).
struct SuperMatrix {
  ComplexMatrix entries;
  Index dim_a = 1;
  double s = 0.0;
  double t = 0.0;

  Index pair(Index i1, Index i2) const { return i1 * dim_a + i2; }

  Complex operator()(Index i1, Index i2, Index j1, Index j2) const {
    return entries(pair(i1, i2), pair(j1, j2));
  }

  /// Apply the map to an initial reduced matrix (e.g. |c><c|).
  ComplexMatrix apply(const ComplexMatrix& rho_in) const {
    if (rho_in.rows() != dim_a || rho_in.cols() != dim_a) {
      throw std::invalid_argument("SuperMatrix::apply: dimension mismatch");
    }
    ComplexMatrix out = ComplexMatrix::Zero(dim_a, dim_a);
    for (Index i1 = 0; i1 < dim_a; ++i1)
      for (Index i2 = 0; i2 < dim_a; ++i2) {
        const Complex w = rho_in(i1, i2);
        if (w == Complex{0.0, 0.0}) continue;
        for (Index j1 = 0; j1 < dim_a; ++j1)
          for (Index j2 = 0; j2 < dim_a; ++j2) out(j1, j2) += w * (*this)(i1, i2, j1, j2);
      }
    return out;
  }

  ComplexMatrix apply(const ComplexVector& c) const { return apply(ComplexMatrix(c * c.adjoint())); }
};

/// C_{(i1,i2),(j1,j2)}(t,s) = sum_{a1 a2 g} d_{a1 a2} <j1 g|U|i1 a1> <j2 g|U|i2 a2>^*
/// with U = exp(-i H (t - s)).
inline SuperMatrix supermatrix(const BipartiteSystem& sys, const ComplexMatrix& d,
                               double t, double s) {
  sys.validate();
  InitialState::validate_env_weights(d, sys.dim_e);
  if (t < s) throw std::invalid_argument("supermatrix: requires t >= s");
  const Index da = sys.dim_a, de = sys.dim_e;
  const ComplexMatrix u = matexp_hermitian_generator(total_hamiltonian(sys), t - s);
  auto idx = [de](Index i, Index a) { return i * de + a; };

  SuperMatrix c;
  c.dim_a = da;
  c.s = s;
  c.t = t;
  c.entries = ComplexMatrix::Zero(da * da, da * da);
  for (Index i1 = 0; i1 < da; ++i1)
    for (Index i2 = 0; i2 < da; ++i2)
      for (Index j1 = 0; j1 < da; ++j1)
        for (Index j2 = 0; j2 < da; ++j2) {
          Complex acc{0.0, 0.0};
          for (Index g = 0; g < de; ++g)
            for (Index a1 = 0; a1 < de; ++a1) {
              const Complex left = u(idx(j1, g), idx(i1, a1));
              for (Index a2 = 0; a2 < de; ++a2) {
                acc += d(a1, a2) * left * std::conj(u(idx(j2, g), idx(i2, a2)));
              }
            }
          c.entries(c.pair(i1, i2), c.pair(j1, j2)) = acc;
        }
  return c;
}

/// Contraction over the intermediate pair (j1, j2): first then second.
inline SuperMatrix compose(const SuperMatrix& first, const SuperMatrix& second) {
  if (first.dim_a != second.dim_a) throw std::invalid_argument("compose: dimension mismatch");
  SuperMatrix out;
  out.dim_a = first.dim_a;
  out.s = first.s;
  out.t = second.t;
  out.entries = first.entries * second.entries;
  return out;
}

enum class Verdict { divisible, non_divisible };

inline std::string_view to_string(Verdict v) {
  return v == Verdict::divisible ? "divisible" : "non-divisible";
}

inline constexpr double kDivisibilityTol = 1e-8;

struct DivisibilityReport {
  double residual = 0.0;                // max over splits
  std::vector<double> split_times;
  std::vector<double> split_residuals;  // one per split
  CommutatorClass condition_class = CommutatorClass::neither;
  Verdict verdict = Verdict::divisible;
};

inline std::vector<double> default_splits(double t) { return {0.25 * t, 0.5 * t, 0.75 * t}; }

/// Max-entry residual |C(t,0) - C(s,0) C(t,s)| over the given splits.
inline DivisibilityReport divisibility_residual(const BipartiteSystem& sys,
                                                const ComplexMatrix& d, double t,
                                                std::vector<double> splits = {}) {
  if (!(t > 0.0)) throw std::invalid_argument("divisibility_residual: requires t > 0");
  if (splits.empty()) splits = default_splits(t);
  for (double s : splits) {
    if (!(s > 0.0 && s < t)) {
      std::ostringstream os;
      os << "divisibility_residual: split " << s << " outside (0, " << t << ")";
      throw std::invalid_argument(os.str());
    }
  }
  DivisibilityReport r;
  r.condition_class = commutator_classification(sys).label;
  r.split_times = splits;
  const SuperMatrix whole = supermatrix(sys, d, t, 0.0);
  for (double s : splits) {
    const SuperMatrix two_step = compose(supermatrix(sys, d, s, 0.0), supermatrix(sys, d, t, s));
    const double res = max_abs(whole.entries - two_step.entries);
    r.split_residuals.push_back(res);
    r.residual = std::max(r.residual, res);
  }
  r.verdict = r.residual <= kDivisibilityTol ? Verdict::divisible : Verdict::non_divisible;
  return r;
}

// ---- one-time memory diagnostics ---------------------------------------------

/// Terms of the gamma-block master equation, written in the eigenbasis of H_E
/// (the computational basis when H_E is already diagonal):
///
///   d rho_{A gamma}/dt = -i [H_d^gamma, rho_{A gamma}]
///                        - i sum_{beta != gamma} (Omega_{gamma beta} - Omega_{beta gamma})
///
///   Omega_{gamma beta}^{ik} = sum_j <i gamma|H_AE|j beta> <j beta|rho|k gamma>
///   Omega_{beta gamma}^{ik} = sum_j <i gamma|rho|j beta> <j beta|H_AE|k gamma>
struct MemoryTerms {
  Index gamma = 0;
  std::vector<ComplexMatrix> omega_gamma_beta;  // indexed by beta; zero at beta == gamma
  std::vector<ComplexMatrix> omega_beta_gamma;
  ComplexMatrix derivative;  // finite-difference d rho_{A gamma}/dt
  ComplexMatrix rhs;         // right-hand side above
  double master_residual = 0.0;
  ComplexMatrix env_basis;   // columns: basis used for the environment
};

namespace detail {

/// dimA x dimA block <. g1| M |. g2>.
inline ComplexMatrix env_block(const ComplexMatrix& m, Index dim_a, Index dim_e, Index g1,
                               Index g2) {
  ComplexMatrix b(dim_a, dim_a);
  for (Index i = 0; i < dim_a; ++i)
    for (Index k = 0; k < dim_a; ++k) b(i, k) = m(i * dim_e + g1, k * dim_e + g2);
  return b;
}

}  // namespace detail

inline MemoryTerms memory_terms(const BipartiteSystem& sys, const InitialState& init,
                                double t, Index gamma) {
  sys.validate();
  init.validate(sys.dim_a, sys.dim_e);
  if (gamma < 0 || gamma >= sys.dim_e) {
    std::ostringstream os;
    os << "memory_terms: env index " << gamma << " out of range [0, " << sys.dim_e << ")";
    throw std::invalid_argument(os.str());
  }
  const Index da = sys.dim_a, de = sys.dim_e;

  MemoryTerms m;
  m.gamma = gamma;
  const bool diagonal_env =
      max_abs(sys.h_e - ComplexMatrix(sys.h_e.diagonal().asDiagonal())) <= kHermitianTol;
  m.env_basis = diagonal_env ? identity(de) : hermitian_eig(sys.h_e).vectors;
  const ComplexMatrix w = kron(identity(da), m.env_basis);

  const ComplexMatrix h = w.adjoint() * total_hamiltonian(sys) * w;
  const ComplexMatrix h_ae = w.adjoint() * sys.h_ae * w;
  const HermitianEigen eig = hermitian_eig(total_hamiltonian(sys));
  const ComplexMatrix rho0 = init.global_density();
  auto rho_at = [&](double tt) {
    ComplexVector phases(eig.values.size());
    for (Index k = 0; k < eig.values.size(); ++k) phases(k) = std::exp(-kI * eig.values(k) * tt);
    const ComplexMatrix u = eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
    return ComplexMatrix(w.adjoint() * u * rho0 * u.adjoint() * w);
  };

  const ComplexMatrix rho = rho_at(t);
  const ComplexMatrix rho_g = detail::env_block(rho, da, de, gamma, gamma);
  const ComplexMatrix h_d = detail::env_block(h, da, de, gamma, gamma);

  m.rhs = -kI * commutator(h_d, rho_g);
  m.omega_gamma_beta.assign(de, ComplexMatrix::Zero(da, da));
  m.omega_beta_gamma.assign(de, ComplexMatrix::Zero(da, da));
  for (Index beta = 0; beta < de; ++beta) {
    if (beta == gamma) continue;
    m.omega_gamma_beta[beta] = detail::env_block(h_ae, da, de, gamma, beta) *
                               detail::env_block(rho, da, de, beta, gamma);
    m.omega_beta_gamma[beta] = detail::env_block(rho, da, de, gamma, beta) *
                               detail::env_block(h_ae, da, de, beta, gamma);
    m.rhs += -kI * (m.omega_gamma_beta[beta] - m.omega_beta_gamma[beta]);
  }

  // Richardson-combined central difference of the exact gamma block.
  const double step = 1e-3 / std::max(1.0, eig.values.cwiseAbs().maxCoeff());
  auto central = [&](double hh) {
    return ComplexMatrix((detail::env_block(rho_at(t + hh), da, de, gamma, gamma) -
                          detail::env_block(rho_at(t - hh), da, de, gamma, gamma)) /
                         (2.0 * hh));
  };
  m.derivative = (4.0 * central(step / 2.0) - central(step)) / 3.0;
  m.master_residual = max_abs(m.derivative - m.rhs);
  return m;
}

}  // namespace arealaw
