#pragma once

// System (x) environment model: Hamiltonian blocks, initial states and the
// commutator structure of the coupling.

#include "arealaw/linalg.hpp"
#include "arealaw/random.hpp"

#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>

namespace arealaw {

/// H = H_A (x) I_E + I_A (x) H_E + H_AE on the composite space.
struct BipartiteSystem {
  Index dim_a = 1;
  Index dim_e = 1;
  ComplexMatrix h_a;   // dimA x dimA
  ComplexMatrix h_e;   // dimE x dimE
  ComplexMatrix h_ae;  // (dimA dimE) x (dimA dimE)

  Index dim() const { return dim_a * dim_e; }

  /// Throws std::invalid_argument (or NotHermitianError) on a malformed model.
  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
    if (dim_a < 1 || dim_e < 1) fail("BipartiteSystem: dimensions must be >= 1");
    auto check = [&](const ComplexMatrix& m, Index n, const char* name) {
      if (m.rows() != n || m.cols() != n) {
        std::ostringstream os;
        os << "BipartiteSystem: " << name << " must be " << n << "x" << n << ", got "
           << m.rows() << "x" << m.cols();
        fail(os.str());
      }
      const double asym = hermitian_asymmetry(m);
      if (asym > kHermitianTol * std::max(1.0, max_abs(m))) throw NotHermitianError(asym);
    };
    check(h_a, dim_a, "H_A");
    check(h_e, dim_e, "H_E");
    check(h_ae, dim(), "H_AE");
  }

  static BipartiteSystem uncoupled(ComplexMatrix h_a, ComplexMatrix h_e) {
    BipartiteSystem s;
    s.dim_a = h_a.rows();
    s.dim_e = h_e.rows();
    s.h_ae = ComplexMatrix::Zero(s.dim(), s.dim());
    s.h_a = std::move(h_a);
    s.h_e = std::move(h_e);
    return s;
  }
};

inline ComplexMatrix total_hamiltonian(const BipartiteSystem& sys) {
  sys.validate();
  return kron(sys.h_a, identity(sys.dim_e)) + kron(identity(sys.dim_a), sys.h_e) +
         sys.h_ae;
}

/// Initial data. The pure kind carries the product-basis amplitudes a_{i alpha}
/// (flattened with the composite index); the env-weighted kind carries system
/// coefficients c_i and an environment density matrix d.
struct InitialState {
  enum class Kind { pure_amplitudes, env_weighted };

  Kind kind = Kind::pure_amplitudes;
  Index dim_a = 1;
  Index dim_e = 1;
  ComplexVector amplitudes;   // pure: size dimA*dimE
  ComplexVector system;       // env-weighted: c_i
  ComplexMatrix env_weights;  // env-weighted: d_{alpha1 alpha2}

  static InitialState pure(ComplexVector a, Index dim_a, Index dim_e) {
    InitialState s;
    s.kind = Kind::pure_amplitudes;
    s.dim_a = dim_a;
    s.dim_e = dim_e;
    s.amplitudes = std::move(a);
    return s;
  }

  /// a_{i alpha} = c_i e_alpha
  static InitialState product(const ComplexVector& c, const ComplexVector& e) {
    ComplexVector a(c.size() * e.size());
    for (Index i = 0; i < c.size(); ++i) a.segment(i * e.size(), e.size()) = c(i) * e;
    return pure(std::move(a), c.size(), e.size());
  }

  static InitialState env_weighted(ComplexVector c, ComplexMatrix d) {
    InitialState s;
    s.kind = Kind::env_weighted;
    s.dim_a = c.size();
    s.dim_e = d.rows();
    s.system = std::move(c);
    s.env_weights = std::move(d);
    return s;
  }

  /// Throws std::invalid_argument when normalization or shape fails.
  void validate(Index expect_a, Index expect_e) const {
    std::ostringstream os;
    if (dim_a != expect_a || dim_e != expect_e) {
      os << "InitialState: dimensions (" << dim_a << "," << dim_e
         << ") do not match model (" << expect_a << "," << expect_e << ")";
      throw std::invalid_argument(os.str());
    }
    if (kind == Kind::pure_amplitudes) {
      if (amplitudes.size() != dim_a * dim_e) {
        throw std::invalid_argument("InitialState: amplitude vector has wrong size");
      }
      const double dev = std::abs(amplitudes.squaredNorm() - 1.0);
      if (dev > 1e-12) {
        os << "InitialState: sum |a|^2 deviates from 1 by " << dev;
        throw std::invalid_argument(os.str());
      }
      return;
    }
    if (system.size() != dim_a) throw std::invalid_argument("InitialState: c has wrong size");
    const double cdev = std::abs(system.squaredNorm() - 1.0);
    if (cdev > 1e-12) {
      os << "InitialState: sum |c|^2 deviates from 1 by " << cdev;
      throw std::invalid_argument(os.str());
    }
    validate_env_weights(env_weights, dim_e);
  }

  /// d must be Hermitian, PSD and of unit trace.
  static void validate_env_weights(const ComplexMatrix& d, Index dim_e) {
    std::ostringstream os;
    if (d.rows() != dim_e || d.cols() != dim_e) {
      os << "env weights must be " << dim_e << "x" << dim_e;
      throw std::invalid_argument(os.str());
    }
    const double asym = hermitian_asymmetry(d);
    if (asym > 1e-10) {
      os << "env weights are not Hermitian: max asymmetry " << asym;
      throw std::invalid_argument(os.str());
    }
    const double tr_dev = std::abs(d.trace() - Complex{1.0, 0.0});
    if (tr_dev > 1e-10) {
      os << "env weights trace deviates from 1 by " << tr_dev;
      throw std::invalid_argument(os.str());
    }
    const double min_eig = hermitian_eig(d, 1e-10).values.minCoeff();
    if (min_eig < -kPsdTol) {
      os << "env weights are not PSD: min eigenvalue " << min_eig;
      throw std::invalid_argument(os.str());
    }
  }

  /// Global initial density matrix on the composite space.
  ComplexMatrix global_density() const {
    if (kind == Kind::pure_amplitudes) return amplitudes * amplitudes.adjoint();
    return kron(system * system.adjoint(), env_weights);
  }

  /// Initial reduced state rho_A(0).
  ComplexMatrix reduced_density() const {
    return partial_trace_env(global_density(), dim_a, dim_e);
  }

  /// If the pure amplitudes factor as c (x) e, returns (c, e).
  std::optional<std::pair<ComplexVector, ComplexVector>> as_product(
      double tol = 1e-10) const {
    if (kind == Kind::env_weighted) return std::nullopt;
    Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        grid(amplitudes.data(), dim_a, dim_e);
    Eigen::JacobiSVD<ComplexMatrix> svd(ComplexMatrix(grid),
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& sv = svd.singularValues();
    if (sv.size() > 1 && sv(1) > tol) return std::nullopt;
    ComplexVector c = svd.matrixU().col(0) * sv(0);
    ComplexVector e = svd.matrixV().col(0).conjugate();
    return std::make_pair(std::move(c), std::move(e));
  }
};

enum class CommutatorClass { both, e_commuting, a_commuting, neither };

inline std::string_view to_string(CommutatorClass c) {
  switch (c) {
    case CommutatorClass::both: return "both";
    case CommutatorClass::e_commuting: return "E-commuting";
    case CommutatorClass::a_commuting: return "A-commuting";
    case CommutatorClass::neither: return "neither";
  }
  return "neither";
}

struct CommutatorReport {
  double norm_e_comm = 0.0;  // ||[I (x) H_E, H_AE]||
  double norm_a_comm = 0.0;  // ||[H_A (x) I, H_AE]||
  double tolerance = 0.0;
  CommutatorClass label = CommutatorClass::both;
};

/// Tolerance is 1e-10 * max(1, ||H_AE||).
inline CommutatorReport commutator_classification(const BipartiteSystem& sys) {
  sys.validate();
  CommutatorReport r;
  const ComplexMatrix he = kron(identity(sys.dim_a), sys.h_e);
  const ComplexMatrix ha = kron(sys.h_a, identity(sys.dim_e));
  r.norm_e_comm = operator_norm(commutator(he, sys.h_ae));
  r.norm_a_comm = operator_norm(commutator(ha, sys.h_ae));
  r.tolerance = 1e-10 * std::max(1.0, operator_norm(sys.h_ae));
  const bool e_ok = r.norm_e_comm <= r.tolerance;
  const bool a_ok = r.norm_a_comm <= r.tolerance;
  r.label = e_ok && a_ok ? CommutatorClass::both
            : e_ok       ? CommutatorClass::e_commuting
            : a_ok       ? CommutatorClass::a_commuting
                         : CommutatorClass::neither;
  return r;
}

// ---- seeded model builders -------------------------------------------------

/// Dense random model, every block Hermitian with O(1) entries.
inline BipartiteSystem random_system(Index dim_a, Index dim_e, Rng& rng,
                                     double coupling = 1.0) {
  BipartiteSystem s;
  s.dim_a = dim_a;
  s.dim_e = dim_e;
  s.h_a = random_hermitian(dim_a, rng);
  s.h_e = random_hermitian(dim_e, rng);
  s.h_ae = random_hermitian(dim_a * dim_e, rng, coupling);
  return s;
}

/// Model with [I (x) H_E, H_AE] = 0 by construction: H_AE is block diagonal
/// in the eigenbasis of H_E. `env_basis` receives that eigenbasis (columns).
inline BipartiteSystem e_commuting_system(Index dim_a, Index dim_e, Rng& rng,
                                          ComplexMatrix* env_basis = nullptr) {
  BipartiteSystem s;
  s.dim_a = dim_a;
  s.dim_e = dim_e;
  s.h_a = random_hermitian(dim_a, rng);
  s.h_e = random_hermitian(dim_e, rng);
  const HermitianEigen eig = hermitian_eig(s.h_e);
  ComplexMatrix blocks = ComplexMatrix::Zero(s.dim(), s.dim());
  for (Index g = 0; g < dim_e; ++g) {
    const ComplexMatrix h = random_hermitian(dim_a, rng);
    for (Index i = 0; i < dim_a; ++i)
      for (Index k = 0; k < dim_a; ++k) blocks(i * dim_e + g, k * dim_e + g) = h(i, k);
  }
  const ComplexMatrix w = kron(identity(dim_a), eig.vectors);
  s.h_ae = w * blocks * w.adjoint();
  s.h_ae = 0.5 * (s.h_ae + s.h_ae.adjoint());
  if (env_basis) *env_basis = eig.vectors;
  return s;
}

inline InitialState random_product_state(Index dim_a, Index dim_e, Rng& rng) {
  return InitialState::product(random_unit_vector(dim_a, rng),
                               random_unit_vector(dim_e, rng));
}

}  // namespace arealaw
