#pragma once

// Dense complex matrix substrate shared by every other module.
//
// Composite index convention for a bipartite space A (x) E:
//     idx = i * dimE + alpha        (system index major, environment minor)
// Every module in this library uses that single map.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace arealaw {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

/// Default tolerances (double precision eigensolver noise floor).
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;

/// Raised when a routine that requires a Hermitian input receives one that
/// is not, beyond tolerance. Carries the measured max |M - M^dagger|.
class NotHermitianError : public std::invalid_argument {
 public:
  explicit NotHermitianError(double asymmetry)
      : std::invalid_argument(message(asymmetry)), asymmetry_(asymmetry) {}

  double asymmetry() const noexcept { return asymmetry_; }

 private:
  static std::string message(double asymmetry) {
    std::ostringstream os;
    os << "matrix is not Hermitian: max |M - M^dagger| = " << asymmetry;
    return os.str();
  }
  double asymmetry_;
};

/// Raised when a numerical check (convergence, invariant) fails.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermitian_asymmetry(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return max_abs(m - m.adjoint());
}

inline bool is_hermitian(const ComplexMatrix& m, double tol = kHermitianTol) {
  return hermitian_asymmetry(m) <= tol;
}

inline bool is_anti_hermitian(const ComplexMatrix& m, double tol = kHermitianTol) {
  return m.rows() == m.cols() && max_abs(m + m.adjoint()) <= tol;
}

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}

inline ComplexMatrix identity(Index n) { return ComplexMatrix::Identity(n, n); }

struct HermitianEigen {
  RealVector values;      // ascending
  ComplexMatrix vectors;  // columns are eigenvectors, unitary
};

/// Eigendecomposition M = V diag(lambda) V^dagger of a Hermitian matrix.
/// The asymmetry tolerance scales with max(1, max|M|) so that large-norm
/// operators built from sums are not rejected for roundoff.
inline HermitianEigen hermitian_eig(const ComplexMatrix& m,
                                    double tol = kHermitianTol) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("hermitian_eig: matrix is not square");
  }
  const double asym = hermitian_asymmetry(m);
  if (asym > tol * std::max(1.0, max_abs(m))) throw NotHermitianError(asym);
  const ComplexMatrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("hermitian_eig: eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// U(t) = exp(-i H t) for Hermitian H, via eigendecomposition.
inline ComplexMatrix matexp_hermitian_generator(const ComplexMatrix& h, double t) {
  const HermitianEigen eig = hermitian_eig(h);
  ComplexVector phases(eig.values.size());
  for (Index k = 0; k < eig.values.size(); ++k) {
    phases(k) = std::exp(-kI * eig.values(k) * t);
  }
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

/// exp(A) for an arbitrary square matrix. Hermitian and anti-Hermitian
/// inputs go through the eigendecomposition; anything else falls back to
/// Pade scaling-and-squaring.
inline ComplexMatrix expm(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("expm: matrix is not square");
  const double scale = std::max(1.0, max_abs(a));
  if (is_anti_hermitian(a, kHermitianTol * scale)) {
    // A = -i H with H = i A Hermitian.
    return matexp_hermitian_generator(kI * a, 1.0);
  }
  if (is_hermitian(a, kHermitianTol * scale)) {
    const HermitianEigen eig = hermitian_eig(a);
    const RealVector ev = eig.values.array().exp();
    return eig.vectors * ev.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
  }
  return a.exp();
}

/// Tensor product; row (i, alpha) of the result is i * rows(B) + alpha.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline void check_bipartite_shape(const ComplexMatrix& rho, Index dim_a, Index dim_e,
                                  const char* who) {
  if (dim_a < 1 || dim_e < 1 || rho.rows() != dim_a * dim_e ||
      rho.cols() != dim_a * dim_e) {
    std::ostringstream os;
    os << who << ": expected a " << dim_a * dim_e << "x" << dim_a * dim_e
       << " matrix for dimA=" << dim_a << ", dimE=" << dim_e << ", got "
       << rho.rows() << "x" << rho.cols();
    throw std::invalid_argument(os.str());
  }
}

/// (rho_A)_{j1 j2} = sum_gamma rho_{(j1 gamma),(j2 gamma)}
inline ComplexMatrix partial_trace_env(const ComplexMatrix& rho, Index dim_a,
                                       Index dim_e) {
  check_bipartite_shape(rho, dim_a, dim_e, "partial_trace_env");
  ComplexMatrix out = ComplexMatrix::Zero(dim_a, dim_a);
  for (Index j1 = 0; j1 < dim_a; ++j1) {
    for (Index j2 = 0; j2 < dim_a; ++j2) {
      Complex acc{0.0, 0.0};
      for (Index g = 0; g < dim_e; ++g) acc += rho(j1 * dim_e + g, j2 * dim_e + g);
      out(j1, j2) = acc;
    }
  }
  return out;
}

/// (rho_E)_{a1 a2} = sum_i rho_{(i a1),(i a2)}
inline ComplexMatrix partial_trace_sys(const ComplexMatrix& rho, Index dim_a,
                                       Index dim_e) {
  check_bipartite_shape(rho, dim_a, dim_e, "partial_trace_sys");
  ComplexMatrix out = ComplexMatrix::Zero(dim_e, dim_e);
  for (Index i = 0; i < dim_a; ++i) {
    out += rho.block(i * dim_e, i * dim_e, dim_e, dim_e);
  }
  return out;
}

/// Spectral norm (largest singular value).
inline double operator_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

inline double unitarity_defect(const ComplexMatrix& u) {
  return max_abs(u.adjoint() * u - identity(u.cols()));
}

}  // namespace arealaw
