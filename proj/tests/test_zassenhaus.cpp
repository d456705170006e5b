#include "arealaw/spin_boson.hpp"
#include "arealaw/zassenhaus.hpp"
#include "test_helpers.hpp"

#include <gtest/gtest.h>

using namespace arealaw;
using namespace arealaw::testing;
using namespace arealaw::zassenhaus;

TEST(CTerms, CommutingInputsVanish) {
  const ComplexMatrix x = diag({1.0, 2.0, -0.5}), y = diag({0.3, 0.0, 4.0});
  for (int k = 2; k <= 4; ++k) EXPECT_EQ(max_abs(c_terms(x, y, k)), 0.0) << "k=" << k;
  // Iterated series coefficients carry k! times roundoff.
  for (int k = 5; k <= 6; ++k) EXPECT_LE(max_abs(c_terms(x, y, k)), 1e-10) << "k=" << k;
}

TEST(CTerms, PauliCommutator) {
  const double a = 0.7, b = -1.3;
  const ComplexMatrix c2 = c_terms(a * pauli_z(), b * pauli_x(), 2);
  EXPECT_LE(max_abs(c2 - 2.0 * a * b * kI * pauli_y()), 1e-15);
}

TEST(CTerms, SecondOrderAntisymmetry) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix x = random_matrix(4, 4, rng), y = random_matrix(4, 4, rng);
    EXPECT_LE(max_abs(c_terms(x, y, 2) + c_terms(y, x, 2)), 1e-13);
  }
}

TEST(CTerms, IterativeMatchesClosedForms) {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix x = random_matrix(3, 3, rng), y = random_matrix(3, 3, rng);
    const std::vector<ComplexMatrix> it = c_terms_iterative(x, y, 4);
    for (int k = 2; k <= 4; ++k) EXPECT_LE(max_abs(it[k] - c_term_closed(x, y, k)), 1e-12) << "k=" << k;
  }
}

TEST(CTerms, RejectsBadArguments) {
  EXPECT_THROW(c_terms(identity(2), identity(2), 1), std::invalid_argument);
  EXPECT_THROW(c_terms(identity(2), identity(3), 2), std::invalid_argument);
  EXPECT_THROW(c_term_closed(identity(2), identity(2), 5), std::invalid_argument);
}

TEST(TruncatedExponential, CommutingIsExact) {
  Rng rng(3);
  const ComplexMatrix u = random_unitary(4, rng);
  const ComplexMatrix x = -kI * u * diag({0.2, 1.0, -0.7, 0.4}) * u.adjoint();
  const ComplexMatrix y = -kI * u * diag({1.1, -0.3, 0.0, 2.0}) * u.adjoint();
  for (int order = 1; order <= 4; ++order) {
    EXPECT_LE(max_abs(truncated_exponential(x, y, order) - expm(x + y)), 1e-12);
  }
}

TEST(TruncatedExponential, SpinBosonSmallTime) {
  const BipartiteSystem s = spin_boson::build_model({1.0, 1.0, 0.5, 0.5, 8});
  const double t = 1e-2;
  const ComplexMatrix x = -kI * t * (kron(s.h_a, identity(s.dim_e)) + kron(identity(s.dim_a), s.h_e));
  const ComplexMatrix y = -kI * t * s.h_ae;
  EXPECT_LE(operator_norm(truncated_exponential(x, y, 4) - expm(x + y)), 1e-9);
}

TEST(TruncatedExponential, HigherOrderIsCloser) {
  Rng rng(4);
  const double t = 1e-2;
  const ComplexMatrix x = -kI * t * random_hermitian(2, rng), y = -kI * t * random_hermitian(2, rng);
  const ComplexMatrix exact = expm(x + y);
  const double e2 = operator_norm(truncated_exponential(x, y, 2) - exact);
  const double e3 = operator_norm(truncated_exponential(x, y, 3) - exact);
  EXPECT_LT(e3, e2);
}

TEST(TruncatedExponential, UnitaryForHermitianGenerators) {
  Rng rng(5);
  for (int order = 1; order <= 5; ++order) {
    const ComplexMatrix x = -kI * 0.3 * random_hermitian(4, rng), y = -kI * 0.3 * random_hermitian(4, rng);
    EXPECT_LE(unitarity_defect(truncated_exponential(x, y, order)), 1e-10) << "order " << order;
  }
}

TEST(TruncatedExponential, HigherIterativeOrdersKeepImproving) {
  Rng rng(6);
  const double t = 0.05;
  const ComplexMatrix x = -kI * t * random_hermitian(3, rng), y = -kI * t * random_hermitian(3, rng);
  const ComplexMatrix exact = expm(x + y);
  double previous = operator_norm(truncated_exponential(x, y, 4) - exact);
  for (int order = 5; order <= 6; ++order) {
    const double err = operator_norm(truncated_exponential(x, y, order) - exact);
    EXPECT_LT(err, previous);
    previous = err;
  }
}

TEST(TruncatedExpansion, StoresTerms) {
  Rng rng(7);
  const ComplexMatrix x = random_matrix(2, 2, rng), y = random_matrix(2, 2, rng);
  const Expansion e = truncated_expansion(x, y, 3);
  EXPECT_EQ(e.order, 3);
  EXPECT_LE(max_abs(e.terms[2] - commutator(x, y)), 1e-15);
  EXPECT_THROW(truncated_expansion(x, y, 0), std::invalid_argument);
}

TEST(OrderScan, SlopesTrackOrderPlusOne) {
  Rng rng(8);
  const ComplexMatrix a = -kI * random_hermitian(4, rng), b = -kI * random_hermitian(4, rng);
  const std::vector<double> ts = log_spaced(1e-3, 1e-1, 8);
  for (int order = 1; order <= 4; ++order) {
    const OrderScan scan = truncation_order_scan(a, b, order, ts);
    ASSERT_FALSE(scan.degenerate) << "order " << order;
    EXPECT_NEAR(scan.slope, order + 1.0, 0.3) << "order " << order;
  }
}

TEST(OrderScan, CommutingIsDegenerate) {
  const ComplexMatrix a = -kI * diag({1.0, 2.0}), b = -kI * diag({0.5, -0.5});
  const OrderScan scan = truncation_order_scan(a, b, 2, log_spaced(1e-3, 1e-1, 6));
  EXPECT_TRUE(scan.degenerate);
  for (double e : scan.errors) EXPECT_LT(e, 1e-13);
}

TEST(OrderScan, RejectsShortGrids) {
  EXPECT_THROW(truncation_order_scan(identity(2), identity(2), 2, {0.1, 0.2, 0.3}), std::invalid_argument);
  EXPECT_THROW(truncation_order_scan(identity(2), identity(2), 2, {0.0, 0.1, 0.2, 0.3}), std::invalid_argument);
  EXPECT_THROW(log_spaced(0.0, 1.0, 4), std::invalid_argument);
}
