#include "arealaw/entropy.hpp"
#include "arealaw/spin_boson.hpp"
#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace arealaw;
using namespace arealaw::testing;

TEST(VonNeumannEntropy, PureProjectorIsZero) {
  Rng rng(1);
  const ComplexVector v = random_unit_vector(3, rng);
  EXPECT_NEAR(von_neumann_entropy(ComplexMatrix(v * v.adjoint())), 0.0, 1e-12);
}

TEST(VonNeumannEntropy, MaximallyMixedQubit) {
  EXPECT_NEAR(von_neumann_entropy(ComplexMatrix(0.5 * identity(2))), std::numbers::ln2, 1e-15);
}

TEST(VonNeumannEntropy, DiagonalQuarterThreeQuarters) {
  EXPECT_NEAR(von_neumann_entropy(diag({0.25, 0.75})), 0.562335, 1e-6);
  EXPECT_NEAR(von_neumann_entropy(diag({0.25, 0.75})), entropy_of_spectrum({0.25, 0.75}), 1e-14);
}

TEST(VonNeumannEntropy, RejectsBadTrace) {
  EXPECT_THROW(von_neumann_entropy(diag({0.5, 0.6})), std::invalid_argument);
}

TEST(VonNeumannEntropy, ClipsRoundoffNegatives) {
  EXPECT_NEAR(von_neumann_entropy(diag({1.0 + 1e-13, -1e-13})), 0.0, 1e-12);
}

TEST(VonNeumannEntropy, BasisInvariance) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 2 + trial % 4;
    const ComplexMatrix rho = random_density_matrix(n, rng);
    const ComplexMatrix w = random_unitary(n, rng);
    EXPECT_NEAR(von_neumann_entropy(rho), von_neumann_entropy(ComplexMatrix(w * rho * w.adjoint())),
                1e-10);
  }
}

TEST(VonNeumannEntropy, BoundedByLogDimension) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 2 + trial % 5;
    const double s = von_neumann_entropy(random_density_matrix(n, rng));
    EXPECT_GE(s, -1e-9);
    EXPECT_LE(s, std::log(static_cast<double>(n)) + 1e-9);
  }
}

TEST(SchmidtSymmetry, ReducedEntropiesAgreeAlongTrajectory) {
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const BipartiteSystem s = random_system(2 + trial % 2, 3, rng);
    const InitialState init = InitialState::pure(random_unit_vector(s.dim(), rng), s.dim_a, s.dim_e);
    for (double t : {0.0, 0.3, 1.7, 6.0}) {
      const DensityMatrix full = rho_full(s, init, t);
      const double sa = von_neumann_entropy(partial_trace_env(full.mat, s.dim_a, s.dim_e));
      const double se = von_neumann_entropy(partial_trace_sys(full.mat, s.dim_a, s.dim_e));
      EXPECT_NEAR(sa, se, 1e-9);
    }
  }
}

TEST(EntanglementRate, SingleEnvStateIsZero) {
  Rng rng(5);
  for (Index da : {2, 3, 4}) {
    const BipartiteSystem s = random_system(da, 1, rng);
    const RateEstimate r = entanglement_rate_at_zero(s, random_product_state(da, 1, rng));
    EXPECT_NEAR(r.value, 0.0, 1e-8);
    EXPECT_TRUE(r.converged);
  }
}

TEST(EntanglementRate, NoCouplingIsZero) {
  Rng rng(6);
  const BipartiteSystem s = BipartiteSystem::uncoupled(random_hermitian(2, rng), random_hermitian(3, rng));
  EXPECT_NEAR(entanglement_rate_at_zero(s, random_product_state(2, 3, rng)).value, 0.0, 1e-8);
}

TEST(EntanglementRate, AgreesWithLocalQuadraticFit) {
  Rng rng(7);
  const BipartiteSystem s = random_system(2, 2, rng);
  const InitialState init = random_product_state(2, 2, rng);
  const RateEstimate r = entanglement_rate_at_zero(s, init);

  // Least-squares quadratic through five symmetric samples; the linear
  // coefficient is sum(t S) / sum(t^2) because the odd moments decouple.
  const double h = r.step;
  double num = 0.0, den = 0.0;
  for (int k = -2; k <= 2; ++k) {
    const double t = k * h;
    const double st = von_neumann_entropy(rho_reduced(s, init, t));
    num += t * st;
    den += t * t;
  }
  EXPECT_NEAR(r.value, num / den, 1e-5);
}

TEST(EntanglementRate, NonNegativeAtPureProductStart) {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const BipartiteSystem s = random_system(2, 2 + trial % 2, rng);
    const RateEstimate r = entanglement_rate_at_zero(s, random_product_state(2, s.dim_e, rng));
    EXPECT_GE(r.value, -1e-8);
  }
}

TEST(EntanglementRate, MixedReducedStartHasFiniteRate) {
  // Entangled start: S_A(0) > 0 and the derivative is a smooth quantity.
  Rng rng(9);
  const BipartiteSystem s = random_system(2, 2, rng);
  const InitialState init = InitialState::pure(random_unit_vector(4, rng), 2, 2);
  const RateEstimate r = entanglement_rate_at_zero(s, init);
  EXPECT_TRUE(r.converged);
  const double h = 1e-3;
  const double fd = (von_neumann_entropy(rho_reduced(s, init, h)) -
                     von_neumann_entropy(rho_reduced(s, init, -h))) / (2.0 * h);
  EXPECT_NEAR(r.value, fd, 1e-5);
}

TEST(KitaevBound, DegenerateDeltaGivesZeroBound) {
  Rng rng(10);
  const BipartiteSystem s = random_system(3, 1, rng);
  const KitaevReport k = kitaev_bound_report(s, random_product_state(3, 1, rng));
  EXPECT_EQ(k.delta_dim, 1);
  EXPECT_EQ(k.bound_rhs, 0.0);
  EXPECT_NEAR(k.rate, 0.0, 1e-8);
  EXPECT_FALSE(k.ratio.has_value());
  EXPECT_TRUE(k.satisfied);
}

TEST(KitaevBound, NoCouplingGivesZeroBound) {
  Rng rng(11);
  const BipartiteSystem s = BipartiteSystem::uncoupled(random_hermitian(2, rng), random_hermitian(2, rng));
  const KitaevReport k = kitaev_bound_report(s, random_product_state(2, 2, rng));
  EXPECT_EQ(k.bound_rhs, 0.0);
  EXPECT_NEAR(k.rate, 0.0, 1e-8);
  EXPECT_TRUE(k.satisfied);
}

TEST(KitaevBound, SpinBosonClosedFormRateBelowBound) {
  const spin_boson::Params p{1.0, 1.0, 1.0, 0.5, 1};
  const BipartiteSystem s = spin_boson::build_model(p);
  const double gamma = spin_boson::closed_form_rate(p);
  EXPECT_NEAR(gamma, -1.26986, 1e-5);
  const KitaevReport k = kitaev_bound_check(gamma, operator_norm(s.h_ae), 2, 2);
  EXPECT_NEAR(k.bound_rhs, 2.0 * 0.75 * std::numbers::ln2, 1e-12);
  EXPECT_TRUE(k.satisfied);
  ASSERT_TRUE(k.ratio.has_value());
}

TEST(KitaevBound, RandomModelsRespectBoundWithCTwo) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const BipartiteSystem s = random_system(2, 2, rng);
    const KitaevReport k = kitaev_bound_report(s, random_product_state(2, 2, rng));
    EXPECT_TRUE(k.satisfied) << "rate " << k.rate << " bound " << k.bound_rhs;
    EXPECT_TRUE(std::isfinite(*k.ratio));
  }
}

TEST(ConstantEntropy, SingleEnvState) {
  Rng rng(13);
  const BipartiteSystem s = random_system(3, 1, rng);
  EXPECT_TRUE(constant_entropy_check(s, random_product_state(3, 1, rng), TimeGrid::uniform(10.0, 50)).constant);
}

TEST(ConstantEntropy, ECommutingStartInEnvEigenstate) {
  Rng rng(14);
  ComplexMatrix basis;
  const BipartiteSystem s = e_commuting_system(2, 3, rng, &basis);
  const InitialState init = InitialState::product(random_unit_vector(2, rng), basis.col(1));
  const ConstancyReport r = constant_entropy_check(s, init, TimeGrid::uniform(10.0, 50));
  EXPECT_TRUE(r.constant) << r.max_deviation;
}

TEST(ConstantEntropy, GenericCouplingVaries) {
  Rng rng(15);
  const BipartiteSystem s = random_system(2, 3, rng);
  const ConstancyReport r = constant_entropy_check(s, random_product_state(2, 3, rng), TimeGrid::uniform(5.0, 50));
  EXPECT_FALSE(r.constant);
  EXPECT_GT(r.max_deviation, 1e-3);
}

TEST(EntropyTrace, CarriesBoundDataAndStaysInRange) {
  Rng rng(16);
  const BipartiteSystem s = random_system(2, 4, rng);
  const EntropyTrace tr = entropy_trace(s, random_product_state(2, 4, rng), TimeGrid::uniform(3.0, 30));
  EXPECT_EQ(tr.delta_dim, 2);
  EXPECT_EQ(tr.entropy.size(), 30u);
  EXPECT_NEAR(tr.bound_rhs, 2.0 * operator_norm(s.h_ae) * std::numbers::ln2, 1e-12);
  for (double v : tr.entropy) {
    EXPECT_GE(v, -1e-9);
    EXPECT_LE(v, std::numbers::ln2 + 1e-9);
  }
}
