#include "arealaw/dynamics.hpp"
#include "arealaw/entropy.hpp"
#include "arealaw/spin_boson.hpp"
#include "test_helpers.hpp"

#include <gtest/gtest.h>

using namespace arealaw;
using namespace arealaw::testing;

TEST(RhoFull, InitialTimeIsInitialProjector) {
  Rng rng(1);
  const BipartiteSystem s = random_system(2, 3, rng);
  const InitialState init = random_product_state(2, 3, rng);
  const DensityMatrix rho = rho_full(s, init, 0.0);
  EXPECT_LE(max_abs(rho.mat - init.amplitudes * init.amplitudes.adjoint()), 1e-14);
}

TEST(RhoFull, UncoupledEvolutionStaysProduct) {
  Rng rng(2);
  const BipartiteSystem s = BipartiteSystem::uncoupled(random_hermitian(2, rng), random_hermitian(3, rng));
  const InitialState init = random_product_state(2, 3, rng);
  for (double t : {0.1, 1.0, 7.5}) {
    const DensityMatrix ra = rho_reduced(s, init, t);
    EXPECT_NEAR(ra.purity(), 1.0, 1e-10) << "t=" << t;
  }
}

TEST(RhoFull, IndexSumFormMatchesMatrixProduct) {
  Rng rng(77);
  const BipartiteSystem s = random_system(2, 2, rng);
  const InitialState init = InitialState::pure(random_unit_vector(4, rng), 2, 2);
  const ComplexMatrix u = matexp_hermitian_generator(total_hamiltonian(s), 0.7);
  const ComplexMatrix oracle = u * init.global_density() * u.adjoint();
  EXPECT_LE(max_abs(rho_full_index_sum(s, init, 0.7).mat - oracle), 1e-12);
  EXPECT_LE(max_abs(rho_full(s, init, 0.7).mat - oracle), 1e-12);
}

TEST(RhoFull, IndexSumAgreesAcrossShapes) {
  Rng rng(78);
  for (auto [da, de] : {std::pair<Index, Index>{2, 3}, {3, 2}, {1, 4}, {3, 1}}) {
    const BipartiteSystem s = random_system(da, de, rng);
    const InitialState init = InitialState::pure(random_unit_vector(da * de, rng), da, de);
    for (double t : {0.2, 2.3}) {
      EXPECT_LE(max_abs(rho_full_index_sum(s, init, t).mat - rho_full(s, init, t).mat), 1e-12);
    }
  }
}

TEST(RhoFull, RejectsUnnormalizedStart) {
  Rng rng(3);
  const BipartiteSystem s = random_system(2, 2, rng);
  const InitialState init = InitialState::pure(2.0 * random_unit_vector(4, rng), 2, 2);
  EXPECT_THROW(rho_full(s, init, 0.1), std::invalid_argument);
}

TEST(RhoFull, GlobalPurityConserved) {
  Rng rng(4);
  const BipartiteSystem s = random_system(3, 2, rng);
  const InitialState init = InitialState::pure(random_unit_vector(6, rng), 3, 2);
  for (double t : {0.0, 0.5, 3.0, 40.0}) {
    const DensityMatrix rho = rho_full(s, init, t);
    EXPECT_NEAR(rho.purity(), 1.0, 1e-10);
    EXPECT_NEAR(rho.mat.trace().real(), 1.0, 1e-10);
  }
}

TEST(RhoReduced, ProductStartIsPureAtZero) {
  ComplexVector c(2);
  c << Complex(0.6, 0.0), Complex(0.0, 0.8);
  ComplexVector e = ComplexVector::Zero(3);
  e(1) = 1.0;
  Rng rng(5);
  const BipartiteSystem s = random_system(2, 3, rng);
  const DensityMatrix ra = rho_reduced(s, InitialState::product(c, e), 0.0);
  EXPECT_LE(max_abs(ra.mat - c * c.adjoint()), 1e-14);
}

TEST(RhoReduced, SingleEnvStateFollowsEffectiveSystemUnitary) {
  // dimE = 1: rho_A(t) = U rho_A(0) U^dagger with U generated by H_A + H_AE + eta.
  Rng rng(6);
  BipartiteSystem s = random_system(3, 1, rng);
  const InitialState init = random_product_state(3, 1, rng);
  const double t = 1.3;
  const ComplexMatrix u = matexp_hermitian_generator(s.h_a + s.h_ae + s.h_e(0, 0) * identity(3), t);
  const ComplexVector c = init.amplitudes;
  ComplexMatrix expected = ComplexMatrix::Zero(3, 3);
  for (Index j1 = 0; j1 < 3; ++j1)
    for (Index j2 = 0; j2 < 3; ++j2)
      for (Index i1 = 0; i1 < 3; ++i1)
        for (Index i2 = 0; i2 < 3; ++i2)
          expected(j1, j2) += c(i1) * std::conj(c(i2)) * u(j1, i1) * std::conj(u(j2, i2));
  EXPECT_LE(max_abs(rho_reduced(s, init, t).mat - expected), 1e-12);
}

TEST(RhoReduced, SpinBosonPopulationsStayHalf) {
  const spin_boson::Params p{1.0, 1.0, 0.5, 0.5, 4};
  const BipartiteSystem s = spin_boson::build_model(p);
  for (const InitialState& init : {spin_boson::coherent_product_start(p), spin_boson::entangled_start(p)}) {
    for (const DensityMatrix& rho : sweep(s, init, TimeGrid::uniform(5.0, 50))) {
      EXPECT_NEAR(rho.mat(0, 0).real(), 0.5, 1e-10);
      EXPECT_NEAR(rho.mat(1, 1).real(), 0.5, 1e-10);
    }
  }
}

TEST(TwoLevelSpectrum, PureStateEndpoints) {
  DensityMatrix rho{diag({1.0, 0.0}), 2, 1};
  const TwoLevelSpectrum sp = two_level_spectrum(rho);
  EXPECT_DOUBLE_EQ(sp.sigma11, 0.0);
  EXPECT_DOUBLE_EQ(sp.sigma22, 1.0);
}

TEST(TwoLevelSpectrum, MaximallyMixedIsDegenerate) {
  const TwoLevelSpectrum sp = two_level_spectrum({0.5 * identity(2), 2, 1});
  EXPECT_DOUBLE_EQ(sp.sigma11, 0.5);
  EXPECT_DOUBLE_EQ(sp.sigma22, 0.5);
  EXPECT_DOUBLE_EQ(sp.delta, 0.0);
}

TEST(TwoLevelSpectrum, AgreesWithEigensolverOn1000Random) {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const DensityMatrix rho{random_density_matrix(2, rng), 2, 1};
    const TwoLevelSpectrum sp = two_level_spectrum(rho);
    const RealVector ev = hermitian_eig(rho.mat).values;
    EXPECT_NEAR(sp.sigma11, ev(0), 1e-10);
    EXPECT_NEAR(sp.sigma22, ev(1), 1e-10);
    EXPECT_NEAR(sp.sigma11 + sp.sigma22, rho.mat.trace().real(), 1e-10);
    EXPECT_GE(sp.delta, -1e-12);
  }
}

TEST(TwoLevelSpectrum, RejectsNegativeDiscriminant) {
  ComplexMatrix m(2, 2);
  m << 0.5, 0.3, -0.3, 0.5;  // rho12 rho21 = -0.09
  EXPECT_THROW(two_level_spectrum({m, 2, 1}), std::invalid_argument);
  EXPECT_THROW(two_level_spectrum({identity(3) / 3.0, 3, 1}), std::invalid_argument);
}

TEST(Sweep, SinglePointGridIsInitialState) {
  Rng rng(7);
  const BipartiteSystem s = random_system(2, 2, rng);
  const InitialState init = random_product_state(2, 2, rng);
  const std::vector<DensityMatrix> out = sweep(s, init, TimeGrid{{0.0}});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_LE(max_abs(out[0].mat - init.reduced_density()), 1e-14);
}

TEST(Sweep, RejectsBadGrids) {
  Rng rng(7);
  const BipartiteSystem s = random_system(2, 2, rng);
  const InitialState init = random_product_state(2, 2, rng);
  EXPECT_THROW(sweep(s, init, TimeGrid{}), std::invalid_argument);
  EXPECT_THROW(sweep(s, init, TimeGrid{{0.1, 0.2}}), std::invalid_argument);
  EXPECT_THROW(sweep(s, init, TimeGrid{{0.0, 0.2, 0.2}}), std::invalid_argument);
}

TEST(Sweep, UncoupledEntropyIsFlat) {
  Rng rng(8);
  const BipartiteSystem s = BipartiteSystem::uncoupled(random_hermitian(2, rng), random_hermitian(2, rng));
  ComplexVector bellish = random_unit_vector(4, rng);
  const InitialState init = InitialState::pure(bellish, 2, 2);
  const std::vector<DensityMatrix> out = sweep(s, init, TimeGrid::uniform(10.0, 40));
  const double s0 = von_neumann_entropy(out.front());
  for (const DensityMatrix& rho : out) EXPECT_NEAR(von_neumann_entropy(rho), s0, 1e-10);
}

TEST(Sweep, SpinBosonTracesOnHundredPoints) {
  const spin_boson::Params p{1.0, 1.0, 0.5, 0.5, 8};
  const BipartiteSystem s = spin_boson::build_model(p);
  for (const DensityMatrix& rho : sweep(s, spin_boson::coherent_product_start(p), TimeGrid::uniform(10.0, 100))) {
    EXPECT_NEAR(rho.mat.trace().real(), 1.0, 1e-10);
    EXPECT_TRUE(rho.valid());
  }
}

TEST(Sweep, MatchesPointwiseRhoReduced) {
  Rng rng(9);
  const BipartiteSystem s = random_system(2, 3, rng);
  const InitialState init = random_product_state(2, 3, rng);
  const TimeGrid grid = TimeGrid::uniform(4.0, 9);
  const std::vector<DensityMatrix> out = sweep(s, init, grid);
  for (std::size_t k = 0; k < grid.times.size(); ++k) {
    EXPECT_LE(max_abs(out[k].mat - rho_reduced(s, init, grid.times[k]).mat), 1e-12);
  }
}

TEST(DensityInvariants, HoldAlongRandomTrajectories) {
  Rng rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const BipartiteSystem s = random_system(2 + trial % 3, 1 + trial % 4, rng);
    const InitialState init = InitialState::pure(random_unit_vector(s.dim(), rng), s.dim_a, s.dim_e);
    for (const DensityMatrix& rho : sweep(s, init, TimeGrid::uniform(6.0, 25))) {
      const DensityMatrix::Diagnostics d = rho.diagnostics();
      EXPECT_LE(d.trace_dev, 1e-10);
      EXPECT_GE(d.min_eigenvalue, -1e-10);
      EXPECT_LE(d.max_eigenvalue, 1.0 + 1e-10);
    }
  }
}
