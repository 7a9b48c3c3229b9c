#include <gtest/gtest.h>

#include <cmath>

#include "oracle.hpp"
#include "tnops/compress.hpp"
#include "tnops/expfit.hpp"
#include "tnops/groundstate.hpp"

using namespace tnops;

TEST(ExpFit, RecoversSingleExponential) {
  const ExpFitResult r = fit_exp_sum([](double q) { return std::pow(0.6, q); }, 10, 1, 0);
  ASSERT_EQ(r.sum.terms.size(), 1u);
  EXPECT_NEAR(r.sum.terms[0].beta, 0.6, 1e-8);
  EXPECT_NEAR(r.sum.terms[0].lambda, 1.0, 1e-7);
  EXPECT_LT(r.residual, 1e-10);
}

TEST(ExpFit, TwoTermCouplingExtracted) {
  const auto f = [](double q) { return 2 * std::pow(0.9, q) + std::pow(0.3, q); };
  const ExpFitResult r = fit_exp_sum(f, 20, 2, 0);
  const Mpo m = expsum_mpo(r.sum, pauli_x(), pauli_z(), 6);
  const RowMatrix h = to_dense_matrix(m);
  EXPECT_NEAR(std::real(oracle::coefficient(h, 6, 1, 4, pauli_x(), pauli_z())), f(3), 1e-10);
}

TEST(ExpFit, SequenceNonincreasing) {
  const auto seq = fit_exp_sum_sequence([](double q) { return std::pow(q, -3.0); }, 60, 5, 3);
  ASSERT_EQ(seq.size(), 5u);
  for (std::size_t i = 1; i < seq.size(); ++i) EXPECT_LE(seq[i].residual, seq[i - 1].residual);
}

TEST(ExpFit, MpoBondAndLocal) {
  ExpSum es;
  es.terms = {{1.0, 0.5}};
  EXPECT_EQ(expsum_mpo(es, pauli_x(), pauli_x(), 5).max_bond(), 3u);
  es.terms.assign(10, {0.1, 0.5});
  EXPECT_EQ(expsum_mpo(es, pauli_x(), pauli_x(), 30).max_bond(), 12u);
  ExpSum one;
  one.terms = {{1.0, 0.5}};
  const Mpo m = expsum_mpo(one, pauli_x(), pauli_x(), 4, pauli_z());
  RowMatrix ref = oracle::zero(4);
  for (std::size_t i = 0; i < 4; ++i) {
    ref += oracle::embed(4, {{i, pauli_z()}});
    for (std::size_t j = i + 1; j < 4; ++j) ref += std::pow(0.5, j - i) * oracle::embed(4, {{i, pauli_x()}, {j, pauli_x()}});
  }
  EXPECT_LT(oracle::rel(m, ref), 1e-12);
}

TEST(ExpFit, InhomogeneousPositions) {
  ExpSum es;
  es.terms = {{1.0, 0.5}};
  const RowMatrix h = to_dense_matrix(expsum_mpo_inhomogeneous(es, pauli_x(), pauli_z(), {1.0, 1.5, 3.0}));
  EXPECT_NEAR(std::real(oracle::coefficient(h, 3, 0, 2, pauli_x(), pauli_z())), 0.25, 1e-12);

  ExpSum three;
  three.terms = {{0.7, 0.8}, {0.2, 0.4}, {-0.1, 0.6}};
  const std::vector<double> x = {0.9, 2.1, 2.8, 4.3, 5.0, 6.2};
  const RowMatrix g = to_dense_matrix(expsum_mpo_inhomogeneous(three, pauli_x(), pauli_z(), x));
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = i + 1; j < 6; ++j) {
      double c = 0;
      for (const ExpTerm& t : three.terms) c += t.lambda * std::pow(t.beta, x[j] - x[i]);
      EXPECT_NEAR(std::real(oracle::coefficient(g, 6, i, j, pauli_x(), pauli_z())), c, 1e-10);
    }
}

TEST(Compress, ExactBondIsLossless) {
  const Mpo r = rydberg({1, 0, 1}, 8);
  for (InitMode init : {InitMode::Random, InitMode::SvdSeed}) {
    CompressOptions o;
    o.target_d = r.max_bond();
    o.init = init;
    o.seed = 3;
    EXPECT_LT(compress_mpo(r, o).distance, 1e-10);
  }
}

TEST(Compress, DistanceMatchesDense) {
  const Mpo a = random_mpo(6, 2, 4, 1);
  CompressOptions o;
  o.target_d = 2;
  o.init = InitMode::SvdSeed;
  const CompressResult r = compress_mpo(a, o);
  const RowMatrix A = to_dense_matrix(a);
  EXPECT_NEAR(r.distance, oracle::rel(r.mpo, A), 1e-10);
  EXPECT_NEAR(mpo_distance(a, r.mpo), r.distance, 1e-10);
  EXPECT_NEAR(mpo_distance_inner(a, r.mpo), r.distance, 1e-6);
}

TEST(Compress, TraceNonincreasingAndErrorDecreasingInD) {
  const Mpo a = random_mpo(6, 2, 6, 2);
  double prev = 2.0;
  for (std::size_t d = 1; d <= 6; ++d) {
    CompressOptions o;
    o.target_d = d;
    o.init = InitMode::SvdSeed;
    o.record_trace = true;
    const CompressResult r = compress_mpo(a, o);
    for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1] * (1 + 1e-10) + 1e-7);
    EXPECT_LE(r.distance, prev + 1e-12);
    prev = r.distance;
  }
  EXPECT_LT(prev, 1e-10);
}

TEST(Compress, ProductWithoutFullBond) {
  const Mpo h = ising({1.0}, 8);
  CompressOptions o;
  o.target_d = 5;
  o.init = InitMode::SvdSeed;
  const CompressResult r = compress_product(h, h, o);
  const RowMatrix H = to_dense_matrix(h);
  EXPECT_LT(oracle::rel(r.mpo, H * H), 1e-10);
  EXPECT_TRUE(std::isnan(compress_product(h, h, o, false).distance));
}

TEST(GroundState, MatchesDenseIsingAndXxz) {
  GroundStateOptions o;
  o.chi = 16;
  const Mpo is = ising({1.0}, 10);
  const double e_is = oracle::lowest_eigenvalue(to_dense_matrix(is));
  const GroundStateResult r = ground_state(is, o);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.energy, e_is, 1e-8 * std::abs(e_is));
  EXPECT_GE(r.energy, e_is - 1e-10);
  EXPECT_NEAR(energy(r.state, is), r.energy, 1e-10);

  const Mpo xx = xxz({0.35, 0.1}, 8);
  const double e_xx = oracle::lowest_eigenvalue(to_dense_matrix(xx));
  EXPECT_NEAR(ground_state(xx, o).energy, e_xx, 1e-8 * std::abs(e_xx));
}

TEST(GroundState, LargerChiNeverWorse) {
  const Mpo h = spin_glass({4, 0.7}, 8);
  double prev = 1e300;
  for (std::size_t chi : {2, 4, 8, 16}) {
    GroundStateOptions o;
    o.chi = chi;
    o.seed = 1;
    const double e = ground_state(h, o).energy;
    EXPECT_LE(e, prev + 1e-10);
    prev = e;
  }
}

TEST(GroundState, TrivialExpectations) {
  const Mps s = normalized(random_mps(5, 2, 3, 9));
  EXPECT_NEAR(std::real(expectation(s, identity_mpo(5, 2), s)), 1.0, 1e-12);
  const Mpo zz = scale(nearest_neighbor(pauli_z(), pauli_z(), 2), -1.0);
  EXPECT_NEAR(energy(product_state({0, 0}, 2), zz), -1.0, 1e-14);
  const Mps r = random_mps(6, 2, 4, 10);
  const Vector v = to_dense_vector(r);
  const Mpo h = ising({1.0}, 6);
  EXPECT_NEAR(energy(r, h), std::real(v.dot(to_dense_matrix(h) * v)) / v.squaredNorm(), 1e-11);
  EXPECT_TRUE(is_hermitian(h));
  EXPECT_FALSE(is_hermitian(nearest_neighbor(lowering_op(), pauli_x(), 4)));
}
