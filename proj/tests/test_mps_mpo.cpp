#include <gtest/gtest.h>

#include "oracle.hpp"
#include "tnops/mps.hpp"

using namespace tnops;

TEST(Mps, CanonicalizePreservesState) {
  const Mps s = random_mps(6, 2, 4, 1);
  const Vector v = to_dense_vector(s);
  const Mps c = canonicalize(s, 3);
  EXPECT_LT((to_dense_vector(c) - v).norm(), 1e-12);
  EXPECT_NEAR(std::real(overlap(c, s)), v.squaredNorm(), 1e-12 * v.squaredNorm());
  EXPECT_NEAR(norm(s), v.norm(), 1e-12 * v.norm());
}

TEST(Mps, OverlapMatchesDense) {
  const Mps a = random_mps(8, 2, 3, 2), b = random_mps(8, 2, 4, 3);
  EXPECT_LT(std::abs(overlap(a, b) - to_dense_vector(a).dot(to_dense_vector(b))), 1e-12);
}

TEST(Mps, ApplyAndExpectationMatchDense) {
  const Mpo m = random_mpo(6, 2, 3, 4);
  const Mps s = random_mps(6, 2, 5, 5);
  const RowMatrix M = to_dense_matrix(m);
  const Vector v = to_dense_vector(s);
  EXPECT_LT((to_dense_vector(apply_mpo(m, s)) - M * v).norm(), 1e-11 * (M * v).norm());
  EXPECT_LT(std::abs(expectation(s, m, s) - v.dot(M * v)), 1e-11 * std::abs(v.dot(M * v)));
  const ApplyCompressResult ac = apply_and_compress(m, s, 15);
  EXPECT_LT((to_dense_vector(ac.state) - M * v).norm() / (M * v).norm(), 1e-10);
}

TEST(Mps, GhzToBondOneLosesHalf) {
  Mps ghz = product_state({0, 0, 0, 0}, 2);
  const Mps ones = product_state({1, 1, 1, 1}, 2);
  const Vector v = (to_dense_vector(ghz) + to_dense_vector(ones)) / std::sqrt(2.0);
  ghz = from_dense_vector(v, 4, 2);
  for (CompressMode mode : {CompressMode::Svd, CompressMode::Variational}) {
    const MpsCompressResult r = compress_mps(ghz, 1, mode);
    EXPECT_NEAR(r.distance * r.distance, 0.5, 1e-10);
  }
}

TEST(Mps, VariationalCompressionNearSchmidtOptimum) {
  const Mps s = random_mps(8, 2, 8, 6);
  const MpsCompressResult svd = compress_mps(s, 4, CompressMode::Svd);
  const MpsCompressResult var = compress_mps(s, 4, CompressMode::Variational);
  const Vector v = to_dense_vector(s);
  const double true_var = (to_dense_vector(var.state) - v).norm() / v.norm();
  EXPECT_NEAR(var.distance, true_var, 1e-8);
  EXPECT_LE(var.distance, svd.distance + 1e-6);
}

TEST(Mpo, AlgebraMatchesDense) {
  const Mpo a = random_mpo(5, 2, 3, 1), b = random_mpo(5, 2, 2, 2);
  const RowMatrix A = to_dense_matrix(a), B = to_dense_matrix(b);
  EXPECT_LT(oracle::rel(multiply(a, b), A * B), 1e-12);
  EXPECT_LT(oracle::rel(add(a, b), A + B), 1e-12);
  EXPECT_LT(oracle::rel(adjoint(a), A.adjoint()), 1e-12);
  EXPECT_LT(oracle::rel(scale(a, cplx(0.5, -2.0)), cplx(0.5, -2.0) * A), 1e-12);
  EXPECT_LT(std::abs(trace(a) - A.trace()), 1e-12 * A.norm());
  EXPECT_LT(std::abs(hs_inner(a, b) - (A.adjoint() * B).trace()), 1e-10);
  EXPECT_NEAR(hs_norm(a), A.norm(), 1e-12 * A.norm());
  EXPECT_EQ(add(a, b).max_bond(), 5u);
  EXPECT_EQ(multiply(a, b).max_bond(), 6u);
}

TEST(Mpo, IsingSquaredMatchesDense) {
  const Mpo h = ising({1.0}, 6);
  const RowMatrix H = to_dense_matrix(h);
  EXPECT_LT(oracle::rel(multiply(h, h), H * H), 1e-11);
}

TEST(Mpo, VectorizeRoundTrip) {
  const Mpo a = random_mpo(4, 2, 3, 7);
  EXPECT_LT(oracle::rel(devectorize(vectorize(a), 2), to_dense_matrix(a)), 1e-14);
}

TEST(Mpo, RulesNearestNeighborDense) {
  const Mpo m = from_rules(nearest_neighbor_rules(pauli_z(), pauli_z()), 3, 2);
  const RowMatrix ref = oracle::embed(3, {{0, pauli_z()}, {1, pauli_z()}}) + oracle::embed(3, {{1, pauli_z()}, {2, pauli_z()}});
  EXPECT_LT(oracle::rel(m, ref), 1e-15);
}

TEST(Mpo, ExpDecayRulesCoupling) {
  const Mpo m = from_rules(exp_decay_rules(pauli_x(), pauli_z(), 0.5, 4, false), 4, 2);
  EXPECT_NEAR(std::real(oracle::coefficient(to_dense_matrix(m), 4, 0, 2, pauli_x(), pauli_z())), 0.25, 1e-14);
}

TEST(Mpo, DuplicateRuleIsAmbiguous) {
  RuleTable rt = nearest_neighbor_rules(pauli_x(), pauli_x());
  rt.rules.push_back(rt.rules.front());
  EXPECT_THROW(from_rules(rt, 4, 2), AmbiguityError);
}

TEST(Mpo, UnknownLabelIsConfigError) {
  RuleTable rt = nearest_neighbor_rules(pauli_x(), pauli_x());
  rt.rules.push_back({"1", "nope", pauli_x(), 1.0});
  EXPECT_THROW(from_rules(rt, 4, 2), ConfigError);
}

TEST(Mpo, BuildersAreUpperTriangular) {
  EXPECT_TRUE(is_upper_triangular(ising({1.0}, 6)));
  EXPECT_TRUE(is_upper_triangular(xxz({0.35, 0.1}, 6)));
  EXPECT_TRUE(is_upper_triangular(fixed_range(pauli_x(), pauli_z(), 3, 7)));
}

TEST(Mpo, DenseGuard) { EXPECT_THROW(to_dense_matrix(identity_mpo(13, 2)), SizeGuardError); }

TEST(Mpo, RepresentabilityCap) {
  EXPECT_EQ(representability_cap(6, 2, 0), 4u);
  EXPECT_EQ(representability_cap(6, 2, 2), 64u);
  EXPECT_EQ(representability_cap(6, 2, 4), 4u);
}
