#include <gtest/gtest.h>

#include <cmath>

#include "oracle.hpp"
#include "tnops/hamiltonians.hpp"
#include "tnops/optimality.hpp"

using namespace tnops;
using oracle::embed;

namespace {

const RowMatrix X = pauli_x(), Y = pauli_y(), Z = pauli_z();

RowMatrix coupling_sum(std::size_t n, const RowMatrix& x, const RowMatrix& y, const std::function<double(std::size_t)>& f) {
  RowMatrix h = oracle::zero(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) h += f(j - i) * embed(n, {{i, x}, {j, y}});
  return h;
}

}  // namespace

TEST(Hamiltonians, NearestNeighborDenseAndBond) {
  RowMatrix ref = oracle::zero(6);
  for (std::size_t i = 0; i + 1 < 6; ++i) ref += embed(6, {{i, Z}, {i + 1, Z}});
  const Mpo m = nearest_neighbor(Z, Z, 6);
  EXPECT_LT(oracle::rel(m, ref), 1e-12);
  EXPECT_EQ(m.max_bond(), 3u);
}

TEST(Hamiltonians, FixedRange) {
  EXPECT_EQ(fixed_range(X, Z, 4, 9).max_bond(), 6u);
  const RowMatrix gx = generic_matrix(2, 1), gy = generic_matrix(2, 2);
  RowMatrix ref = oracle::zero(7);
  for (std::size_t i = 0; i + 3 < 7; ++i) ref += embed(7, {{i, gx}, {i + 3, gy}});
  EXPECT_LT(oracle::rel(fixed_range(gx, gy, 3, 7), ref), 1e-12);
}

TEST(Hamiltonians, RangedAllWithLocal) {
  const std::size_t n = 7;
  RowMatrix ref = oracle::zero(n);
  for (std::size_t i = 0; i < n; ++i) ref += embed(n, {{i, Z}});
  for (std::size_t i = 0; i + 1 < n; ++i) ref += embed(n, {{i, X}, {i + 1, Y}});
  for (std::size_t i = 0; i + 2 < n; ++i) ref += embed(n, {{i, X}, {i + 2, Z}});
  EXPECT_LT(oracle::rel(ranged_all({{X, Y}, {X, Z}}, Z, n), ref), 1e-12);
}

TEST(Hamiltonians, RangedAllRandomFive) {
  const std::size_t n = 8;
  std::vector<std::pair<RowMatrix, RowMatrix>> t;
  RowMatrix ref = oracle::zero(n);
  for (std::size_t q = 1; q <= 5; ++q) {
    t.emplace_back(generic_matrix(2, 10 + q), generic_matrix(2, 20 + q));
    for (std::size_t i = 0; i + q < n; ++i) ref += embed(n, {{i, t.back().first}, {i + q, t.back().second}});
  }
  EXPECT_LT(oracle::rel(ranged_all(t, std::nullopt, n), ref), 1e-12);
}

TEST(Hamiltonians, GeneralTwoBody) {
  const std::size_t n = 6;
  PairTerms pt;
  RowMatrix ref = oracle::zero(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      pt[{i, j}] = oracle::random_hermitian(4, 100 + i * n + j);
      ref += oracle::embed_pair(n, i, j, pt[{i, j}]);
    }
  EXPECT_LT(oracle::rel(general_two_body(pt, n, 2), ref), 1e-11);
  PairTerms big;
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = i + 1; j < 10; ++j) big[{i, j}] = generic_matrix(4, i * 10 + j);
  EXPECT_EQ(general_two_body(big, 10, 2).max_bond(), 38u);
}

TEST(Hamiltonians, FixedTypeWorkedModel) {
  const std::size_t n = 8;
  Rng rng(5);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  RowMatrix ref = oracle::zero(n);
  for (std::size_t i = 0; i < n; ++i) {
    ref += embed(n, {{i, X}});
    for (std::size_t j = i + 1; j < n; ++j) {
      c(i, j) = rng.normal();
      ref += c(i, j) * embed(n, {{i, Z}, {j, Z}});
    }
  }
  const RowMatrix zz = oracle::kron(Z, Z);
  const Mpo m = fixed_type(zz, c, std::vector<RowMatrix>(n, X), n, 2);
  EXPECT_LT(oracle::rel(m, ref), 1e-12);
  EXPECT_EQ(m.max_bond(), 2u + n / 2);
  EXPECT_EQ(fixed_type_max_bond(10, 1), 7u);
}

TEST(Hamiltonians, ExpDecayOpenAndPeriodic) {
  const std::size_t n = 6;
  const double b = 0.7;
  EXPECT_LT(oracle::rel(exp_decay(X, Z, b, n, false), coupling_sum(n, X, Z, [&](std::size_t q) { return std::pow(b, q); })),
            1e-12);
  const RowMatrix per = to_dense_matrix(exp_decay(X, Z, b, n, true));
  EXPECT_LT(oracle::rel(per, coupling_sum(n, X, Z, [&](std::size_t q) { return std::pow(b, q) + std::pow(b, n - q); })),
            1e-12);
  EXPECT_NEAR(std::real(oracle::coefficient(per, n, 1, 3, X, Z)), b * b + std::pow(b, 4), 1e-12);
  EXPECT_EQ(exp_decay(X, Z, b, n, false).max_bond(), 3u);
  EXPECT_EQ(exp_decay(X, Z, b, n, true).max_bond(), 4u);
}

TEST(Hamiltonians, PolyExpCoefficients) {
  const RowMatrix m1 = to_dense_matrix(poly_exp(X, Z, {{1.0, 1, 0.6}}, 8));
  EXPECT_NEAR(std::real(oracle::coefficient(m1, 8, 0, 5, X, Z)), 5 * std::pow(0.6, 5), 1e-12);
  const std::size_t n = 7;
  const RowMatrix m2 = to_dense_matrix(poly_exp(X, Z, {{2.0, 0, 0.9}, {1.0, 1, 0.5}}, n));
  for (std::size_t q = 1; q <= 6; ++q)
    EXPECT_NEAR(std::real(oracle::coefficient(m2, n, 0, q, X, Z)), 2 * std::pow(0.9, q) + q * std::pow(0.5, q), 1e-12);
}

TEST(Hamiltonians, KBodyChain) {
  EXPECT_EQ(k_body_chain({Z, Z, Z, Z}, {}, 8).max_bond(), 5u);
  const std::size_t n = 7;
  const std::vector<RowMatrix> ops = {generic_matrix(2, 1), generic_matrix(2, 2), generic_matrix(2, 3)};
  const std::vector<double> c = {1, 2, 3, 4, 5};
  RowMatrix ref = oracle::zero(n);
  for (std::size_t i = 0; i + 3 <= n; ++i) ref += c[i] * embed(n, {{i, ops[0]}, {i + 1, ops[1]}, {i + 2, ops[2]}});
  EXPECT_LT(oracle::rel(k_body_chain(ops, c, n), ref), 1e-12);
}

TEST(Hamiltonians, ModelsMatchDense) {
  const std::size_t n = 5;
  RowMatrix is = oracle::zero(n), xx = oracle::zero(n);
  const double ct = std::cos(0.35), st = std::sin(0.35);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    is -= embed(n, {{i, Z}, {i + 1, Z}});
    xx += ct * (embed(n, {{i, X}, {i + 1, X}}) + embed(n, {{i, Y}, {i + 1, Y}}) + 0.1 * embed(n, {{i, Z}, {i + 1, Z}}));
  }
  for (std::size_t i = 0; i < n; ++i) {
    is -= 0.8 * embed(n, {{i, X}});
    xx += st * embed(n, {{i, Z}});
  }
  EXPECT_LT(oracle::rel(ising({0.8}, n), is), 1e-12);
  EXPECT_LT(oracle::rel(xxz({0.35, 0.1}, n), xx), 1e-12);
}

TEST(Hamiltonians, RydbergAndSpinGlass) {
  const std::size_t n = 6;
  const RydbergParams rp{0.3, -0.7, 2.0};
  const std::vector<double> x = randomize_positions(n, 0.1, 4);
  RowMatrix ref = oracle::zero(n);
  for (std::size_t j = 0; j < n; ++j) {
    ref += embed(n, {{j, rp.omega * X + rp.delta * number_op()}});
    for (std::size_t k = j + 1; k < n; ++k)
      ref += rp.beta0 / std::pow(x[k] - x[j], 3) * embed(n, {{j, number_op()}, {k, number_op()}});
  }
  EXPECT_LT(oracle::rel(rydberg(rp, n, x), ref), 1e-12);

  const Eigen::MatrixXd c = spin_glass_couplings({9, 1.0}, n);
  RowMatrix sg = oracle::zero(n);
  for (std::size_t j = 0; j < n; ++j) {
    sg += embed(n, {{j, X}});
    for (std::size_t k = j + 1; k < n; ++k) sg += c(j, k) * embed(n, {{j, Z}, {k, Z}});
  }
  EXPECT_LT(oracle::rel(spin_glass({9, 1.0}, n), sg), 1e-12);
  EXPECT_EQ(rydberg({1, 0, 1}, 100).max_bond(), 52u);
  EXPECT_EQ(spin_glass({0, 1}, 30).max_bond(), 17u);
}

TEST(Hamiltonians, PositionsStatistics) {
  const std::vector<double> x0 = randomize_positions(20, 0.0, 1);
  for (std::size_t j = 0; j < 20; ++j) EXPECT_DOUBLE_EQ(x0[j], double(j + 1));
  EXPECT_EQ(randomize_positions(50, 0.1, 3), randomize_positions(50, 0.1, 3));
  const std::size_t n = 10000;
  const std::vector<double> x = randomize_positions(n, 0.2, 7);
  double s2 = 0;
  for (std::size_t j = 0; j < n; ++j) s2 += (x[j] - double(j + 1)) * (x[j] - double(j + 1));
  EXPECT_NEAR(std::sqrt(s2 / n), 0.2, 0.01);
}

TEST(Hamiltonians, SpecDispatch) {
  HamiltonianSpec s;
  s.kind = HamiltonianKind::NearestNeighbor;
  s.n_sites = 5;
  s.ops = {X, X};
  EXPECT_EQ(build_hamiltonian(s).max_bond(), 3u);
  s.kind = HamiltonianKind::Model;
  s.model.name = "nope";
  EXPECT_THROW(build_hamiltonian(s), ConfigError);
  for (HamiltonianKind k : {HamiltonianKind::NearestNeighbor, HamiltonianKind::PolyExp, HamiltonianKind::Model})
    EXPECT_EQ(hamiltonian_kind_from_name(hamiltonian_kind_name(k)), k);
  EXPECT_THROW(hamiltonian_kind_from_name("bogus"), ConfigError);
}

TEST(Hamiltonians, HermitianInputsGiveHermitianMpos) {
  for (const Mpo& m : {ising({0.3}, 6), xxz({0.2, 0.5}, 6), rydberg({1, 0.5, 1}, 6), spin_glass({2, 0.4}, 6)}) {
    const RowMatrix h = to_dense_matrix(m);
    EXPECT_LT((h - h.adjoint()).norm(), 1e-12 * h.norm());
  }
}
