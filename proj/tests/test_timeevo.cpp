#include <gtest/gtest.h>

#include <cmath>

#include "oracle.hpp"
#include "tnops/timeevo.hpp"

using namespace tnops;

TEST(TimeEvo, FirstOrderTaylorIsExact) {
  const Mpo h = ising({1.0}, 4);
  const OperatorBuild u = taylor_mpo(h, 0.01, 1, 30, {});
  const RowMatrix ref = RowMatrix::Identity(16, 16) - cplx(0, 0.01) * to_dense_matrix(h);
  EXPECT_LT((to_dense_matrix(u.op) - ref).norm(), 1e-14);
}

TEST(TimeEvo, SeventhOrderTaylor) {
  const Mpo h = xxz({0.35, 0.1}, 6);
  const OperatorBuild u = taylor_mpo(h, 0.01, 7, 64, {});
  EXPECT_LT(oracle::rel(u.op, expm_hermitian(to_dense_matrix(h), cplx(0, -0.01))), 1e-12);
}

TEST(TimeEvo, DoubledPlan) {
  const Mpo h = ising({1.0}, 10);
  TaylorPlan p;
  p.order = 9;
  p.doublings = 4;
  p.dt = 0.2;
  p.operator_d = 64;
  EXPECT_DOUBLE_EQ(p.base_step(), 0.0125);
  const OperatorBuild u = plan_operator(h, p);
  EXPECT_LT(oracle::rel(u.op, expm_hermitian(to_dense_matrix(h), cplx(0, -0.2))), 1e-9);
}

TEST(TimeEvo, TrotterTwoSitesExact) {
  const OperatorBuild u = trotter_step_mpo(bond_model_xxz({0.35, 0.1}, 2), 0.1, 2);
  EXPECT_LT(oracle::rel(u.op, expm_hermitian(to_dense_matrix(xxz({0.35, 0.1}, 2)), cplx(0, -0.1))), 1e-13);
}

TEST(TimeEvo, FourthOrderTrotterSlope) {
  const BondModel bm = bond_model_xxz({0.35, 0.1}, 8);
  const RowMatrix h = to_dense_matrix(xxz({0.35, 0.1}, 8));
  std::vector<double> err;
  for (double dt : {0.1, 0.05, 0.025})
    err.push_back(oracle::rel(trotter_step_mpo(bm, dt, 4, 256).op, expm_hermitian(h, cplx(0, -dt))));
  for (std::size_t i = 1; i < err.size(); ++i) EXPECT_GE(std::log2(err[i - 1] / err[i]), 4.5);
}

TEST(TimeEvo, BondModelMatchesHamiltonian) {
  HamiltonianSpec s;
  s.kind = HamiltonianKind::Model;
  s.model.name = "ising";
  s.model.B = 0.6;
  s.n_sites = 5;
  const BondModel bm = bond_model(s);
  RowMatrix sum = oracle::zero(5);
  for (std::size_t b = 0; b < bm.bonds.size(); ++b) sum += oracle::embed_pair(5, b, b + 1, bm.bonds[b]);
  EXPECT_LT(oracle::rel(sum, to_dense_matrix(ising({0.6}, 5))), 1e-13);
  s.model.name = "rydberg";
  EXPECT_THROW(bond_model(s), UnsupportedError);
}

TEST(TimeEvo, EvolutionMatchesDenseState) {
  const std::size_t n = 10;
  const Mpo h = ising({1.0}, n);
  TaylorPlan p;
  p.order = 9;
  p.doublings = 3;
  p.dt = 0.1;
  p.operator_d = 40;
  const OperatorBuild u = plan_operator(h, p);
  Vector v(2);
  v << std::cos(0.3), std::sin(0.3);
  const Mps psi0 = product_state(std::vector<Vector>(n, v));
  Observables obs;
  obs.hamiltonian = &h;
  obs.pairs = {{2, 7}};
  const EvolutionRecord rec = evolve(psi0, u.op, 0.1, 10, 64, obs);
  const Vector ref = expm_hermitian(to_dense_matrix(h), cplx(0, -1.0)) * to_dense_vector(psi0);
  const Vector got = to_dense_vector(rec.final_state);
  EXPECT_GT(std::norm(ref.dot(got)) / (ref.squaredNorm() * got.squaredNorm()), 1 - 1e-8);
  ASSERT_EQ(rec.times.size(), 11u);
  for (std::size_t k = 0; k < rec.times.size(); ++k) {
    EXPECT_NEAR(rec.norms[k], 1.0, 1e-9);
    EXPECT_NEAR(rec.energies[k], rec.energies[0], 1e-8 * std::abs(rec.energies[0]));
  }
  // connected correlation against the dense final state
  const RowMatrix nn = oracle::embed(n, {{2, number_op()}, {7, number_op()}});
  const RowMatrix n2 = oracle::embed(n, {{2, number_op()}}), n7 = oracle::embed(n, {{7, number_op()}});
  const Vector r = ref / ref.norm();
  const double c = std::real(r.dot(nn * r)) - std::real(r.dot(n2 * r)) * std::real(r.dot(n7 * r));
  EXPECT_NEAR(rec.correlations.back()[0], c, 1e-8);
}

TEST(TimeEvo, PowerProbeSmall) {
  const std::vector<PowerProbe> p = probe_power_bond_dim(ising({1.0}, 12), 3);
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p[0].d_exact, 3u);
  EXPECT_EQ(p[1].d_exact, 5u);
  EXPECT_EQ(p[2].d_exact, 8u);
}
