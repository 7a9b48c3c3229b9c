// Acceptance checks, one line per criterion. Usage: acceptance [criterion ...]

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "tnops/compress.hpp"
#include "tnops/expfit.hpp"
#include "tnops/groundstate.hpp"
#include "tnops/hamiltonians.hpp"
#include "tnops/optimality.hpp"
#include "tnops/peps.hpp"
#include "tnops/timeevo.hpp"

using namespace tnops;
using oracle::embed;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [FAIL " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

bool nonincreasing(const std::vector<double>& v, double slack) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] + slack) return false;
  return true;
}

const RowMatrix X = pauli_x(), Y = pauli_y(), Z = pauli_z();

Eigen::MatrixXd generic_couplings(std::size_t n, std::uint64_t seed) {
  const std::vector<double> v = generic_values(n * n, seed);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) c(i, j) = v[i * n + j];
  return c;
}

RowMatrix pair_sum(std::size_t n, const RowMatrix& x, const RowMatrix& y, const std::function<double(std::size_t, std::size_t)>& c) {
  RowMatrix h = oracle::zero(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = c(i, j);
      if (w != 0.0) h += w * embed(n, {{i, x}, {j, y}});
    }
  return h;
}

RowMatrix local_sum(std::size_t n, const RowMatrix& a) {
  RowMatrix h = oracle::zero(n);
  for (std::size_t i = 0; i < n; ++i) h += embed(n, {{i, a}});
  return h;
}

// 1: every 1D builder against a brute-force dense term sum
void criterion1(Outcome& o) {
  constexpr double kTol = 1e-12;
  constexpr double kMaxSeconds = 120.0;
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = 8;
  const RowMatrix gx = generic_matrix(2, 1), gy = generic_matrix(2, 2), gz = generic_matrix(2, 3);
  std::vector<std::pair<std::string, double>> errs;
  auto add = [&](const std::string& name, const Mpo& m, const RowMatrix& ref) { errs.emplace_back(name, oracle::rel(m, ref)); };

  {
    RowMatrix ref = oracle::zero(n);
    for (std::size_t i = 0; i + 1 < n; ++i) ref += embed(n, {{i, gx}, {i + 1, gy}});
    add("nearest-neighbor", nearest_neighbor(gx, gy, n), ref);
  }
  add("fixed-range", fixed_range(gx, gy, 3, n), pair_sum(n, gx, gy, [](auto i, auto j) { return j - i == 3 ? 1.0 : 0.0; }));
  {
    std::vector<std::pair<RowMatrix, RowMatrix>> t;
    RowMatrix ref = local_sum(n, gz);
    for (std::size_t q = 1; q < n; ++q) {
      t.emplace_back(generic_matrix(2, 10 + q), generic_matrix(2, 20 + q));
      for (std::size_t i = 0; i + q < n; ++i) ref += embed(n, {{i, t.back().first}, {i + q, t.back().second}});
    }
    add("ranged-all", ranged_all(t, gz, n), ref);
  }
  {
    PairTerms pt;
    RowMatrix ref = oracle::zero(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        pt[{i, j}] = oracle::random_hermitian(4, 100 + i * n + j);
        ref += oracle::embed_pair(n, i, j, pt[{i, j}]);
      }
    add("general two-body", general_two_body(pt, n, 2), ref);
  }
  {
    const Eigen::MatrixXd c = generic_couplings(n, 4);
    RowMatrix ref = local_sum(n, gz) + pair_sum(n, gx, gy, [&](auto i, auto j) { return c(i, j); });
    add("fixed-type", fixed_type(oracle::kron(gx, gy), c, std::vector<RowMatrix>(n, gz), n, 2), ref);
  }
  const double b = 0.63;
  add("exp-decay", exp_decay(gx, gy, b, n, false), pair_sum(n, gx, gy, [&](auto i, auto j) { return std::pow(b, double(j - i)); }));
  add("exp-decay periodic", exp_decay(gx, gy, b, n, true),
      pair_sum(n, gx, gy, [&](auto i, auto j) { return std::pow(b, double(j - i)) + std::pow(b, double(n - (j - i))); }));
  add("poly-exp", poly_exp(gx, gy, {{2.0, 0, 0.9}, {0.7, 1, 0.5}, {0.3, 2, 0.4}}, n),
      pair_sum(n, gx, gy, [](auto i, auto j) {
        const double q = double(j - i);
        return 2.0 * std::pow(0.9, q) + 0.7 * q * std::pow(0.5, q) + 0.3 * q * q * std::pow(0.4, q);
      }));
  {
    const std::vector<RowMatrix> ops = {gx, gy, gz, generic_matrix(2, 4)};
    std::vector<double> c;
    RowMatrix ref = oracle::zero(n);
    for (std::size_t i = 0; i + 4 <= n; ++i) {
      c.push_back(1.0 + 0.25 * double(i));
      ref += c.back() * embed(n, {{i, ops[0]}, {i + 1, ops[1]}, {i + 2, ops[2]}, {i + 3, ops[3]}});
    }
    add("k-body", k_body_chain(ops, c, n), ref);
  }
  {
    RowMatrix ref = -pair_sum(n, Z, Z, [](auto i, auto j) { return j == i + 1 ? 1.0 : 0.0; }) - 0.7 * local_sum(n, X);
    add("ising", ising({0.7}, n), ref);
  }
  {
    const double th = 0.35, dl = 0.1;
    auto nn = [](auto i, auto j) { return j == i + 1 ? 1.0 : 0.0; };
    RowMatrix ref = std::cos(th) * (pair_sum(n, X, X, nn) + pair_sum(n, Y, Y, nn) + dl * pair_sum(n, Z, Z, nn)) +
                    std::sin(th) * local_sum(n, Z);
    add("xxz", xxz({th, dl}, n), ref);
  }
  {
    const RydbergParams rp{0.4, -0.8, 2.0};
    const std::vector<double> x = randomize_positions(n, 0.1, 3);
    RowMatrix ref = local_sum(n, rp.omega * X + rp.delta * number_op()) +
                    pair_sum(n, number_op(), number_op(), [&](auto i, auto j) { return rp.beta0 / std::pow(x[j] - x[i], 3); });
    add("rydberg", rydberg(rp, n, x), ref);
  }
  {
    const Eigen::MatrixXd c = spin_glass_couplings({5, 0.6}, n);
    RowMatrix ref = 0.6 * local_sum(n, X) + pair_sum(n, Z, Z, [&](auto i, auto j) { return c(i, j); });
    add("spin glass", spin_glass({5, 0.6}, n), ref);
  }

  double worst = 0.0;
  for (const auto& [name, e] : errs) {
    worst = std::max(worst, e);
    o.check(e <= kTol, name + " " + sci(e));
  }
  const double secs = seconds_since(t0);
  o.check(secs < kMaxSeconds, "runtime");
  o.detail << " builders=" << errs.size() << " N=" << n << " max rel err " << sci(worst) << " (tol " << sci(kTol) << ") in "
           << sci(secs) << " s";
}

// 2: structural bond dimensions
void criterion2(Outcome& o) {
  auto eq = [&](const std::string& what, std::size_t got, std::size_t want) {
    o.check(got == want, what + " got " + std::to_string(got) + " want " + std::to_string(want));
    o.detail << " " << what << "=" << got;
  };
  const RowMatrix gx = generic_matrix(2, 1), gy = generic_matrix(2, 2);
  eq("nn", nearest_neighbor(gx, gy, 12).max_bond(), 3);
  for (std::size_t r : {2, 4}) eq("range" + std::to_string(r), fixed_range(gx, gy, r, 12).max_bond(), r + 2);
  {
    const std::size_t n = 8;
    PairTerms pt;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) pt[{i, j}] = generic_matrix(4, 7 * i + j);
    eq("two-body", general_two_body(pt, n, 2).max_bond(), 4 * (n - 1) + 2);
  }
  for (std::size_t n : {9, 10}) {
    const Mpo m = fixed_type(oracle::kron(Z, Z), generic_couplings(n, n), std::vector<RowMatrix>(n, X), n, 2);
    eq("fixed-type N=" + std::to_string(n), m.max_bond(), 2 + n / 2);
  }
  eq("exp-decay", exp_decay(gx, gy, 0.5, 10, false).max_bond(), 3);
  eq("exp-decay periodic", exp_decay(gx, gy, 0.5, 10, true).max_bond(), 4);
  eq("four-body", k_body_chain({gx, gy, Z, X}, {}, 10).max_bond(), 5);
  for (std::size_t side : {3, 5}) {
    const std::size_t L = sqrt_mode_L(side);
    const PepoBuild b = pepo_long_range(generic_couplings(side * side, 2), X, Z, side, LongRangeMode::Sqrt);
    eq("sqrt side" + std::to_string(side) + " h", b.pepo.max_horizontal_bond(), 2 * L + 6);
    eq("v", b.pepo.max_vertical_bond(), L + 6);
  }
}

// 3: bond dimensions of H^n
void criterion3(Outcome& o) {
  constexpr double kTol = 1e-10;
  const auto t0 = std::chrono::steady_clock::now();
  auto compare = [&](const std::string& name, const std::vector<PowerProbe>& got, const std::vector<std::size_t>& want) {
    o.detail << " " << name << "{";
    for (std::size_t i = 0; i < want.size(); ++i) {
      const std::size_t d = got.at(i).d_exact;
      o.detail << (i ? "," : "") << d;
      const unsigned n = got[i].power;
      if (n <= 4) {
        o.check(d == want[i], name + " n=" + std::to_string(n));
      } else if (d != want[i]) {
        const bool close = d + 1 == want[i] || d == want[i] + 1;
        o.check(close, name + " n=" + std::to_string(n) + " off by more than 1");
        o.detail << "(soft, want " << want[i] << ")";
      }
    }
    o.detail << "}";
  };
  compare("ising", probe_power_bond_dim(ising({1.0}, 40), 6, 1, kTol), {3, 5, 8, 12, 17, 23});
  compare("xxz", probe_power_bond_dim(xxz({0.35, 0.1}, 40), 3, 1, kTol), {5, 9, 16});
  o.detail << " N=40 tol " << sci(kTol) << " in " << sci(seconds_since(t0)) << " s";
}

// 4: operator Schmidt ranks of generic instances
void criterion4(Outcome& o) {
  constexpr double kTol = 1e-10;
  const std::size_t n = 8;
  const std::size_t fr = jamiolkowski_rank(fixed_range(generic_matrix(2, 1), generic_matrix(2, 2), 3, n), n / 2, kTol);
  o.check(fr == 5, "fixed-range");
  const std::size_t ed = jamiolkowski_rank(exp_decay(generic_matrix(2, 3), generic_matrix(2, 4), 0.63, n, false), n / 2, kTol);
  o.check(ed == 3, "exp-decay");
  const Mpo ft = fixed_type(oracle::kron(generic_matrix(2, 5), generic_matrix(2, 6)), generic_couplings(n, 7),
                            std::vector<RowMatrix>(n, generic_matrix(2, 8)), n, 2);
  o.detail << " fixed-range r=3 central rank " << fr << ", exp-decay " << ed << ", fixed-type cuts {";
  for (std::size_t k = 1; k < n; ++k) {
    const std::size_t r = jamiolkowski_rank(ft, k, kTol);
    o.detail << (k > 1 ? "," : "") << r;
    o.check(r == 2 + std::min(k, n - k), "fixed-type cut " + std::to_string(k));
  }
  o.detail << "} tol " << sci(kTol);
}

// 5: compression behaviour at reduced scale
void criterion5(Outcome& o) {
  constexpr double kSlack = 1e-10;         // solver noise allowed in the monotonicity checks
  constexpr double kEnergyAt12 = 1e-6;
  constexpr double kRouteSlack = 1e-12;
  constexpr double kSgEnergy = 1e-4, kSgOp = 1e-6;
  const std::size_t n = 40;
  const RydbergParams rp{0.1, 0.0, 1.0};
  const Mpo h = rydberg(rp, n);

  GroundStateOptions go;
  go.chi = 16;
  go.energy_tol = 1e-12;
  const GroundStateResult ref = ground_state(h, go);
  TruncationStudyOptions to;
  to.chi = 16;
  to.gs_tol = 1e-12;
  to.compress.init = InitMode::SvdSeed;
  std::vector<std::size_t> dl;
  for (std::size_t d = 3; d <= 14; ++d) dl.push_back(d);
  const std::vector<TruncationRow> rows = truncation_study(h, dl, ref.state, ref.energy, to);
  std::vector<double> op, fid, en;
  for (const TruncationRow& r : rows) {
    op.push_back(r.op_error);
    fid.push_back(r.gs_fidelity_error);
    en.push_back(r.energy_rel_error);
  }
  o.check(nonincreasing(op, kSlack), "(a) op error not monotone");
  o.check(nonincreasing(fid, kSlack), "(a) fidelity error not monotone");
  o.check(nonincreasing(en, kSlack), "(a) energy error not monotone");
  o.check(en[12 - 3] < kEnergyAt12, "(a) energy error at D'=12");
  o.detail << " (a) rydberg N=40 D=" << h.max_bond() << " op err D'=3.." << dl.back() << " " << sci(op.front()) << ".."
           << sci(op.back()) << ", energy err at D'=12 " << sci(en[9]) << ";";

  // exponential-sum route
  const std::vector<ExpFitResult> seq = fit_exp_sum_sequence([](double q) { return std::pow(q, -3.0); }, n - 1, 10, 1);
  const RowMatrix loc = rp.omega * X + rp.delta * number_op();
  std::vector<double> res, en_es;
  bool route_ok = true;
  for (std::size_t k = 1; k <= 10; ++k) {
    ExpSum es = seq[k - 1].sum;
    for (ExpTerm& t : es.terms) t.lambda *= rp.beta0;
    const Mpo e = expsum_mpo(es, number_op(), number_op(), n, loc);
    const TruncationRow r = evaluate_approximation(h, e, ref.state, ref.energy, to);
    res.push_back(seq[k - 1].residual);
    en_es.push_back(r.energy_rel_error);
    const std::size_t dprime = e.max_bond();
    if (dprime < 3 || dprime > 14 || op[dprime - 3] > r.op_error + kRouteSlack) route_ok = false;
  }
  o.check(nonincreasing(res, 0.0), "(b) residual not monotone");
  o.check(nonincreasing(en_es, kSlack), "(b) energy error not monotone");
  o.check(route_ok, "(b) variational worse than exp-sum");
  o.detail << " (b) residual " << sci(res.front()) << ".." << sci(res.back()) << ", energy err " << sci(en_es.front())
           << ".." << sci(en_es.back()) << ";";

  // spin glass
  const std::size_t ns = 14;
  const Mpo sg = spin_glass({0, 1.0}, ns);
  go.chi = 32;
  const GroundStateResult sref = ground_state(sg, go);
  to.chi = 32;
  std::vector<std::size_t> small;
  for (std::size_t d = 1; d <= sg.max_bond() / 2; ++d) small.push_back(d);
  o.detail << " (c) spin glass N=14 D=" << sg.max_bond() << " D'<=" << small.back() << " (op, energy)";
  for (const TruncationRow& r : truncation_study(sg, small, sref.state, sref.energy, to)) {
    o.detail << " " << sci(r.op_error) << "/" << sci(r.energy_rel_error);
    o.check(r.energy_rel_error > kSgEnergy && r.op_error > kSgOp, "(c) D'=" + std::to_string(r.target_d));
  }
}

// 6: Taylor versus Trotter on N=12 against the exact propagator
void criterion6(Outcome& o) {
  constexpr double kStateTol = 1e-8;
  constexpr double kMaxSeconds = 600.0;
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = 12, dim = std::size_t(1) << n, operator_d = 30;
  const unsigned doublings = 3;
  const XxzParams xp{0.35, 0.1};
  const Mpo h = xxz(xp, n);
  const RowMatrix hd = to_dense_matrix(h);

  // H conserves the number of up spins; diagonalize per block
  std::vector<std::vector<std::size_t>> blocks(n + 1);
  for (std::size_t i = 0; i < dim; ++i) blocks[std::popcount(i)].push_back(i);
  std::vector<Eigen::MatrixXcd> vecs(n + 1);
  std::vector<Eigen::VectorXd> vals(n + 1);
  for (std::size_t b = 0; b <= n; ++b) {
    const std::size_t m = blocks[b].size();
    Eigen::MatrixXcd hb(m, m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) hb(i, j) = hd(blocks[b][i], blocks[b][j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hb);
    vecs[b] = es.eigenvectors();
    vals[b] = es.eigenvalues();
  }
  auto exact_block = [&](std::size_t b, double t) {
    Eigen::VectorXcd ph(vals[b].size());
    for (Eigen::Index i = 0; i < ph.size(); ++i) ph(i) = std::exp(cplx(0, -t * vals[b](i)));
    return Eigen::MatrixXcd(vecs[b] * ph.asDiagonal() * vecs[b].adjoint());
  };
  // squared HS distance per dimension
  auto distance2 = [&](const Mpo& u, double t) {
    const RowMatrix a = to_dense_matrix(u);
    double d2 = 0;
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j)
        if (std::popcount(i) != std::popcount(j)) d2 += std::norm(a(i, j));
    for (std::size_t b = 0; b <= n; ++b) {
      const Eigen::MatrixXcd ue = exact_block(b, t);
      for (std::size_t i = 0; i < blocks[b].size(); ++i)
        for (std::size_t j = 0; j < blocks[b].size(); ++j) d2 += std::norm(a(blocks[b][i], blocks[b][j]) - ue(i, j));
    }
    return d2 / double(dim);
  };

  const BondModel bm = bond_model_xxz(xp, n);
  std::vector<double> taylor, trotter;
  for (double dt : {0.4, 0.2, 0.1, 0.05}) {
    TaylorPlan p;
    p.order = 8;
    p.doublings = doublings;
    p.dt = dt;
    p.operator_d = operator_d;
    taylor.push_back(distance2(plan_operator(h, p).op, dt));
    const OperatorBuild base = trotter_step_mpo(bm, p.base_step(), 4, operator_d);
    trotter.push_back(distance2(double_time(base.op, doublings, operator_d, {}).op, dt));
    o.detail << " dt=" << dt << " taylor " << sci(taylor.back()) << " trotter " << sci(trotter.back()) << ";";
    o.check(taylor.back() <= trotter.back(), "taylor worse than trotter at dt=" + sci(dt));
  }
  for (std::size_t i = 1; i < taylor.size(); ++i) o.check(taylor[i] < taylor[i - 1], "taylor error not decreasing");

  // best plan: dt = 0.05, evolve the domain wall to t = 10
  const double dt = 0.05, t_final = 10.0;
  TaylorPlan p;
  p.order = 8;
  p.doublings = doublings;
  p.dt = dt;
  p.operator_d = operator_d;
  const OperatorBuild u = plan_operator(h, p);
  std::vector<std::size_t> levels(n, 0);
  for (std::size_t i = n / 2; i < n; ++i) levels[i] = 1;
  const Mps psi0 = product_state(levels, 2);
  const EvolutionRecord rec = evolve(psi0, u.op, dt, std::size_t(std::llround(t_final / dt)), 64, {});
  const Vector v0 = to_dense_vector(psi0), vt = to_dense_vector(rec.final_state);
  const std::size_t b = n / 2;
  Eigen::VectorXcd c0(blocks[b].size());
  for (std::size_t i = 0; i < blocks[b].size(); ++i) c0(i) = v0(blocks[b][i]);
  const Eigen::VectorXcd ct = exact_block(b, t_final) * c0;
  double d2 = 0;
  for (std::size_t i = 0; i < dim; ++i)
    if (std::size_t(std::popcount(i)) != b) d2 += std::norm(vt(i));
  for (std::size_t i = 0; i < blocks[b].size(); ++i) d2 += std::norm(vt(blocks[b][i]) - ct(i));
  o.check(d2 < kStateTol, "state distance");
  const double secs = seconds_since(t0);
  o.check(secs < kMaxSeconds, "runtime");
  o.detail << " state d^2 at t=10 (dt=0.05) " << sci(d2) << " (tol " << sci(kStateTol) << ") in " << sci(secs) << " s";
}

// 7: norm and energy conservation for XXZ N=40 up to t=5
void criterion7(Outcome& o) {
  constexpr double kNormTol = 1e-6, kEnergyTol = 1e-6;
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = 40;
  const Mpo h = xxz({0.35, 0.1}, n);
  TaylorPlan p;
  p.order = 7;
  p.doublings = 5;
  p.dt = 0.1;
  p.operator_d = 24;
  const OperatorBuild u = plan_operator(h, p);
  std::vector<std::size_t> levels(n, 0);
  for (std::size_t i = n / 2; i < n; ++i) levels[i] = 1;
  Observables obs;
  obs.hamiltonian = &h;
  const EvolutionRecord rec = evolve(product_state(levels, 2), u.op, p.dt, 50, 64, obs);
  double dn = 0, de = 0;
  for (std::size_t s = 0; s < rec.times.size(); ++s) {
    dn = std::max(dn, std::abs(rec.norms[s] - 1.0));
    de = std::max(de, std::abs(rec.energies[s] - rec.energies[0]) / std::abs(rec.energies[0]));
  }
  o.check(dn < kNormTol, "norm");
  o.check(de < kEnergyTol, "energy drift");
  o.detail << " t=" << rec.times.back() << " D_U=" << u.op.max_bond() << " max |norm-1| " << sci(dn) << ", max rel dE "
           << sci(de) << " (tol " << sci(kNormTol) << "/" << sci(kEnergyTol) << ") in " << sci(seconds_since(t0)) << " s";
}

// 8: positional disorder suppresses long-range correlations
void criterion8(Outcome& o) {
  const std::size_t n = 40, steps = 40, chi = 32;
  const double dt = 0.05;
  const RydbergParams rp{1.0, -12.0, 10.0};
  auto mean_corr = [&](double sigma, std::uint64_t seed) {
    const Mpo h = rydberg(rp, n, randomize_positions(n, sigma, seed));
    TaylorPlan p;
    p.order = 7;
    p.doublings = 5;
    p.dt = dt;
    p.operator_d = 30;
    p.compress.init = InitMode::SvdSeed;
    const OperatorBuild u = plan_operator(h, p);
    Observables obs;
    obs.every = steps;
    for (std::size_t i = 15; i <= 25; ++i)
      for (std::size_t j = i + 5; j <= 25; ++j) obs.pairs.push_back({i, j});
    const EvolutionRecord rec = evolve(product_state(std::vector<std::size_t>(n, 0), 2), u.op, dt, steps, chi, obs);
    double s = 0;
    for (double c : rec.correlations.back()) s += std::abs(c);
    return s / double(obs.pairs.size());
  };
  o.detail << " mean |c_ij| at t=" << dt * steps << " (sigma 0.01 vs 0.1):";
  for (std::uint64_t seed : {0, 1, 2}) {
    const double lo = mean_corr(0.01, seed), hi = mean_corr(0.1, seed);
    o.detail << " seed " << seed << " " << sci(lo) << " vs " << sci(hi) << ";";
    o.check(hi < lo, "seed " + std::to_string(seed));
  }
}

// 9: PEPO builders, boundary contraction, edge count
void criterion9(Outcome& o) {
  constexpr double kDenseTol = 1e-11, kBoundaryTol = 1e-9, kCountTol = 1e-12;
  for (std::size_t side : {2, 3}) {
    const std::size_t ns = side * side;
    const Eigen::MatrixXd c = generic_couplings(ns, 40 + side);
    const RowMatrix x = generic_matrix(2, 41), y = generic_matrix(2, 42);
    RowMatrix nn = oracle::zero(ns);
    for (std::size_t r = 0; r < side; ++r)
      for (std::size_t q = 0; q < side; ++q) {
        const std::size_t i = r * side + q;
        if (q + 1 < side) nn += embed(ns, {{i, x}, {i + 1, x}});
        if (r + 1 < side) nn += embed(ns, {{i, x}, {i + side, x}});
      }
    const RowMatrix lr = pair_sum(ns, x, y, [&](auto i, auto j) { return c(i, j); });
    const double e_nn = oracle::rel(pepo_to_dense(pepo_nearest_neighbor(x, side)), nn);
    const double e_lin = oracle::rel(pepo_to_dense(pepo_long_range(c, x, y, side, LongRangeMode::Linear).pepo), lr);
    const double e_sq = oracle::rel(pepo_to_dense(pepo_long_range(c, x, y, side, LongRangeMode::Sqrt).pepo), lr);
    const std::string g = std::to_string(side) + "x" + std::to_string(side);
    o.detail << " " << g << " nn " << sci(e_nn) << " linear " << sci(e_lin) << " sqrt " << sci(e_sq) << ";";
    o.check(e_nn <= kDenseTol, g + " nearest-neighbor");
    o.check(e_lin <= kDenseTol, g + " linear");
    o.check(e_sq <= kDenseTol, g + " sqrt");
  }
  {
    const Peps psi = random_peps(3, 3, 2, 2, 7);
    const Pepo h = pepo_nearest_neighbor(X, 3);
    const Vector v = peps_to_dense(psi);
    const cplx exact = v.dot(pepo_to_dense(h) * v);
    o.detail << " boundary 3x3 rel err vs D_cut";
    double last = 0;
    for (std::size_t dc : {1, 2, 4, 8, 16}) {
      last = std::abs(boundary_contract_expectation(psi, h, dc).value - exact) / std::abs(exact);
      o.detail << " " << dc << ":" << sci(last);
    }
    o.check(last <= kBoundaryTol, "boundary convergence");
    o.detail << ";";
  }
  for (std::size_t side : {2, 3, 4}) {
    const Peps psi = product_peps(side, side, std::vector<Vector>(side * side, Vector::Unit(2, 0)));
    const double val = boundary_contract_expectation(psi, pepo_nearest_neighbor(Z, side), 4).value.real();
    const double edges = double(2 * side * (side - 1));
    o.check(std::abs(val - edges) <= kCountTol, "edge count side " + std::to_string(side));
    o.detail << " edges " << side << "x" << side << " " << val;
  }
}

// 10: exponential-sum fit of q^-3
void criterion10(Outcome& o) {
  constexpr double kResidualAt10 = 1e-4;
  const std::vector<ExpFitResult> seq = fit_exp_sum_sequence([](double q) { return std::pow(q, -3.0); }, 99, 10, 1);
  std::vector<double> r;
  o.detail << " residuals";
  for (const ExpFitResult& f : seq) {
    r.push_back(f.residual);
    o.detail << " " << sci(f.residual);
  }
  o.check(r.size() == 10, "sequence length");
  o.check(nonincreasing(r, 0.0), "residual not monotone");
  o.check(r.back() < kResidualAt10, "residual at n=10");
  o.detail << " (n=10 tol " << sci(kResidualAt10) << ")";
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<void (*)(Outcome&)> all = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                               criterion6, criterion7, criterion8, criterion9, criterion10};
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (int i = 1; i <= 10; ++i) which.push_back(i);
  bool ok = true;
  for (int k : which) {
    if (k < 1 || k > 10) {
      std::fprintf(stderr, "no criterion %d\n", k);
      return 2;
    }
    Outcome o;
    try {
      all[k - 1](o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " exception: " << e.what();
    }
    std::printf("criterion %d: %s%s\n", k, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
    std::fflush(stdout);
    ok = ok && o.pass;
  }
  return ok ? 0 : 1;
}
