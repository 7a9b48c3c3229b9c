#include "tnops/timeevo.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace tnops {

namespace {

constexpr std::size_t kExactDistanceBond = 256;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

// a*b, compressed to operator_d when the exact bond would exceed it.
Mpo product_to(const Mpo& a, const Mpo& b, std::size_t operator_d, const CompressOptions& opt, OperatorBuild& log) {
  if (a.max_bond() * b.max_bond() <= operator_d) return multiply(a, b);
  CompressOptions co = opt;
  co.target_d = operator_d;
  co.init = InitMode::SvdSeed;
  const bool exact = a.max_bond() * b.max_bond() <= kExactDistanceBond;
  CompressResult cr = compress_product(a, b, co, exact);
  log.distances.push_back(exact ? cr.distance : kNaN);
  log.converged = log.converged && cr.converged;
  return std::move(cr.mpo);
}

Mpo trim_to(const Mpo& m, std::size_t operator_d, const CompressOptions& opt, OperatorBuild& log) {
  if (m.max_bond() <= operator_d) return m;
  CompressOptions co = opt;
  co.target_d = operator_d;
  co.init = InitMode::SvdSeed;
  CompressResult cr = compress_mpo(m, co);
  log.distances.push_back(cr.distance);
  log.converged = log.converged && cr.converged;
  return std::move(cr.mpo);
}

}  // namespace

double TaylorPlan::base_step() const { return dt / std::ldexp(1.0, static_cast<int>(doublings)); }

OperatorBuild taylor_mpo(const Mpo& h, double tau, unsigned m, std::size_t operator_d, const CompressOptions& opt) {
  validate_mpo(h);
  if (m < 1) throw ArgumentError("taylor_mpo: order must be >= 1");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw ArgumentError("taylor_mpo: tau must be finite and >= 0");
  if (operator_d == 0) throw ArgumentError("taylor_mpo: operatorD must be positive");
  const std::size_t n = h.size(), d = h.phys_dim();
  OperatorBuild out;
  const Mpo one = identity_mpo(n, d);
  if (tau == 0.0) {
    out.op = one;
    return out;
  }
  const Mpo x = scale(h, cplx(0.0, -tau));
  // 1 + x/1 (1 + x/2 (... (1 + x/m)))
  Mpo p = add(one, scale(x, 1.0 / m));
  for (unsigned k = m - 1; k >= 1; --k) {
    Mpo q = product_to(scale(x, 1.0 / k), p, operator_d, opt, out);
    p = add(one, q);
  }
  out.op = trim_to(p, operator_d, opt, out);
  return out;
}

OperatorBuild double_time(const Mpo& u, unsigned n, std::size_t operator_d, const CompressOptions& opt) {
  validate_mpo(u);
  OperatorBuild out;
  out.op = u;
  for (unsigned s = 0; s < n; ++s) out.op = product_to(out.op, out.op, operator_d, opt, out);
  return out;
}

OperatorBuild plan_operator(const Mpo& h, const TaylorPlan& plan) {
  if (!(plan.dt > 0.0)) throw ArgumentError("taylor plan: dt must be positive");
  OperatorBuild base = taylor_mpo(h, plan.base_step(), plan.order, plan.operator_d, plan.compress);
  OperatorBuild full = double_time(base.op, plan.doublings, plan.operator_d, plan.compress);
  base.distances.insert(base.distances.end(), full.distances.begin(), full.distances.end());
  full.distances = std::move(base.distances);
  full.converged = full.converged && base.converged;
  return full;
}

// ---- Trotter comparator

namespace {

RowMatrix kron(const RowMatrix& a, const RowMatrix& b) {
  RowMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

BondModel from_terms(std::size_t n, const std::vector<std::pair<RowMatrix, RowMatrix>>& pair_terms,
                     const RowMatrix& field) {
  if (n < 2) throw ArgumentError("bond model: need N >= 2");
  const std::size_t d = static_cast<std::size_t>(field.rows());
  BondModel m;
  m.n = n;
  m.d = d;
  const RowMatrix id = eye(d);
  for (std::size_t b = 0; b + 1 < n; ++b) {
    RowMatrix h = RowMatrix::Zero(d * d, d * d);
    for (const auto& [x, y] : pair_terms) h += kron(x, y);
    // each site field is shared equally among the bonds touching it
    const double wl = b == 0 ? 1.0 : 0.5;
    const double wr = b + 2 == n ? 1.0 : 0.5;
    h += wl * kron(field, id) + wr * kron(id, field);
    m.bonds.push_back(h);
  }
  return m;
}

Mpo gate_layer(const BondModel& m, unsigned parity, cplx factor) {
  const std::size_t d = m.d;
  OpChain sites(m.n);
  for (std::size_t k = 0; k < m.n; ++k) {
    DenseTensor t({1, d, d, 1});
    for (std::size_t i = 0; i < d; ++i) t.at({0, i, i, 0}) = 1.0;
    sites[k] = t;
  }
  for (std::size_t b = parity; b + 1 < m.n; b += 2) {
    const RowMatrix g = expm_hermitian(m.bonds[b], factor);
    // g[(j1 j2), (i1 i2)] -> [(j1 i1), (j2 i2)]
    RowMatrix r(d * d, d * d);
    for (std::size_t j1 = 0; j1 < d; ++j1)
      for (std::size_t j2 = 0; j2 < d; ++j2)
        for (std::size_t i1 = 0; i1 < d; ++i1)
          for (std::size_t i2 = 0; i2 < d; ++i2) r(j1 * d + i1, j2 * d + i2) = g(j1 * d + j2, i1 * d + i2);
    SvdMatrices s = svd_matrix(r, d * d, 1e-15);
    const std::size_t chi = static_cast<std::size_t>(s.S.size());
    DenseTensor a({1, d, d, chi}), c({chi, d, d, 1});
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t q = 0; q < chi; ++q) {
          a.at({0, j, i, q}) = s.U(j * d + i, q) * s.S(q);
          c.at({q, j, i, 0}) = s.Vh(q, j * d + i);
        }
    sites[b] = a;
    sites[b + 1] = c;
  }
  Mpo out;
  out.sites = std::move(sites);
  return out;
}

}  // namespace

RowMatrix expm_hermitian(const RowMatrix& h, cplx factor) {
  const Eigen::MatrixXcd hm = h;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hm);
  if (es.info() != Eigen::Success) throw NumericError("expm_hermitian: eigensolver failed");
  Eigen::VectorXcd ex(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < ex.size(); ++i) ex(i) = std::exp(factor * es.eigenvalues()(i));
  return es.eigenvectors() * ex.asDiagonal() * es.eigenvectors().adjoint();
}

BondModel bond_model_ising(const IsingParams& p, std::size_t n) {
  return from_terms(n, {{pauli_z(), -pauli_z()}}, -p.B * pauli_x());
}

BondModel bond_model_xxz(const XxzParams& p, std::size_t n) {
  const double c = std::cos(p.theta), s = std::sin(p.theta);
  return from_terms(n, {{pauli_x(), c * pauli_x()}, {pauli_y(), c * pauli_y()}, {pauli_z(), c * p.delta * pauli_z()}},
                    s * pauli_z());
}

BondModel bond_model(const HamiltonianSpec& spec) {
  if (spec.kind == HamiltonianKind::Model) {
    if (spec.model.name == "ising") return bond_model_ising({spec.model.B}, spec.n_sites);
    if (spec.model.name == "xxz") return bond_model_xxz({spec.model.theta, spec.model.delta}, spec.n_sites);
    throw UnsupportedError("trotter: model '" + spec.model.name + "' has interactions beyond nearest neighbours");
  }
  if (spec.kind == HamiltonianKind::NearestNeighbor) {
    if (spec.ops.size() != 2) throw ConfigError("trotter: nearestNeighbor needs ops [X, Y]");
    const RowMatrix field = spec.local ? *spec.local : RowMatrix(RowMatrix::Zero(spec.d, spec.d));
    return from_terms(spec.n_sites, {{spec.ops[0], spec.ops[1]}}, field);
  }
  if (spec.kind == HamiltonianKind::FixedRange && spec.range == 1 && spec.ops.size() == 2)
    return from_terms(spec.n_sites, {{spec.ops[0], spec.ops[1]}}, RowMatrix::Zero(spec.d, spec.d));
  throw UnsupportedError(std::string("trotter: ") + hamiltonian_kind_name(spec.kind) +
                         " is not a nearest-neighbour Hamiltonian");
}

OperatorBuild trotter_step_mpo(const BondModel& m, double dt, unsigned order, std::size_t operator_d,
                               const CompressOptions& opt) {
  if (order != 2 && order != 4) throw ArgumentError("trotter: order must be 2 or 4");
  if (m.bonds.size() + 1 != m.n) throw DimensionError("trotter: bond list does not match N");
  OperatorBuild out;
  if (dt == 0.0) {
    out.op = identity_mpo(m.n, m.d);
    return out;
  }
  // (parity, time) layers, applied left to right
  std::vector<std::pair<unsigned, double>> layers;
  auto push = [&](unsigned parity, double t) {
    if (!layers.empty() && layers.back().first == parity)
      layers.back().second += t;
    else
      layers.emplace_back(parity, t);
  };
  auto s2 = [&](double t) {
    push(0, t / 2);
    push(1, t);
    push(0, t / 2);
  };
  if (order == 2) {
    s2(dt);
  } else {
    const double p = 1.0 / (4.0 - std::cbrt(4.0));
    s2(p * dt);
    s2(p * dt);
    s2((1.0 - 4.0 * p) * dt);
    s2(p * dt);
    s2(p * dt);
  }
  Mpo u;
  bool first = true;
  for (const auto& [parity, t] : layers) {
    if (parity == 1 && m.n < 3) continue;  // no odd bonds
    Mpo g = gate_layer(m, parity, cplx(0.0, -t));
    if (first) {
      u = std::move(g);
      first = false;
    } else {
      u = product_to(g, u, operator_d, opt, out);
    }
  }
  out.op = std::move(u);
  return out;
}

// ---- evolution

double connected_correlation(const Mps& psi, const RowMatrix& op, std::size_t i, std::size_t j) {
  const std::size_t n = psi.size(), d = psi.phys_dim();
  std::vector<RowMatrix> ops(n, eye(d));
  ops[i] = op;
  const double ni = std::real(expectation(psi, product_mpo(ops), psi));
  ops[i] = eye(d);
  ops[j] = op;
  const double nj = std::real(expectation(psi, product_mpo(ops), psi));
  ops[i] = op;
  ops[j] = i == j ? RowMatrix(op * op) : op;
  const double nij = std::real(expectation(psi, product_mpo(ops), psi));
  return nij - ni * nj;
}

EvolutionRecord evolve(const Mps& psi0, const Mpo& u, double dt, std::size_t steps, std::size_t chi,
                       const Observables& obs) {
  validate_mps(psi0);
  validate_mpo(u);
  if (psi0.size() != u.size()) throw DimensionError("evolve: length mismatch");
  if (chi == 0) throw ArgumentError("evolve: chi must be positive");
  const RowMatrix site_op = obs.site_op.size() ? obs.site_op : number_op();
  for (const auto& [i, j] : obs.pairs)
    if (i >= psi0.size() || j >= psi0.size()) throw ArgumentError("evolve: correlation pair out of range");
  const std::size_t every = std::max<std::size_t>(1, obs.every);

  EvolutionRecord rec;
  Mps psi = normalized(psi0);
  auto record = [&](double t, double nrm, double dist, std::size_t step) {
    rec.times.push_back(t);
    rec.norms.push_back(nrm);
    rec.energies.push_back(obs.hamiltonian ? std::real(expectation(psi, *obs.hamiltonian, psi)) : kNaN);
    std::vector<double> c(obs.pairs.size(), kNaN);
    if (step % every == 0 || step == steps)
      for (std::size_t p = 0; p < obs.pairs.size(); ++p)
        c[p] = connected_correlation(psi, site_op, obs.pairs[p].first, obs.pairs[p].second);
    rec.correlations.push_back(std::move(c));
    rec.bonds.push_back(psi.max_bond());
    rec.distances.push_back(dist);
    rec.flagged.push_back(!std::isnan(dist) && dist > obs.alarm);
  };
  record(0.0, norm(psi0), 0.0, 0);
  for (std::size_t s = 1; s <= steps; ++s) {
    ApplyCompressResult ac = apply_and_compress(u, psi, chi);
    const double n2 = std::real(overlap(ac.state, ac.state));
    double dist = kNaN;
    if (obs.measure_distance) {
      const double t2 = op_chain_norm2(u.sites, psi.sites);
      dist = t2 > 0.0 ? std::sqrt(std::max(0.0, t2 - n2) / t2) : 0.0;
    }
    if (!(n2 > 0.0)) throw NumericError("evolve: state collapsed to zero");
    psi = std::move(ac.state);
    psi.sites[0] *= 1.0 / std::sqrt(n2);  // apply_and_compress leaves the centre at 0
    record(static_cast<double>(s) * dt, std::sqrt(n2), dist, s);
    if (!ac.converged) rec.flagged.back() = true;
  }
  rec.final_state = std::move(psi);
  return rec;
}

// ---- powers

std::vector<PowerProbe> probe_power_bond_dim(const Mpo& h, unsigned n, std::size_t d_start, double tol) {
  validate_mpo(h);
  if (n < 1) throw ArgumentError("probe_power_bond_dim: n must be >= 1");
  if (d_start == 0) d_start = 1;
  std::vector<PowerProbe> out;
  Mpo prev;
  for (unsigned p = 1; p <= n; ++p) {
    PowerProbe pr;
    pr.power = p;
    const std::size_t upper = p == 1 ? h.max_bond() : h.max_bond() * prev.max_bond();
    Mpo found;
    bool hit = false;
    for (std::size_t dc = std::min(d_start, upper); dc <= upper; ++dc) {
      CompressOptions co;
      co.target_d = dc;
      co.init = InitMode::SvdSeed;
      CompressResult cr = p == 1 ? compress_mpo(h, co) : compress_product(h, prev, co, true);
      pr.trace.emplace_back(dc, cr.distance);
      if (cr.distance < tol) {
        pr.d_exact = dc;
        found = std::move(cr.mpo);
        hit = true;
        break;
      }
    }
    if (!hit) {
      found = p == 1 ? h : multiply(h, prev);
      pr.d_exact = found.max_bond();
    }
    prev = std::move(found);
    out.push_back(std::move(pr));
  }
  return out;
}

}  // namespace tnops
