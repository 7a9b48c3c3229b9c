#include "tnops/optimality.hpp"

#include <algorithm>
#include <cmath>

#include "tnops/rng.hpp"

namespace tnops {

namespace {

std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= b;
  return r;
}

void check_cut(const Mpo& m, std::size_t cut) {
  validate_mpo(m);
  if (cut < 1 || cut >= m.size()) throw ArgumentError("cut must lie in [1, N-1]");
}

// R[(jA iA), (jB iB)] = M[(jA jB), (iA iB)]
RowMatrix realign(const RowMatrix& a, std::size_t da, std::size_t db) {
  RowMatrix r(da * da, db * db);
  for (std::size_t ja = 0; ja < da; ++ja)
    for (std::size_t jb = 0; jb < db; ++jb)
      for (std::size_t ia = 0; ia < da; ++ia)
        for (std::size_t ib = 0; ib < db; ++ib) r(ja * da + ia, jb * db + ib) = a(ja * db + jb, ia * db + ib);
  return r;
}

std::vector<double> normalize(const Eigen::VectorXd& s) {
  std::vector<double> v(s.data(), s.data() + s.size());
  std::sort(v.begin(), v.end(), std::greater<>());
  const double top = v.empty() ? 0.0 : v.front();
  if (top > 0.0)
    for (double& x : v) x /= top;
  return v;
}

std::size_t count_above(const std::vector<double>& v, double tol, bool* borderline) {
  std::size_t r = 0;
  for (double x : v) {
    if (x > tol) ++r;
    if (borderline && x > tol / 10.0 && x < tol * 10.0) *borderline = true;
  }
  return r;
}

}  // namespace

std::vector<double> operator_schmidt_values(const Mpo& m, std::size_t cut) {
  check_cut(m, cut);
  const std::size_t d = m.phys_dim();
  const RowMatrix a = to_dense_matrix(m);
  const std::size_t da = ipow(d, cut), db = ipow(d, m.size() - cut);
  return normalize(singular_values(realign(a, da, db)));
}

std::vector<double> operator_schmidt_values_chain(const Mpo& m, std::size_t cut) {
  check_cut(m, cut);
  Chain c = vectorize(m);
  canonicalize_chain(c, cut - 1);
  const DenseTensor& t = c[cut - 1];
  return normalize(singular_values(t.as_matrix(2)));
}

std::size_t jamiolkowski_rank(const Mpo& m, std::size_t cut, double tol) {
  return count_above(operator_schmidt_values(m, cut), tol, nullptr);
}

std::size_t choi_state_rank(const Mpo& m, std::size_t cut, double tol) {
  check_cut(m, cut);
  const std::size_t n = m.size(), d = m.phys_dim();
  const std::size_t dn = ipow(d, n);
  if (dn > 64) throw SizeGuardError("choi_state_rank: explicit construction limited to d^N <= 64");
  // |phi+>^N as a d^N x d^N matrix over (system, ancilla), then (M x 1)
  const RowMatrix phi = RowMatrix::Identity(dn, dn) / std::sqrt(static_cast<double>(dn));
  const RowMatrix psi = to_dense_matrix(m) * phi;
  // regroup qudits into (system A, ancilla A | system B, ancilla B)
  const std::size_t da = ipow(d, cut), db = ipow(d, n - cut);
  RowMatrix amp = RowMatrix::Zero(da * da, db * db);
  for (std::size_t s = 0; s < dn; ++s)
    for (std::size_t a = 0; a < dn; ++a) amp((s / db) * da + a / db, (s % db) * db + a % db) = psi(s, a);
  // rho_A = amp amp^dagger; its rank is read off amp's singular values, since the
  // eigenvalues of rho_A sit at tol^2 and drown in rounding
  return count_above(normalize(singular_values(amp)), tol, nullptr);
}

RankReport certify_builder(const Mpo& m, double tol) {
  validate_mpo(m);
  RankReport rep;
  rep.tol = tol;
  const std::size_t n = m.size();
  const std::vector<std::size_t> bonds = m.bonds();
  double total = 1.0;
  for (std::size_t k = 0; k < n; ++k) total *= static_cast<double>(m.phys_dim(k));
  rep.dense = total <= 256.0;
  rep.optimal = true;
  rep.optimal_interior = true;
  for (std::size_t k = 1; k < n; ++k) {
    CutRank c;
    c.cut = k;
    c.bond = bonds[k - 1];
    const std::vector<double> sv = rep.dense ? operator_schmidt_values(m, k) : operator_schmidt_values_chain(m, k);
    c.rank = count_above(sv, tol, &c.borderline);
    rep.optimal = rep.optimal && c.rank == c.bond;
    if (std::min(k, n - k) >= 2 || n < 4) rep.optimal_interior = rep.optimal_interior && c.rank == c.bond;
    rep.cuts.push_back(c);
  }
  return rep;
}

std::vector<double> generic_values(std::size_t count, std::uint64_t seed) {
  Rng rng = Rng(seed).substream("builder");
  std::vector<double> v(count);
  for (double& x : v) x = rng.uniform(0.5, 1.5);
  return v;
}

RowMatrix generic_matrix(std::size_t d, std::uint64_t seed) {
  const std::vector<double> v = generic_values(d * d, seed);
  RowMatrix m(d, d);
  for (std::size_t i = 0; i < d * d; ++i) m(i / d, i % d) = v[i];
  return m;
}

}  // namespace tnops
