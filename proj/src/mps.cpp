#include "tnops/mps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tnops {

std::size_t Mps::max_bond() const {
  std::size_t m = 1;
  for (auto b : bonds()) m = std::max(m, b);
  return m;
}

void validate_mps(const Mps& s) { validate_chain(s.sites); }

namespace {

std::size_t capped_bond(std::size_t n, std::size_t d, std::size_t chi, std::size_t left_sites) {
  double cap = static_cast<double>(chi);
  cap = std::min(cap, std::pow(static_cast<double>(d), static_cast<double>(left_sites)));
  cap = std::min(cap, std::pow(static_cast<double>(d), static_cast<double>(n - left_sites)));
  return static_cast<std::size_t>(cap);
}

void check_pair(const Mps& a, const Mps& b) {
  validate_mps(a);
  validate_mps(b);
  if (a.size() != b.size()) throw DimensionError("mps length mismatch");
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a.phys_dim(k) != b.phys_dim(k)) throw DimensionError("mps physical dimension mismatch");
}

}  // namespace

Mps random_mps(std::size_t n, std::size_t d, std::size_t chi, std::uint64_t seed) {
  if (n == 0 || d == 0 || chi == 0) throw ArgumentError("random_mps: N, d, chi must be positive");
  Rng rng(seed);
  Mps s;
  std::size_t l = 1;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t r = k + 1 == n ? 1 : capped_bond(n, d, chi, k + 1);
    s.sites.push_back(DenseTensor::random({l, d, r}, rng));
    l = r;
  }
  return s;
}

Mps product_state(const std::vector<std::size_t>& levels, std::size_t d) {
  std::vector<Vector> locals;
  for (auto lv : levels) {
    if (lv >= d) throw ArgumentError("product_state: level out of range");
    Vector v = Vector::Zero(static_cast<Eigen::Index>(d));
    v(static_cast<Eigen::Index>(lv)) = 1.0;
    locals.push_back(v);
  }
  return product_state(locals);
}

Mps product_state(const std::vector<Vector>& locals) {
  if (locals.empty()) throw ArgumentError("product_state: empty");
  Mps s;
  for (const auto& v : locals) {
    const std::size_t d = static_cast<std::size_t>(v.size());
    DenseTensor t({1, d, 1});
    for (std::size_t i = 0; i < d; ++i) t.data()[i] = v(static_cast<Eigen::Index>(i));
    s.sites.push_back(std::move(t));
  }
  s.center = 0;
  return s;
}

Mps canonicalize(Mps s, std::size_t center) {
  canonicalize_chain(s.sites, center);
  s.center = center;
  return s;
}

cplx overlap(const Mps& a, const Mps& b) {
  check_pair(a, b);
  return chain_inner(a.sites, b.sites);
}

double norm(const Mps& s) { return chain_norm(s.sites); }

Mps normalized(Mps s) {
  const double n = norm(s);
  if (n == 0.0) throw NumericError("normalized: zero state");
  if (s.center) {
    s.sites[*s.center] *= 1.0 / n;
  } else {
    s.sites.front() *= 1.0 / n;
  }
  return s;
}

cplx expectation(const Mps& a, const Mpo& m, const Mps& b) {
  check_pair(a, b);
  validate_mpo(m);
  return chain_expectation(a.sites, m.sites, b.sites);
}

Mps apply_mpo(const Mpo& m, const Mps& s) {
  validate_mpo(m);
  validate_mps(s);
  Mps out;
  out.sites = apply_op_chain(m.sites, s.sites);
  return out;
}

Vector to_dense_vector(const Mps& s) {
  validate_mps(s);
  double total = 1.0;
  for (std::size_t k = 0; k < s.size(); ++k) total *= static_cast<double>(s.phys_dim(k));
  if (total > 4096.0) throw SizeGuardError("to_dense_vector: d^N exceeds 4096");
  DenseTensor acc = reshape(s.sites[0], {s.sites[0].dim(1), s.sites[0].dim(2)});
  for (std::size_t k = 1; k < s.size(); ++k) {
    DenseTensor x = contract(acc, s.sites[k], {{1, 0}});  // (I, i, r)
    acc = reshape(x, {x.dim(0) * x.dim(1), x.dim(2)});
  }
  Vector v(static_cast<Eigen::Index>(acc.size()));
  for (std::size_t i = 0; i < acc.size(); ++i) v(static_cast<Eigen::Index>(i)) = acc.data()[i];
  return v;
}

Mps from_dense_vector(const Vector& v, std::size_t n, std::size_t d) {
  if (static_cast<double>(v.size()) != std::pow(static_cast<double>(d), static_cast<double>(n)))
    throw DimensionError("from_dense_vector: length is not d^N");
  Mps s;
  RowMatrix rest = Eigen::Map<const RowMatrix>(v.data(), 1, v.size());
  std::size_t l = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const std::size_t cols = static_cast<std::size_t>(rest.size()) / (l * d);
    Eigen::Map<RowMatrix> m(rest.data(), static_cast<Eigen::Index>(l * d), static_cast<Eigen::Index>(cols));
    SvdMatrices sv = svd_matrix(m, std::numeric_limits<std::size_t>::max(), 1e-15);
    const std::size_t r = static_cast<std::size_t>(sv.S.size());
    DenseTensor t({l, d, r});
    t.as_matrix_rc(l * d, r) = sv.U;
    s.sites.push_back(std::move(t));
    rest = sv.S.cast<cplx>().asDiagonal() * sv.Vh;
    l = r;
  }
  DenseTensor t({l, d, 1});
  std::copy(rest.data(), rest.data() + rest.size(), t.data());
  s.sites.push_back(std::move(t));
  return s;
}

MpsCompressResult compress_mps(const Mps& s, std::size_t chi, CompressMode mode, double tol, std::size_t max_sweeps,
                               std::uint64_t seed) {
  (void)seed;  // both modes start from the deterministic SVD truncation
  validate_mps(s);
  if (chi == 0) throw ArgumentError("compress_mps: chi must be positive");
  MpsCompressResult res;
  const double n0 = norm(s);
  if (n0 < 1e-14) {
    Mps z;
    for (std::size_t k = 0; k < s.size(); ++k) z.sites.push_back(DenseTensor({1, s.phys_dim(k), 1}));
    res.state = std::move(z);
    return res;
  }
  Chain seedc = svd_compress_chain(s.sites, chi, 0.0);
  const double svd_dist = chain_difference_norm(s.sites, seedc) / n0;
  if (mode == CompressMode::Svd) {
    res.state.sites = std::move(seedc);
    res.state.center = s.size() - 1;
    res.distance = svd_dist;
    return res;
  }
  res.trace.push_back(svd_dist);
  FitOptions fo;
  fo.max_sweeps = max_sweeps;
  fo.tol = tol;
  fo.target_norm2 = n0 * n0;
  // sweep one at a time so the per-sweep distance is exact
  Chain cur = seedc;
  double best = svd_dist;
  Chain best_chain = seedc;
  res.converged = false;
  for (std::size_t sw = 0; sw < max_sweeps; ++sw) {
    fo.max_sweeps = 1;
    FitResult fr = variational_fit(nullptr, s.sites, cur, fo);
    cur = std::move(fr.chain);
    const double d = chain_difference_norm(s.sites, cur) / n0;
    res.trace.push_back(d);
    res.sweeps = sw + 1;
    const double prev = best;
    if (d <= best) {
      best = d;
      best_chain = cur;
    }
    if (std::abs(prev * prev - d * d) < tol) {
      res.converged = true;
      break;
    }
  }
  res.state.sites = std::move(best_chain);
  res.state.center = 0;
  res.distance = best;
  return res;
}

ApplyCompressResult apply_and_compress(const Mpo& m, const Mps& s, std::size_t chi, double tol, std::size_t max_sweeps,
                                       double rel_cut) {
  validate_mpo(m);
  validate_mps(s);
  if (m.size() != s.size()) throw DimensionError("apply_and_compress: length mismatch");
  Chain guess = zipup_chain(&m.sites, s.sites, chi);
  // trim numerically empty directions picked up by the zip-up
  guess = svd_compress_chain(std::move(guess), chi, rel_cut);
  FitOptions fo;
  fo.max_sweeps = max_sweeps;
  fo.tol = tol;
  fo.compute_target_norm = false;
  FitResult fr = variational_fit(&m.sites, s.sites, std::move(guess), fo);
  ApplyCompressResult res;
  res.state.sites = std::move(fr.chain);
  res.state.center = 0;
  res.sweeps = fr.sweeps;
  res.converged = fr.converged;
  res.distance = fr.distance;
  res.exact_norm = std::numeric_limits<double>::quiet_NaN();
  return res;
}

}  // namespace tnops
