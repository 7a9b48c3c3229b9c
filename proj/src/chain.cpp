#include "tnops/chain.hpp"

#include <cmath>
#include <limits>

namespace tnops {

void validate_chain(const Chain& c) {
  if (c.empty()) throw ArgumentError("empty chain");
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (c[k].rank() != 3) throw DimensionError("chain site " + std::to_string(k) + " is not rank 3");
    if (k + 1 < c.size() && c[k].dim(2) != c[k + 1].dim(0))
      throw DimensionError("chain bond mismatch at " + std::to_string(k));
  }
  if (c.front().dim(0) != 1 || c.back().dim(2) != 1) throw DimensionError("chain boundary bonds must be 1");
}

void validate_op_chain(const OpChain& o) {
  if (o.empty()) throw ArgumentError("empty operator chain");
  for (std::size_t k = 0; k < o.size(); ++k) {
    if (o[k].rank() != 4) throw DimensionError("operator site " + std::to_string(k) + " is not rank 4");
    if (k + 1 < o.size() && o[k].dim(3) != o[k + 1].dim(0))
      throw DimensionError("operator bond mismatch at " + std::to_string(k));
  }
  if (o.front().dim(0) != 1 || o.back().dim(3) != 1) throw DimensionError("operator boundary bonds must be 1");
}

std::vector<std::size_t> chain_bonds(const Chain& c) {
  std::vector<std::size_t> b;
  for (std::size_t k = 0; k + 1 < c.size(); ++k) b.push_back(c[k].dim(2));
  return b;
}

namespace {

// Move the gauge one site to the right: site k becomes left-orthonormal.
void shift_right(Chain& c, std::size_t k) {
  const std::size_t l = c[k].dim(0), p = c[k].dim(1), r = c[k].dim(2);
  RowMatrix q, rr;
  qr_matrix(c[k].as_matrix_rc(l * p, r), q, rr);
  const std::size_t nb = static_cast<std::size_t>(q.cols());
  DenseTensor qt({l, p, nb});
  qt.as_matrix_rc(l * p, nb) = q;
  c[k] = std::move(qt);
  DenseTensor& nx = c[k + 1];
  const std::size_t p2 = nx.dim(1), r2 = nx.dim(2);
  DenseTensor nn({nb, p2, r2});
  nn.as_matrix_rc(nb, p2 * r2).noalias() = rr * nx.as_matrix_rc(r, p2 * r2);
  nx = std::move(nn);
}

// Move the gauge one site to the left: site k becomes right-orthonormal.
void shift_left(Chain& c, std::size_t k) {
  const std::size_t l = c[k].dim(0), p = c[k].dim(1), r = c[k].dim(2);
  RowMatrix mt = c[k].as_matrix_rc(l, p * r).transpose();
  RowMatrix q, rr;
  qr_matrix(mt, q, rr);  // M^T = Q R  ->  M = R^T Q^T
  const std::size_t nb = static_cast<std::size_t>(q.cols());
  DenseTensor qt({nb, p, r});
  qt.as_matrix_rc(nb, p * r) = q.transpose();
  c[k] = std::move(qt);
  DenseTensor& pv = c[k - 1];
  const std::size_t l0 = pv.dim(0), p0 = pv.dim(1);
  DenseTensor nn({l0, p0, nb});
  nn.as_matrix_rc(l0 * p0, nb).noalias() = pv.as_matrix_rc(l0 * p0, l) * rr.transpose();
  pv = std::move(nn);
}

DenseTensor ones3() { return DenseTensor({1, 1, 1}, {cplx(1.0)}); }

// L'(g_r, w_r, t_r) from L(g_l, w_l, t_l), bra site g (conjugated), op site o, ket site t.
DenseTensor env_left(const DenseTensor& L, const DenseTensor& g, const DenseTensor* o, const DenseTensor& t) {
  DenseTensor x = contract(L, t, {{2, 0}});  // (g, w, p', t_r)
  if (o) {
    DenseTensor y = contract(x, *o, {{1, 0}, {2, 2}});             // (g, t_r, p, w_r)
    DenseTensor z = contract(g.conj(), y, {{0, 0}, {1, 2}});        // (g_r, t_r, w_r)
    return permute(z, {0, 2, 1});
  }
  const std::size_t gd = x.dim(0), p = x.dim(2), tr = x.dim(3);
  DenseTensor y = reshape(x, {gd, p, tr});
  DenseTensor z = contract(g.conj(), y, {{0, 0}, {1, 1}});  // (g_r, t_r)
  return reshape(z, {z.dim(0), 1, z.dim(1)});
}

DenseTensor env_right(const DenseTensor& R, const DenseTensor& g, const DenseTensor* o, const DenseTensor& t) {
  DenseTensor x = contract(t, R, {{2, 2}});  // (t_l, p', g_r, w_r)
  if (o) {
    DenseTensor y = contract(*o, x, {{2, 1}, {3, 3}});       // (w_l, p, t_l, g_r)
    DenseTensor z = contract(y, g.conj(), {{1, 1}, {3, 2}});  // (w_l, t_l, g_l)
    return permute(z, {2, 0, 1});
  }
  // x: (t_l, p, g_r, 1)
  const std::size_t tl = x.dim(0), p = x.dim(1), gr = x.dim(2);
  DenseTensor y = reshape(x, {tl, p, gr});
  DenseTensor z = contract(y, g.conj(), {{1, 1}, {2, 2}});  // (t_l, g_l)
  return reshape(permute(z, {1, 0}), {z.dim(1), 1, z.dim(0)});
}

DenseTensor local_tensor(const DenseTensor& L, const DenseTensor* o, const DenseTensor& t, const DenseTensor& R) {
  DenseTensor x = contract(L, t, {{2, 0}});  // (g_l, w_l, p', t_r)
  if (o) {
    DenseTensor y = contract(x, *o, {{1, 0}, {2, 2}});  // (g_l, t_r, p, w_r)
    return contract(y, R, {{1, 2}, {3, 1}});           // (g_l, p, g_r)
  }
  const std::size_t gl = x.dim(0), p = x.dim(2), tr = x.dim(3);
  DenseTensor y = reshape(x, {gl, p, tr});
  DenseTensor r2 = reshape(R, {R.dim(0), R.dim(2)});  // (g_r, t_r)
  return contract(y, r2, {{2, 1}});                   // (g_l, p, g_r)
}

}  // namespace

DenseTensor chain_env_left(const DenseTensor& l, const DenseTensor& bra, const DenseTensor* o, const DenseTensor& ket) {
  return env_left(l, bra, o, ket);
}
DenseTensor chain_env_right(const DenseTensor& r, const DenseTensor& bra, const DenseTensor* o, const DenseTensor& ket) {
  return env_right(r, bra, o, ket);
}
DenseTensor chain_local(const DenseTensor& l, const DenseTensor* o, const DenseTensor& ket, const DenseTensor& r) {
  return local_tensor(l, o, ket, r);
}
DenseTensor trivial_env() { return ones3(); }
void gauge_shift_right(Chain& c, std::size_t k) { shift_right(c, k); }
void gauge_shift_left(Chain& c, std::size_t k) { shift_left(c, k); }

void canonicalize_chain(Chain& c, std::size_t center) {
  validate_chain(c);
  if (center >= c.size()) throw ArgumentError("canonical center out of range");
  for (std::size_t k = 0; k < center; ++k) shift_right(c, k);
  for (std::size_t k = c.size() - 1; k > center; --k) shift_left(c, k);
}

void right_canonicalize(Chain& c) { canonicalize_chain(c, 0); }
void left_canonicalize(Chain& c) { canonicalize_chain(c, c.size() - 1); }

cplx chain_inner(const Chain& a, const Chain& b) {
  if (a.size() != b.size()) throw DimensionError("inner: length mismatch");
  DenseTensor L = ones3();
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].dim(1) != b[k].dim(1)) throw DimensionError("inner: physical dimension mismatch");
    L = env_left(L, a[k], nullptr, b[k]);
  }
  return L.data()[0];
}

cplx chain_expectation(const Chain& a, const OpChain& o, const Chain& b) {
  if (a.size() != b.size() || a.size() != o.size()) throw DimensionError("expectation: length mismatch");
  DenseTensor L = ones3();
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (o[k].dim(1) != a[k].dim(1) || o[k].dim(2) != b[k].dim(1))
      throw DimensionError("expectation: physical dimension mismatch");
    L = env_left(L, a[k], &o[k], b[k]);
  }
  return L.data()[0];
}

double chain_norm(const Chain& c) {
  validate_chain(c);
  RowMatrix r = RowMatrix::Identity(1, 1);
  for (std::size_t k = 0; k < c.size(); ++k) {
    const std::size_t l = c[k].dim(0), p = c[k].dim(1), rr = c[k].dim(2);
    const std::size_t rows0 = static_cast<std::size_t>(r.rows());
    RowMatrix m = r * c[k].as_matrix_rc(l, p * rr);  // (rows0, p*rr)
    Eigen::Map<RowMatrix> mv(m.data(), static_cast<Eigen::Index>(rows0 * p), static_cast<Eigen::Index>(rr));
    if (k + 1 == c.size()) return mv.norm();
    RowMatrix q, rn;
    qr_matrix(mv, q, rn);
    r = rn;
  }
  return r.norm();
}

Chain chain_scaled(Chain c, cplx s) {
  c.front() *= s;
  return c;
}

Chain chain_sum(const Chain& a, const Chain& b, cplx alpha, cplx beta) {
  if (a.size() != b.size()) throw DimensionError("sum: length mismatch");
  const std::size_t n = a.size();
  Chain out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const DenseTensor& x = a[k];
    const DenseTensor& y = b[k];
    if (x.dim(1) != y.dim(1)) throw DimensionError("sum: physical dimension mismatch");
    const std::size_t p = x.dim(1);
    const bool first = k == 0, last = k + 1 == n;
    const std::size_t l = first ? 1 : x.dim(0) + y.dim(0);
    const std::size_t r = last ? 1 : x.dim(2) + y.dim(2);
    // scalars sit on the first site only
    const cplx sa = first ? alpha : cplx(1.0), sb = first ? beta : cplx(1.0);
    const std::size_t yl0 = first ? 0 : x.dim(0), yr0 = last ? 0 : x.dim(2);
    DenseTensor t({l, p, r});
    for (std::size_t i = 0; i < x.dim(0); ++i)
      for (std::size_t s = 0; s < p; ++s)
        for (std::size_t j = 0; j < x.dim(2); ++j) t.at({i, s, j}) += sa * x.at({i, s, j});
    for (std::size_t i = 0; i < y.dim(0); ++i)
      for (std::size_t s = 0; s < p; ++s)
        for (std::size_t j = 0; j < y.dim(2); ++j) t.at({yl0 + i, s, yr0 + j}) += sb * y.at({i, s, j});
    out[k] = std::move(t);
  }
  return out;
}

double chain_difference_norm(const Chain& a, const Chain& b) { return chain_norm(chain_sum(a, b, 1.0, -1.0)); }

Chain apply_op_chain(const OpChain& o, const Chain& c) {
  if (o.size() != c.size()) throw DimensionError("apply: length mismatch");
  Chain out(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (o[k].dim(2) != c[k].dim(1)) throw DimensionError("apply: physical dimension mismatch");
    DenseTensor x = contract(o[k], c[k], {{2, 1}});  // (wl, q, wr, cl, cr)
    DenseTensor y = permute(x, {0, 3, 1, 2, 4});
    out[k] = reshape(y, {o[k].dim(0) * c[k].dim(0), o[k].dim(1), o[k].dim(3) * c[k].dim(2)});
  }
  return out;
}

Chain svd_compress_chain(Chain c, std::size_t max_bond, double rel_tol, double* discarded) {
  right_canonicalize(c);
  double disc = 0.0;
  for (std::size_t k = 0; k + 1 < c.size(); ++k) {
    const std::size_t l = c[k].dim(0), p = c[k].dim(1), r = c[k].dim(2);
    SvdMatrices s = svd_matrix(c[k].as_matrix_rc(l * p, r), max_bond, rel_tol);
    disc += s.discarded_weight;
    const std::size_t nb = static_cast<std::size_t>(s.S.size());
    DenseTensor u({l, p, nb});
    u.as_matrix_rc(l * p, nb) = s.U;
    c[k] = std::move(u);
    RowMatrix sv = s.S.cast<cplx>().asDiagonal() * s.Vh;
    DenseTensor& nx = c[k + 1];
    const std::size_t p2 = nx.dim(1), r2 = nx.dim(2);
    DenseTensor nn({nb, p2, r2});
    nn.as_matrix_rc(nb, p2 * r2).noalias() = sv * nx.as_matrix_rc(r, p2 * r2);
    nx = std::move(nn);
  }
  if (discarded) *discarded = disc;
  return c;
}

Chain zipup_chain(const OpChain* o, const Chain& t, std::size_t max_bond) {
  Chain tt = t;
  right_canonicalize(tt);
  const std::size_t n = tt.size();
  Chain out(n);
  DenseTensor K = ones3();  // (a, w, t)
  for (std::size_t k = 0; k < n; ++k) {
    DenseTensor x = contract(K, tt[k], {{2, 0}});  // (a, w, p', t_r)
    DenseTensor th;                                 // (a, q, w_r, t_r)
    if (o) {
      DenseTensor y = contract(x, (*o)[k], {{1, 0}, {2, 2}});  // (a, t_r, q, w_r)
      th = permute(y, {0, 2, 3, 1});
    } else {
      th = x;  // (a, 1, p, t_r) -> (a, p, 1, t_r)
      th = reshape(th, {x.dim(0), x.dim(2), 1, x.dim(3)});
    }
    const std::size_t a = th.dim(0), q = th.dim(1), wr = th.dim(2), tr = th.dim(3);
    if (k + 1 == n) {
      out[k] = reshape(th, {a, q, wr * tr});
      break;
    }
    SvdMatrices s = svd_matrix(th.as_matrix_rc(a * q, wr * tr), max_bond, 0.0);
    const std::size_t nb = static_cast<std::size_t>(s.S.size());
    DenseTensor u({a, q, nb});
    u.as_matrix_rc(a * q, nb) = s.U;
    out[k] = std::move(u);
    DenseTensor kn({nb, wr, tr});
    kn.as_matrix_rc(nb, wr * tr) = s.S.cast<cplx>().asDiagonal() * s.Vh;
    K = std::move(kn);
  }
  return out;
}

double op_chain_norm2(const OpChain& o, const Chain& t) {
  if (o.size() != t.size()) throw DimensionError("norm2: length mismatch");
  // E(t*, a*, a, t)
  DenseTensor E({1, 1, 1, 1}, {cplx(1.0)});
  for (std::size_t k = 0; k < t.size(); ++k) {
    DenseTensor x1 = contract(E, t[k], {{3, 0}});                   // (t*, a*, a, p, t')
    DenseTensor x2 = contract(x1, o[k], {{2, 0}, {3, 2}});          // (t*, a*, t', q, a')
    DenseTensor x3 = contract(x2, o[k].conj(), {{1, 0}, {3, 1}});   // (t*, t', a', p*, a*')
    DenseTensor x4 = contract(x3, t[k].conj(), {{0, 0}, {3, 1}});   // (t', a', a*', t*')
    E = permute(x4, {3, 2, 1, 0});
  }
  return std::real(E.data()[0]);
}

FitResult variational_fit(const OpChain* o, const Chain& t, Chain g, const FitOptions& opt) {
  validate_chain(t);
  validate_chain(g);
  const std::size_t n = t.size();
  if (g.size() != n) throw DimensionError("fit: guess length mismatch");
  if (o) {
    validate_op_chain(*o);
    if (o->size() != n) throw DimensionError("fit: operator length mismatch");
  }
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t pt = o ? (*o)[k].dim(1) : t[k].dim(1);
    if (g[k].dim(1) != pt) throw DimensionError("fit: physical dimension mismatch");
  }

  FitResult res;
  if (opt.target_norm2) {
    res.target_norm2 = *opt.target_norm2;
  } else if (!o) {
    const double nt = chain_norm(t);
    res.target_norm2 = nt * nt;
  } else if (opt.compute_target_norm) {
    res.target_norm2 = op_chain_norm2(*o, t);
  } else {
    res.target_norm2 = std::numeric_limits<double>::quiet_NaN();
  }
  const double tn2 = res.target_norm2;
  auto rel_dist2 = [&](double c2) {
    if (std::isnan(tn2)) return std::numeric_limits<double>::quiet_NaN();
    if (tn2 <= 0.0) return 0.0;
    return std::max(0.0, 1.0 - c2 / tn2);
  };

  const DenseTensor* op = nullptr;
  auto opk = [&](std::size_t k) { return o ? &(*o)[k] : op; };

  right_canonicalize(g);
  std::vector<DenseTensor> L(n + 1), R(n + 1);
  L[0] = ones3();
  R[n] = ones3();
  for (std::size_t k = n - 1; k >= 1; --k) R[k] = env_right(R[k + 1], g[k], opk(k), t[k]);

  double prev_metric = std::numeric_limits<double>::infinity();
  double c2 = 0.0;
  auto record = [&](const DenseTensor& c) {
    const double nc = c.norm();
    c2 = nc * nc;
    if (opt.record_trace) res.trace.push_back(std::sqrt(rel_dist2(c2)));
  };

  if (n == 1) {
    g[0] = local_tensor(L[0], opk(0), t[0], R[1]);
    record(g[0]);
    res.sweeps = 1;
    res.converged = true;
  } else {
    for (std::size_t sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
      for (std::size_t k = 0; k + 1 < n; ++k) {
        g[k] = local_tensor(L[k], opk(k), t[k], R[k + 1]);
        record(g[k]);
        shift_right(g, k);
        L[k + 1] = env_left(L[k], g[k], opk(k), t[k]);
      }
      for (std::size_t k = n - 1; k >= 1; --k) {
        g[k] = local_tensor(L[k], opk(k), t[k], R[k + 1]);
        record(g[k]);
        shift_left(g, k);
        R[k] = env_right(R[k + 1], g[k], opk(k), t[k]);
      }
      res.sweeps = sweep;
      // Squared relative distance when the target norm is known, else relative overlap growth.
      const double metric = std::isnan(tn2) ? -c2 : rel_dist2(c2);
      const double scale = std::isnan(tn2) ? std::max(c2, 1e-300) : 1.0;
      if (std::abs(prev_metric - metric) < opt.tol * scale) {
        res.converged = true;
        break;
      }
      prev_metric = metric;
    }
  }
  res.overlap_norm2 = c2;
  res.distance = std::sqrt(rel_dist2(c2));
  res.chain = std::move(g);
  return res;
}

}  // namespace tnops
