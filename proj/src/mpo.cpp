#include "tnops/mpo.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

namespace tnops {

std::vector<std::size_t> Mpo::bonds() const {
  std::vector<std::size_t> b;
  for (std::size_t k = 0; k + 1 < sites.size(); ++k) b.push_back(sites[k].dim(3));
  return b;
}

std::size_t Mpo::max_bond() const {
  std::size_t m = 1;
  for (auto b : bonds()) m = std::max(m, b);
  return m;
}

void validate_mpo(const Mpo& m) {
  validate_op_chain(m.sites);
  for (const auto& s : m.sites)
    if (s.dim(1) != s.dim(2)) throw DimensionError("mpo site with unequal physical extents");
}

namespace {

std::unordered_map<Label, std::size_t> index_of(const std::vector<Label>& a) {
  std::unordered_map<Label, std::size_t> m;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!m.emplace(a[i], i).second) throw ConfigError("duplicate label in alphabet: " + a[i]);
  }
  return m;
}

}  // namespace

Mpo from_rules(const RuleTable& rt, std::size_t n, std::size_t d) {
  if (n == 0) throw ArgumentError("from_rules: N must be positive");
  if (d == 0) throw ArgumentError("from_rules: d must be positive");
  const auto global = index_of(rt.alphabet);
  auto bond_alpha = [&](std::size_t b) -> const std::vector<Label>& {
    auto it = rt.bond_alphabets.find(b);
    return it == rt.bond_alphabets.end() ? rt.alphabet : it->second;
  };
  auto in_any = [&](const Label& l, std::size_t b) {
    if (global.count(l)) return true;
    const auto& a = bond_alpha(b);
    return std::find(a.begin(), a.end(), l) != a.end();
  };
  if (!in_any(rt.left_boundary, 0)) throw ConfigError("left boundary label missing: " + rt.left_boundary);
  if (!in_any(rt.right_boundary, n >= 2 ? n - 2 : 0))
    throw ConfigError("right boundary label missing: " + rt.right_boundary);

  if (rt.bond_alphabets.empty()) {
    auto check = [&](const std::vector<Rule>& rs) {
      for (const auto& r : rs) {
        auto a = global.find(r.left), b = global.find(r.right);
        if (a == global.end() || b == global.end()) throw ConfigError("rule label not in alphabet: " + r.left + "," + r.right);
        if (b->second < a->second) throw ConfigError("rule violates monotone ordering: " + r.left + "->" + r.right);
      }
    };
    check(rt.rules);
    for (const auto& [k, rs] : rt.overrides) check(rs);
  }

  Mpo m;
  m.sites.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::vector<Label> lefts = k == 0 ? std::vector<Label>{rt.left_boundary} : bond_alpha(k - 1);
    const std::vector<Label> rights = k + 1 == n ? std::vector<Label>{rt.right_boundary} : bond_alpha(k);
    const auto li = index_of(lefts), ri = index_of(rights);
    auto ov = rt.overrides.find(k);
    const std::vector<Rule>& rs = ov == rt.overrides.end() ? rt.rules : ov->second;
    std::set<std::pair<Label, Label>> seen;
    DenseTensor t({lefts.size(), d, d, rights.size()});
    for (const auto& r : rs) {
      if (!seen.insert({r.left, r.right}).second)
        throw AmbiguityError("duplicate rule (" + r.left + "," + r.right + ") at site " + std::to_string(k));
      if (static_cast<std::size_t>(r.op.rows()) != d || static_cast<std::size_t>(r.op.cols()) != d)
        throw DimensionError("rule operator is not d x d");
      auto a = li.find(r.left), b = ri.find(r.right);
      if (a == li.end() || b == ri.end()) continue;
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < d; ++i) t.at({a->second, j, i, b->second}) += r.weight * r.op(j, i);
    }
    m.sites[k] = std::move(t);
  }
  return m;
}

DenseTensor to_dense(const Mpo& m) {
  validate_mpo(m);
  const std::size_t n = m.size(), d = m.phys_dim();
  double total = 1.0;
  for (std::size_t k = 0; k < n; ++k) total *= static_cast<double>(m.sites[k].dim(1));
  if (total > 4096.0) throw SizeGuardError("to_dense: d^N exceeds 4096");
  (void)d;
  // acc: (J, I, r)
  DenseTensor acc = reshape(m.sites[0], {m.sites[0].dim(1), m.sites[0].dim(2), m.sites[0].dim(3)});
  for (std::size_t k = 1; k < n; ++k) {
    const DenseTensor& s = m.sites[k];
    DenseTensor x = contract(acc, s, {{2, 0}});  // (J, I, j, i, r)
    DenseTensor y = permute(x, {0, 2, 1, 3, 4});
    acc = reshape(y, {acc.dim(0) * s.dim(1), acc.dim(1) * s.dim(2), s.dim(3)});
  }
  return reshape(acc, {acc.dim(0), acc.dim(1)});
}

RowMatrix to_dense_matrix(const Mpo& m) {
  DenseTensor t = to_dense(m);
  return t.as_matrix(1);
}

Mpo identity_mpo(std::size_t n, std::size_t d) {
  if (n == 0 || d == 0) throw ArgumentError("identity_mpo: N and d must be positive");
  return product_mpo(std::vector<RowMatrix>(n, RowMatrix::Identity(d, d)));
}

Mpo product_mpo(const std::vector<RowMatrix>& ops) {
  if (ops.empty()) throw ArgumentError("product_mpo: no operators");
  Mpo m;
  for (const auto& op : ops) {
    if (op.rows() != op.cols()) throw DimensionError("product_mpo: operator not square");
    const std::size_t d = static_cast<std::size_t>(op.rows());
    DenseTensor t({1, d, d, 1});
    t.as_matrix_rc(d, d) = op;
    m.sites.push_back(std::move(t));
  }
  return m;
}

Mpo random_mpo(std::size_t n, std::size_t d, std::size_t bond, std::uint64_t seed) {
  Rng rng(seed);
  Mpo m;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t l = k == 0 ? 1 : bond, r = k + 1 == n ? 1 : bond;
    m.sites.push_back(DenseTensor::random({l, d, d, r}, rng));
  }
  return m;
}

Mpo add(const Mpo& a, const Mpo& b) {
  validate_mpo(a);
  validate_mpo(b);
  if (a.size() != b.size()) throw DimensionError("add: length mismatch");
  Mpo out;
  const std::size_t n = a.size();
  for (std::size_t k = 0; k < n; ++k) {
    const DenseTensor& x = a.sites[k];
    const DenseTensor& y = b.sites[k];
    if (x.dim(1) != y.dim(1)) throw DimensionError("add: physical dimension mismatch");
    const std::size_t d = x.dim(1);
    const bool first = k == 0, last = k + 1 == n;
    const std::size_t l = first ? 1 : x.dim(0) + y.dim(0);
    const std::size_t r = last ? 1 : x.dim(3) + y.dim(3);
    const std::size_t yl = first ? 0 : x.dim(0), yr = last ? 0 : x.dim(3);
    DenseTensor t({l, d, d, r});
    for (std::size_t p = 0; p < x.dim(0); ++p)
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t q = 0; q < x.dim(3); ++q) t.at({p, j, i, q}) += x.at({p, j, i, q});
    for (std::size_t p = 0; p < y.dim(0); ++p)
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t q = 0; q < y.dim(3); ++q) t.at({yl + p, j, i, yr + q}) += y.at({p, j, i, q});
    out.sites.push_back(std::move(t));
  }
  return out;
}

Mpo multiply(const Mpo& a, const Mpo& b) {
  validate_mpo(a);
  validate_mpo(b);
  if (a.size() != b.size()) throw DimensionError("multiply: length mismatch");
  Mpo out;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const DenseTensor& x = a.sites[k];
    const DenseTensor& y = b.sites[k];
    if (x.dim(2) != y.dim(1)) throw DimensionError("multiply: physical dimension mismatch");
    DenseTensor z = contract(x, y, {{2, 1}});  // (al, j, ar, bl, i, br)
    DenseTensor p = permute(z, {0, 3, 1, 4, 2, 5});
    out.sites.push_back(reshape(p, {x.dim(0) * y.dim(0), x.dim(1), y.dim(2), x.dim(3) * y.dim(3)}));
  }
  return out;
}

Mpo scale(Mpo m, cplx c) {
  validate_mpo(m);
  m.sites.front() *= c;
  return m;
}

Mpo adjoint(const Mpo& m) {
  validate_mpo(m);
  Mpo out;
  for (const auto& s : m.sites) out.sites.push_back(permute(s, {0, 2, 1, 3}).conj());
  return out;
}

cplx trace(const Mpo& m) {
  validate_mpo(m);
  RowMatrix env = RowMatrix::Ones(1, 1);
  for (const auto& s : m.sites) {
    const std::size_t l = s.dim(0), d = s.dim(1), r = s.dim(3);
    RowMatrix t = RowMatrix::Zero(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(r));
    for (std::size_t p = 0; p < l; ++p)
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t q = 0; q < r; ++q) t(p, q) += s.at({p, i, i, q});
    env = env * t;
  }
  return env(0, 0);
}

Chain vectorize(const Mpo& m) {
  Chain c;
  for (const auto& s : m.sites) c.push_back(reshape(s, {s.dim(0), s.dim(1) * s.dim(2), s.dim(3)}));
  return c;
}

Mpo devectorize(const Chain& c, std::size_t d) {
  Mpo m;
  for (const auto& s : c) {
    if (s.dim(1) != d * d) throw DimensionError("devectorize: physical extent is not d^2");
    m.sites.push_back(reshape(s, {s.dim(0), d, d, s.dim(2)}));
  }
  return m;
}

cplx hs_inner(const Mpo& a, const Mpo& b) {
  validate_mpo(a);
  validate_mpo(b);
  if (a.size() != b.size()) throw DimensionError("hs_inner: length mismatch");
  return chain_inner(vectorize(a), vectorize(b));
}

double hs_norm(const Mpo& m) {
  validate_mpo(m);
  return chain_norm(vectorize(m));
}

OpChain left_multiplier(const Mpo& a) {
  OpChain o;
  for (const auto& s : a.sites) {
    const std::size_t l = s.dim(0), d = s.dim(1), r = s.dim(3);
    DenseTensor t({l, d * d, d * d, r});
    for (std::size_t p = 0; p < l; ++p)
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t m = 0; m < d; ++m)
          for (std::size_t q = 0; q < r; ++q) {
            const cplx v = s.at({p, j, m, q});
            if (v == cplx(0.0)) continue;
            for (std::size_t i = 0; i < d; ++i) t.at({p, j * d + i, m * d + i, q}) = v;
          }
    o.push_back(std::move(t));
  }
  return o;
}

std::size_t representability_cap(std::size_t n, std::size_t d, std::size_t bond) {
  const std::size_t k = std::min(bond + 1, n - bond - 1);
  double c = std::pow(static_cast<double>(d), 2.0 * static_cast<double>(k));
  if (c > 1e15) return static_cast<std::size_t>(1e15);
  return static_cast<std::size_t>(c);
}

bool is_upper_triangular(const Mpo& m) {
  for (const auto& s : m.sites) {
    const std::size_t l = s.dim(0), d = s.dim(1), r = s.dim(3);
    if (l != r) continue;  // boundary slices
    for (std::size_t p = 0; p < l; ++p)
      for (std::size_t q = 0; q < p; ++q)
        for (std::size_t j = 0; j < d; ++j)
          for (std::size_t i = 0; i < d; ++i)
            if (s.at({p, j, i, q}) != cplx(0.0)) return false;
  }
  return true;
}

}  // namespace tnops
