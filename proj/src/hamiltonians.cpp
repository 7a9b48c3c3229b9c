#include "tnops/hamiltonians.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tnops {

RowMatrix pauli_x() {
  RowMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

RowMatrix pauli_y() {
  RowMatrix m(2, 2);
  m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
  return m;
}

RowMatrix pauli_z() {
  RowMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

RowMatrix eye(std::size_t d) { return RowMatrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)); }

RowMatrix number_op() {
  RowMatrix m = RowMatrix::Zero(2, 2);
  m(1, 1) = 1.0;
  return m;
}

RowMatrix lowering_op() {
  RowMatrix m = RowMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  return m;
}

namespace {

Rule rule(Label l, Label r, RowMatrix op, cplx w = 1.0) { return Rule{std::move(l), std::move(r), std::move(op), w}; }

RowMatrix kron2(const RowMatrix& a, const RowMatrix& b) {
  const Eigen::Index d1 = a.rows(), d2 = b.rows();
  RowMatrix k(d1 * d2, d1 * d2);
  for (Eigen::Index j1 = 0; j1 < d1; ++j1)
    for (Eigen::Index i1 = 0; i1 < d1; ++i1) k.block(j1 * d2, i1 * d2, d2, d2) = a(j1, i1) * b;
  return k;
}

std::size_t dim_of(const RowMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("operator is not square");
  return static_cast<std::size_t>(m.rows());
}

void need_n(std::size_t n, std::size_t min) {
  if (n < min) throw ArgumentError("too few sites: N=" + std::to_string(n));
}

std::string num(std::size_t v) { return std::to_string(v); }

}  // namespace

SchmidtTerms schmidt_split(const RowMatrix& h, std::size_t d, double cut) {
  if (static_cast<std::size_t>(h.rows()) != d * d || h.cols() != h.rows())
    throw DimensionError("two-site term must be d^2 x d^2");
  // realign rows (j1 i1), cols (j2 i2)
  RowMatrix r(d * d, d * d);
  for (std::size_t j1 = 0; j1 < d; ++j1)
    for (std::size_t j2 = 0; j2 < d; ++j2)
      for (std::size_t i1 = 0; i1 < d; ++i1)
        for (std::size_t i2 = 0; i2 < d; ++i2) r(j1 * d + i1, j2 * d + i2) = h(j1 * d + j2, i1 * d + i2);
  SchmidtTerms st;
  if (r.norm() == 0.0) return st;
  SvdMatrices sv = svd_matrix(r, d * d, cut);
  for (Eigen::Index s = 0; s < sv.S.size(); ++s) {
    if (sv.S(s) < cut * sv.S(0)) break;
    const double w = std::sqrt(sv.S(s));
    RowMatrix x(d, d), y(d, d);
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t i = 0; i < d; ++i) {
        x(j, i) = w * sv.U(j * d + i, s);
        y(j, i) = w * sv.Vh(s, j * d + i);
      }
    st.x.push_back(x);
    st.y.push_back(y);
  }
  return st;
}

RuleTable nearest_neighbor_rules(const RowMatrix& x, const RowMatrix& y) {
  const std::size_t d = dim_of(x);
  RuleTable rt;
  rt.alphabet = {"1", "2", "3"};
  rt.left_boundary = "1";
  rt.right_boundary = "3";
  rt.rules = {rule("1", "1", eye(d)), rule("1", "2", x), rule("2", "3", y), rule("3", "3", eye(d))};
  return rt;
}

Mpo nearest_neighbor(const RowMatrix& x, const RowMatrix& y, std::size_t n) {
  need_n(n, 2);
  return from_rules(nearest_neighbor_rules(x, y), n, dim_of(x));
}

Mpo fixed_range(const RowMatrix& x, const RowMatrix& y, std::size_t r, std::size_t n) {
  need_n(n, 2);
  if (r < 1 || r > n - 1) throw ArgumentError("fixed_range: need 1 <= r <= N-1");
  const std::size_t d = dim_of(x);
  RuleTable rt;
  for (std::size_t a = 1; a <= r + 2; ++a) rt.alphabet.push_back(num(a));
  rt.left_boundary = "1";
  rt.right_boundary = num(r + 2);
  rt.rules.push_back(rule("1", "1", eye(d)));
  rt.rules.push_back(rule("1", "2", x));
  for (std::size_t q = 2; q <= r; ++q) rt.rules.push_back(rule(num(q), num(q + 1), eye(d)));
  rt.rules.push_back(rule(num(r + 1), num(r + 2), y));
  rt.rules.push_back(rule(num(r + 2), num(r + 2), eye(d)));
  return from_rules(rt, n, d);
}

Mpo ranged_all(const std::vector<std::pair<RowMatrix, RowMatrix>>& terms, const std::optional<RowMatrix>& local,
               std::size_t n) {
  need_n(n, 2);
  if (terms.empty()) throw ArgumentError("ranged_all: no terms");
  if (terms.size() > n - 1) throw ArgumentError("ranged_all: range exceeds N-1");
  const std::size_t d = dim_of(terms[0].first);
  // group ranges sharing the same X; each group is a counter chain
  std::vector<std::size_t> group(terms.size());
  std::vector<std::size_t> reps;
  for (std::size_t q = 0; q < terms.size(); ++q) {
    std::size_t g = reps.size();
    for (std::size_t r = 0; r < reps.size(); ++r)
      if ((terms[reps[r]].first - terms[q].first).norm() == 0.0) g = r;
    if (g == reps.size()) reps.push_back(q);
    group[q] = g;
  }
  std::vector<std::size_t> len(reps.size(), 0);
  for (std::size_t q = 0; q < terms.size(); ++q) len[group[q]] = q + 1;

  RuleTable rt;
  rt.alphabet.push_back("I");
  auto lab = [](std::size_t g, std::size_t m) { return "g" + num(g) + "m" + num(m); };
  for (std::size_t g = 0; g < reps.size(); ++g)
    for (std::size_t m = 1; m <= len[g]; ++m) rt.alphabet.push_back(lab(g, m));
  rt.alphabet.push_back("D");
  rt.left_boundary = "I";
  rt.right_boundary = "D";
  rt.rules.push_back(rule("I", "I", eye(d)));
  rt.rules.push_back(rule("D", "D", eye(d)));
  if (local) rt.rules.push_back(rule("I", "D", *local));
  for (std::size_t g = 0; g < reps.size(); ++g) {
    rt.rules.push_back(rule("I", lab(g, 1), terms[reps[g]].first));
    for (std::size_t m = 1; m < len[g]; ++m) rt.rules.push_back(rule(lab(g, m), lab(g, m + 1), eye(d)));
  }
  for (std::size_t q = 0; q < terms.size(); ++q) rt.rules.push_back(rule(lab(group[q], q + 1), "D", terms[q].second));
  return from_rules(rt, n, d);
}

Mpo general_two_body(const PairTerms& h, std::size_t n, std::size_t d) {
  need_n(n, 2);
  const std::size_t d2 = d * d;
  RuleTable rt;
  auto lab = [](std::size_t k, std::size_t q) { return "k" + num(k) + "q" + num(q); };
  rt.alphabet.push_back("I");
  for (std::size_t k = 0; k < d2; ++k)
    for (std::size_t q = 1; q + 1 <= n; ++q) rt.alphabet.push_back(lab(k, q));
  rt.alphabet.push_back("D");
  rt.left_boundary = "I";
  rt.right_boundary = "D";
  for (const auto& [ij, m] : h) {
    if (ij.first >= ij.second || ij.second >= n) throw ArgumentError("general_two_body: need i < j < N");
    if (static_cast<std::size_t>(m.rows()) != d2 || static_cast<std::size_t>(m.cols()) != d2)
      throw DimensionError("general_two_body: term must be d^2 x d^2");
  }
  for (std::size_t site = 0; site < n; ++site) {
    std::vector<Rule> rs;
    rs.push_back(rule("I", "I", eye(d)));
    rs.push_back(rule("D", "D", eye(d)));
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) {
        const std::size_t k = a * d + b;
        RowMatrix s = RowMatrix::Zero(d, d);
        s(a, b) = 1.0;
        rs.push_back(rule("I", lab(k, 1), s));
        for (std::size_t q = 1; q + 1 < n; ++q) rs.push_back(rule(lab(k, q), lab(k, q + 1), eye(d)));
        // close every pending basis term that started q sites to the left
        for (std::size_t q = 1; q <= site; ++q) {
          auto it = h.find({site - q, site});
          if (it == h.end()) continue;
          RowMatrix blk = it->second.block(a * d, b * d, d, d);
          rs.push_back(rule(lab(k, q), "D", blk));
        }
      }
    rt.overrides[site] = std::move(rs);
  }
  return from_rules(rt, n, d);
}

std::size_t fixed_type_max_bond(std::size_t n, std::size_t chi) { return 2 + chi * (n / 2); }

Mpo fixed_type(const RowMatrix& h, const Eigen::MatrixXd& c, const std::vector<RowMatrix>& locals, std::size_t n,
               std::size_t d) {
  need_n(n, 2);
  if (static_cast<std::size_t>(c.rows()) != n || static_cast<std::size_t>(c.cols()) != n)
    throw DimensionError("fixed_type: coupling matrix must be N x N");
  if (!locals.empty() && locals.size() != n) throw DimensionError("fixed_type: need one local term per site");
  const SchmidtTerms st = schmidt_split(h, d);
  const std::size_t chi = st.x.size();

  auto left_rep = [&](std::size_t b) { return b + 1 <= n - b - 1; };
  auto L = [](std::size_t s, std::size_t i) { return "L" + num(s) + "_" + num(i); };
  auto R = [](std::size_t s, std::size_t j) { return "R" + num(s) + "_" + num(j); };

  RuleTable rt;
  rt.alphabet = {"I", "D"};
  rt.left_boundary = "I";
  rt.right_boundary = "D";
  for (std::size_t b = 0; b + 1 < n; ++b) {
    std::vector<Label> a{"I"};
    if (left_rep(b)) {
      for (std::size_t i = 0; i <= b; ++i)
        for (std::size_t s = 0; s < chi; ++s) a.push_back(L(s, i));
    } else {
      for (std::size_t j = b + 1; j < n; ++j)
        for (std::size_t s = 0; s < chi; ++s) a.push_back(R(s, j));
    }
    a.push_back("D");
    rt.bond_alphabets[b] = std::move(a);
  }

  const RowMatrix id = eye(d);
  for (std::size_t k = 0; k < n; ++k) {
    const bool ll = k == 0 ? true : left_rep(k - 1);
    const bool rl = k + 1 == n ? ll : left_rep(k);
    std::vector<Rule> rs;
    rs.push_back(rule("I", "I", id));
    rs.push_back(rule("D", "D", id));
    if (!locals.empty() && locals[k].norm() != 0.0) rs.push_back(rule("I", "D", locals[k]));
    for (std::size_t s = 0; s < chi; ++s) {
      if (ll && rl) {
        rs.push_back(rule("I", L(s, k), st.x[s]));
        for (std::size_t i = 0; i < k; ++i) {
          rs.push_back(rule(L(s, i), L(s, i), id));
          if (c(i, k) != 0.0) rs.push_back(rule(L(s, i), "D", st.y[s], c(i, k)));
        }
      } else if (!ll && !rl) {
        for (std::size_t j = k + 1; j < n; ++j) {
          if (c(k, j) != 0.0) rs.push_back(rule("I", R(s, j), st.x[s], c(k, j)));
          rs.push_back(rule(R(s, j), R(s, j), id));
        }
        rs.push_back(rule(R(s, k), "D", st.y[s]));
      } else if (ll && !rl) {
        // transition site: the coupling matrix is folded in here
        for (std::size_t j = k + 1; j < n; ++j)
          if (c(k, j) != 0.0) rs.push_back(rule("I", R(s, j), st.x[s], c(k, j)));
        for (std::size_t i = 0; i < k; ++i) {
          if (c(i, k) != 0.0) rs.push_back(rule(L(s, i), "D", st.y[s], c(i, k)));
          for (std::size_t j = k + 1; j < n; ++j)
            if (c(i, j) != 0.0) rs.push_back(rule(L(s, i), R(s, j), id, c(i, j)));
        }
      } else {
        throw ArgumentError("fixed_type: inconsistent bond representations");
      }
    }
    rt.overrides[k] = std::move(rs);
  }
  return from_rules(rt, n, d);
}

RuleTable exp_decay_rules(const RowMatrix& x, const RowMatrix& y, double beta, std::size_t n, bool periodic) {
  const std::size_t d = dim_of(x);
  RuleTable rt;
  rt.left_boundary = "1";
  if (!periodic) {
    rt.alphabet = {"1", "2", "3"};
    rt.right_boundary = "3";
    rt.rules = {rule("1", "1", eye(d)), rule("1", "2", x), rule("2", "2", eye(d), beta), rule("2", "3", y, beta),
                rule("3", "3", eye(d))};
    return rt;
  }
  if (beta == 0.0) throw ArgumentError("exp_decay periodic: beta must be nonzero");
  // second channel carries beta^(N-q) = a * beta^-(q-1) * b with a*b = beta^(N-1)
  const double h = static_cast<double>(n / 2);
  const double a = std::pow(beta, h), b = std::pow(beta, static_cast<double>(n) - 1.0 - h);
  rt.alphabet = {"1", "2", "3", "4"};
  rt.right_boundary = "4";
  rt.rules = {rule("1", "1", eye(d)),       rule("1", "2", x),           rule("2", "2", eye(d), beta),
              rule("2", "4", y, beta),      rule("1", "3", x, a),        rule("3", "3", eye(d), 1.0 / beta),
              rule("3", "4", y, b),         rule("4", "4", eye(d))};
  return rt;
}

Mpo exp_decay(const RowMatrix& x, const RowMatrix& y, double beta, std::size_t n, bool periodic) {
  need_n(n, 2);
  return from_rules(exp_decay_rules(x, y, beta, n, periodic), n, dim_of(x));
}

Mpo exp_decay_general(const RowMatrix& hm, double beta, std::size_t n, std::size_t d, bool periodic) {
  need_n(n, 2);
  const SchmidtTerms st = schmidt_split(hm, d);
  const std::size_t chi = st.x.size();
  RuleTable rt;
  rt.alphabet.push_back("I");
  for (std::size_t s = 0; s < chi; ++s) rt.alphabet.push_back("f" + num(s));
  if (periodic)
    for (std::size_t s = 0; s < chi; ++s) rt.alphabet.push_back("b" + num(s));
  rt.alphabet.push_back("D");
  rt.left_boundary = "I";
  rt.right_boundary = "D";
  rt.rules.push_back(rule("I", "I", eye(d)));
  rt.rules.push_back(rule("D", "D", eye(d)));
  const double hh = static_cast<double>(n / 2);
  const double a = periodic ? std::pow(beta, hh) : 0.0;
  const double b = periodic ? std::pow(beta, static_cast<double>(n) - 1.0 - hh) : 0.0;
  if (periodic && beta == 0.0) throw ArgumentError("exp_decay periodic: beta must be nonzero");
  for (std::size_t s = 0; s < chi; ++s) {
    const Label f = "f" + num(s);
    rt.rules.push_back(rule("I", f, st.x[s]));
    rt.rules.push_back(rule(f, f, eye(d), beta));
    rt.rules.push_back(rule(f, "D", st.y[s], beta));
    if (periodic) {
      const Label g = "b" + num(s);
      rt.rules.push_back(rule("I", g, st.x[s], a));
      rt.rules.push_back(rule(g, g, eye(d), 1.0 / beta));
      rt.rules.push_back(rule(g, "D", st.y[s], b));
    }
  }
  return from_rules(rt, n, d);
}

Mpo poly_exp(const RowMatrix& x, const RowMatrix& y, const std::vector<PolyExpTerm>& terms, std::size_t n) {
  need_n(n, 2);
  if (terms.empty()) throw ArgumentError("poly_exp: no terms");
  const std::size_t d = dim_of(x);
  RuleTable rt;
  rt.alphabet.push_back("I");
  auto lab = [](std::size_t t, std::size_t j) { return "t" + num(t) + "l" + num(j); };
  for (std::size_t t = 0; t < terms.size(); ++t)
    for (std::size_t j = 0; j <= terms[t].k; ++j) rt.alphabet.push_back(lab(t, j));
  rt.alphabet.push_back("D");
  rt.left_boundary = "I";
  rt.right_boundary = "D";
  rt.rules.push_back(rule("I", "I", eye(d)));
  rt.rules.push_back(rule("D", "D", eye(d)));
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const auto& tm = terms[t];
    // w_j: forward differences of (x+1)^k at 0, so sum_j w_j C(q-1, j) = q^k
    std::vector<double> w(tm.k + 1, 0.0);
    for (std::size_t j = 0; j <= tm.k; ++j) {
      double binom = 1.0;
      for (std::size_t m = 0; m <= j; ++m) {
        const double f = std::pow(static_cast<double>(m + 1), static_cast<double>(tm.k));
        w[j] += ((j - m) % 2 ? -1.0 : 1.0) * binom * f;
        binom = binom * static_cast<double>(j - m) / static_cast<double>(m + 1);
      }
    }
    rt.rules.push_back(rule("I", lab(t, 0), x));
    for (std::size_t j = 0; j <= tm.k; ++j) {
      rt.rules.push_back(rule(lab(t, j), lab(t, j), eye(d), tm.alpha));
      if (j < tm.k) rt.rules.push_back(rule(lab(t, j), lab(t, j + 1), eye(d), tm.alpha));
      if (w[j] != 0.0) rt.rules.push_back(rule(lab(t, j), "D", y, tm.b * tm.alpha * w[j]));
    }
  }
  return from_rules(rt, n, d);
}

Mpo k_body_chain(const std::vector<RowMatrix>& ops, const std::vector<double>& c, std::size_t n) {
  const std::size_t k = ops.size();
  if (k == 0) throw ArgumentError("k_body_chain: no operators");
  if (k > n) throw ArgumentError("k_body_chain: k exceeds N");
  if (!c.empty() && c.size() != n - k + 1) throw DimensionError("k_body_chain: need N-k+1 couplings");
  const std::size_t d = dim_of(ops[0]);
  RuleTable rt;
  for (std::size_t a = 1; a <= k + 1; ++a) rt.alphabet.push_back(num(a));
  rt.left_boundary = "1";
  rt.right_boundary = num(k + 1);
  if (n == 1) {
    rt.rules = {rule("1", "2", ops[0], c.empty() ? 1.0 : c[0])};
    return from_rules(rt, n, d);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Rule> rs;
    rs.push_back(rule("1", "1", eye(d)));
    if (i + k <= n) {
      const double ci = c.empty() ? 1.0 : c[i];
      if (ci != 0.0) rs.push_back(rule("1", "2", ops[0], ci));
    }
    for (std::size_t j = 2; j <= k; ++j) rs.push_back(rule(num(j), num(j + 1), ops[j - 1]));
    rs.push_back(rule(num(k + 1), num(k + 1), eye(d)));
    rt.overrides[i] = std::move(rs);
  }
  return from_rules(rt, n, d);
}

Mpo ising(const IsingParams& p, std::size_t n) {
  need_n(n, 2);
  RuleTable rt;
  rt.alphabet = {"1", "2", "3"};
  rt.left_boundary = "1";
  rt.right_boundary = "3";
  rt.rules = {rule("1", "1", eye(2)), rule("1", "2", pauli_z(), -1.0), rule("2", "3", pauli_z()),
              rule("1", "3", pauli_x(), -p.B), rule("3", "3", eye(2))};
  return from_rules(rt, n, 2);
}

Mpo xxz(const XxzParams& p, std::size_t n) {
  need_n(n, 2);
  const double ct = std::cos(p.theta), s = std::sin(p.theta);
  RuleTable rt;
  rt.alphabet = {"I", "x", "y", "z", "D"};
  rt.left_boundary = "I";
  rt.right_boundary = "D";
  rt.rules = {rule("I", "I", eye(2)),           rule("D", "D", eye(2)),         rule("I", "x", pauli_x()),
              rule("x", "D", pauli_x(), ct),   rule("I", "y", pauli_y()),       rule("y", "D", pauli_y(), ct),
              rule("I", "z", pauli_z()),       rule("z", "D", pauli_z(), ct * p.delta)};
  if (s != 0.0) rt.rules.push_back(rule("I", "D", pauli_z(), s));
  return from_rules(rt, n, 2);
}

std::vector<double> regular_positions(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) x[j] = static_cast<double>(j + 1);
  return x;
}

std::vector<double> randomize_positions(std::size_t n, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0 && sigma < 1.0)) throw ArgumentError("randomize_positions: need 0 <= sigma < 1");
  Rng rng = Rng(seed).substream("positions");
  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) x[j] = static_cast<double>(j + 1) + sigma * rng.normal();
  return x;
}

Eigen::MatrixXd rydberg_couplings(const RydbergParams& p, std::size_t n, const std::vector<double>& positions) {
  const std::vector<double> x = positions.empty() ? regular_positions(n) : positions;
  if (x.size() != n) throw DimensionError("rydberg: need N positions");
  for (std::size_t j = 0; j + 1 < n; ++j)
    if (!(x[j + 1] > x[j])) throw ArgumentError("rydberg: positions must be strictly increasing");
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j + 1; k < n; ++k) c(j, k) = p.beta0 / std::pow(x[k] - x[j], 3.0);
  return c;
}

Mpo rydberg(const RydbergParams& p, std::size_t n, const std::vector<double>& positions) {
  need_n(n, 2);
  const Eigen::MatrixXd c = rydberg_couplings(p, n, positions);
  const RowMatrix loc = p.omega * pauli_x() + p.delta * number_op();
  return fixed_type(kron2(number_op(), number_op()), c, std::vector<RowMatrix>(n, loc), n, 2);
}

Eigen::MatrixXd spin_glass_couplings(const SpinGlassParams& p, std::size_t n) {
  Rng rng = Rng(p.seed).substream("spin_glass");
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j + 1; k < n; ++k) c(j, k) = rng.normal();
  return c;
}

Mpo spin_glass(const SpinGlassParams& p, std::size_t n) {
  need_n(n, 2);
  const Eigen::MatrixXd c = spin_glass_couplings(p, n);
  return fixed_type(kron2(pauli_z(), pauli_z()), c, std::vector<RowMatrix>(n, RowMatrix(p.B * pauli_x())), n, 2);
}

Eigen::MatrixXd couplings_matrix(const std::vector<double>& upper, std::size_t n) {
  if (upper.size() != n * (n - 1) / 2) throw DimensionError("couplings: need N(N-1)/2 upper-triangle entries");
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::size_t t = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) c(i, j) = upper[t++];
  return c;
}

const char* hamiltonian_kind_name(HamiltonianKind k) {
  switch (k) {
    case HamiltonianKind::NearestNeighbor: return "nearestNeighbor";
    case HamiltonianKind::FixedRange: return "fixedRange";
    case HamiltonianKind::RangedAll: return "rangedAll";
    case HamiltonianKind::GeneralTwoBody: return "generalTwoBody";
    case HamiltonianKind::FixedType: return "fixedType";
    case HamiltonianKind::ExpDecay: return "expDecay";
    case HamiltonianKind::ExpDecayPeriodic: return "expDecayPeriodic";
    case HamiltonianKind::PolyExp: return "polyExp";
    case HamiltonianKind::KBodyChain: return "kBodyChain";
    case HamiltonianKind::Model: return "model";
  }
  return "?";
}

HamiltonianKind hamiltonian_kind_from_name(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(HamiltonianKind::Model); ++i) {
    auto k = static_cast<HamiltonianKind>(i);
    if (s == hamiltonian_kind_name(k)) return k;
  }
  throw ConfigError("unknown hamiltonian kind: " + s);
}

namespace {

const RowMatrix& op_at(const HamiltonianSpec& s, std::size_t i) {
  if (s.ops.size() <= i) throw ConfigError(std::string("spec needs at least ") + std::to_string(i + 1) + " operators");
  return s.ops[i];
}

// ops = {h} (d^2 x d^2) or {X, Y}
RowMatrix pair_term(const HamiltonianSpec& s) {
  const RowMatrix& a = op_at(s, 0);
  if (static_cast<std::size_t>(a.rows()) == s.d * s.d && s.d > 1) return a;
  return kron2(a, op_at(s, 1));
}

}  // namespace

Mpo build_hamiltonian(const HamiltonianSpec& s) {
  const std::size_t n = s.n_sites;
  switch (s.kind) {
    case HamiltonianKind::NearestNeighbor: return nearest_neighbor(op_at(s, 0), op_at(s, 1), n);
    case HamiltonianKind::FixedRange: return fixed_range(op_at(s, 0), op_at(s, 1), s.range, n);
    case HamiltonianKind::RangedAll: {
      std::vector<std::pair<RowMatrix, RowMatrix>> t;
      for (std::size_t q = 1; q <= s.range; ++q) t.emplace_back(op_at(s, 0), op_at(s, q));
      return ranged_all(t, s.local, n);
    }
    case HamiltonianKind::GeneralTwoBody: {
      const Eigen::MatrixXd c = couplings_matrix(s.couplings, n);
      const RowMatrix h = pair_term(s);
      PairTerms pt;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (c(i, j) != 0.0) pt[{i, j}] = c(i, j) * h;
      return general_two_body(pt, n, s.d);
    }
    case HamiltonianKind::FixedType: {
      const Eigen::MatrixXd c = couplings_matrix(s.couplings, n);
      std::vector<RowMatrix> loc;
      if (s.local) loc.assign(n, *s.local);
      return fixed_type(pair_term(s), c, loc, n, s.d);
    }
    case HamiltonianKind::ExpDecay: return exp_decay(op_at(s, 0), op_at(s, 1), s.beta, n, false);
    case HamiltonianKind::ExpDecayPeriodic: return exp_decay(op_at(s, 0), op_at(s, 1), s.beta, n, true);
    case HamiltonianKind::PolyExp: {
      if (s.b_coeffs.size() != s.alpha_coeffs.size() || s.b_coeffs.size() != s.powers.size())
        throw ConfigError("polyExp: b_coeffs, alpha_coeffs and powers must have equal length");
      std::vector<PolyExpTerm> t;
      for (std::size_t i = 0; i < s.b_coeffs.size(); ++i) t.push_back({s.b_coeffs[i], s.powers[i], s.alpha_coeffs[i]});
      return poly_exp(op_at(s, 0), op_at(s, 1), t, n);
    }
    case HamiltonianKind::KBodyChain: return k_body_chain(s.ops, s.couplings, n);
    case HamiltonianKind::Model: {
      const ModelSpec& m = s.model;
      if (m.name == "ising") return ising({m.B}, n);
      if (m.name == "xxz") return xxz({m.theta, m.delta}, n);
      if (m.name == "rydberg") {
        std::vector<double> x = s.positions;
        if (x.empty() && m.sigma > 0.0) x = randomize_positions(n, m.sigma, m.seed);
        return rydberg({m.omega, m.delta, m.beta0}, n, x);
      }
      if (m.name == "spinglass") return spin_glass({m.seed, m.B}, n);
      throw ConfigError("unknown model: " + m.name);
    }
  }
  throw ConfigError("unhandled hamiltonian kind");
}

}  // namespace tnops
