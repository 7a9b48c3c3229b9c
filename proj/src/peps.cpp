#include "tnops/peps.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <tuple>
#include <unordered_map>

#include "tnops/chain.hpp"

namespace tnops {

namespace {

std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= b;
  return r;
}

void check_grid(std::size_t rows, std::size_t cols, std::size_t count, const char* what) {
  if (rows == 0 || cols == 0) throw ArgumentError(std::string(what) + ": empty grid");
  if (count != rows * cols) throw DimensionError(std::string(what) + ": site count does not match the grid");
}

void check_bonds(const std::vector<DenseTensor>& s, std::size_t rows, std::size_t cols, std::size_t rank,
                 const char* what) {
  check_grid(rows, cols, s.size(), what);
  const std::size_t d = s[0].rank() == rank ? s[0].dim(4) : 0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const DenseTensor& t = s[r * cols + c];
      const std::string at = std::string(what) + " site (" + std::to_string(r) + "," + std::to_string(c) + ")";
      if (t.rank() != rank) throw DimensionError(at + " has wrong rank");
      if (t.dim(4) != d || (rank == 6 && t.dim(5) != d)) throw DimensionError(at + " physical extent mismatch");
      if (c == 0 && t.dim(0) != 1) throw DimensionError(at + " left boundary bond must be 1");
      if (c + 1 == cols && t.dim(1) != 1) throw DimensionError(at + " right boundary bond must be 1");
      if (r == 0 && t.dim(2) != 1) throw DimensionError(at + " top boundary bond must be 1");
      if (r + 1 == rows && t.dim(3) != 1) throw DimensionError(at + " bottom boundary bond must be 1");
      if (c + 1 < cols && t.dim(1) != s[r * cols + c + 1].dim(0)) throw DimensionError(at + " horizontal bond mismatch");
      if (r + 1 < rows && t.dim(3) != s[(r + 1) * cols + c].dim(2)) throw DimensionError(at + " vertical bond mismatch");
    }
}

}  // namespace

void validate_pepo(const Pepo& p) { check_bonds(p.sites, p.rows, p.cols, 6, "pepo"); }
void validate_peps(const Peps& p) { check_bonds(p.sites, p.rows, p.cols, 5, "peps"); }

std::size_t Pepo::max_horizontal_bond() const {
  std::size_t m = 0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c + 1 < cols; ++c) m = std::max(m, horizontal_bond(r, c));
  return m;
}

std::size_t Pepo::max_vertical_bond() const {
  std::size_t m = 0;
  for (std::size_t r = 0; r + 1 < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m = std::max(m, vertical_bond(r, c));
  return m;
}

// ---------------------------------------------------------------- rule compiler

PepoBuild pepo_from_rules_2d(const Rule2DTable& t, std::size_t rows, std::size_t cols, std::size_t d) {
  if (rows == 0 || cols == 0) throw ArgumentError("pepo_from_rules_2d: empty grid");
  if (d == 0) throw ArgumentError("pepo_from_rules_2d: d must be positive");
  for (const Label* b : {&t.left_boundary, &t.right_boundary, &t.top_boundary, &t.bottom_boundary})
    if (b->empty()) throw ConfigError("pepo_from_rules_2d: boundary label missing");

  using Index = std::unordered_map<Label, std::size_t>;
  auto index_of = [](const std::vector<Label>& a) {
    Index m;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!m.emplace(a[i], i).second) throw ConfigError("duplicate label in alphabet: " + a[i]);
    return m;
  };
  auto h_alpha = [&](std::size_t b) -> const std::vector<Label>& {
    auto it = t.h_alphabet_by_bond.find(b);
    return it == t.h_alphabet_by_bond.end() ? t.h_alphabet : it->second;
  };
  auto v_alpha = [&](std::size_t c) -> const std::vector<Label>& {
    auto it = t.v_alphabet_by_col.find(c);
    return it == t.v_alphabet_by_col.end() ? t.v_alphabet : it->second;
  };
  auto top_b = [&](std::size_t c) {
    auto it = t.top_boundary_by_col.find(c);
    return it == t.top_boundary_by_col.end() ? t.top_boundary : it->second;
  };
  auto bottom_b = [&](std::size_t c) {
    auto it = t.bottom_boundary_by_col.find(c);
    return it == t.bottom_boundary_by_col.end() ? t.bottom_boundary : it->second;
  };

  std::vector<Index> h_index(cols > 1 ? cols - 1 : 0), v_index(cols);
  std::set<Label> known = {t.left_boundary, t.right_boundary, t.top_boundary, t.bottom_boundary};
  for (std::size_t b = 0; b + 1 < cols; ++b) {
    if (h_alpha(b).empty()) throw ConfigError("empty horizontal alphabet at bond " + std::to_string(b));
    h_index[b] = index_of(h_alpha(b));
    known.insert(h_alpha(b).begin(), h_alpha(b).end());
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (rows > 1 && v_alpha(c).empty()) throw ConfigError("empty vertical alphabet in column " + std::to_string(c));
    v_index[c] = index_of(v_alpha(c));
    known.insert(v_alpha(c).begin(), v_alpha(c).end());
    known.insert(top_b(c));
    known.insert(bottom_b(c));
  }

  // rule lists: name -> (rules, hit counts)
  std::map<std::string, std::vector<std::size_t>> hits;
  auto check_list = [&](const std::vector<Rule2D>& rs, const std::string& name) {
    std::set<std::tuple<Label, Label, Label, Label>> seen;
    for (std::size_t i = 0; i < rs.size(); ++i) {
      const Rule2D& r = rs[i];
      if (!seen.emplace(r.left, r.right, r.top, r.bottom).second)
        throw AmbiguityError("duplicate rule for (" + r.left + "," + r.right + "," + r.top + "," + r.bottom + ") in " +
                             name);
      if (r.op.rows() != static_cast<Eigen::Index>(d) || r.op.cols() != static_cast<Eigen::Index>(d))
        throw DimensionError("rule operator is not d x d in " + name);
      if (t.strict_labels)
        for (const Label* l : {&r.left, &r.right, &r.top, &r.bottom})
          if (!known.count(*l)) throw ConfigError("unknown label '" + *l + "' in " + name);
    }
    hits[name].assign(rs.size(), 0);
  };
  check_list(t.rules, "rules");
  for (const auto& [c, rs] : t.col_rules) check_list(rs, "column " + std::to_string(c));
  for (const auto& [rc, rs] : t.site_rules)
    check_list(rs, "site (" + std::to_string(rc.first) + "," + std::to_string(rc.second) + ")");

  PepoBuild out;
  Pepo& p = out.pepo;
  p.rows = rows;
  p.cols = cols;
  p.sites.reserve(rows * cols);
  const Index single_left = {{t.left_boundary, 0}}, single_right = {{t.right_boundary, 0}};
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const Index& li = c == 0 ? single_left : h_index[c - 1];
      const Index& ri = c + 1 == cols ? single_right : h_index[c];
      const Index ti = r == 0 ? Index{{top_b(c), 0}} : v_index[c];
      const Index bi = r + 1 == rows ? Index{{bottom_b(c), 0}} : v_index[c];
      const std::vector<Rule2D>* rs = &t.rules;
      std::string name = "rules";
      if (auto it = t.site_rules.find({r, c}); it != t.site_rules.end()) {
        rs = &it->second;
        name = "site (" + std::to_string(r) + "," + std::to_string(c) + ")";
      } else if (auto jt = t.col_rules.find(c); jt != t.col_rules.end()) {
        rs = &jt->second;
        name = "column " + std::to_string(c);
      }
      DenseTensor w({li.size(), ri.size(), ti.size(), bi.size(), d, d});
      for (std::size_t k = 0; k < rs->size(); ++k) {
        const Rule2D& rule = (*rs)[k];
        auto a = li.find(rule.left), b = ri.find(rule.right), e = ti.find(rule.top), f = bi.find(rule.bottom);
        if (a == li.end() || b == ri.end() || e == ti.end() || f == bi.end()) continue;
        ++hits[name][k];
        for (std::size_t j = 0; j < d; ++j)
          for (std::size_t i = 0; i < d; ++i)
            w.at({a->second, b->second, e->second, f->second, j, i}) += rule.weight * rule.op(j, i);
      }
      p.sites.push_back(std::move(w));
    }

  auto report = [&](const std::vector<Rule2D>& rs, const std::string& name) {
    const auto& h = hits[name];
    for (std::size_t k = 0; k < rs.size(); ++k)
      if (h[k] == 0) out.unused_rules.push_back(name + "#" + std::to_string(k) + " " + rs[k].note);
  };
  report(t.rules, "rules");
  for (const auto& [c, rs] : t.col_rules) report(rs, "column " + std::to_string(c));
  for (const auto& [rc, rs] : t.site_rules)
    report(rs, "site (" + std::to_string(rc.first) + "," + std::to_string(rc.second) + ")");
  return out;
}

Pepo product_pepo(std::size_t rows, std::size_t cols, const std::vector<RowMatrix>& ops) {
  check_grid(rows, cols, ops.size(), "product_pepo");
  Pepo p;
  p.rows = rows;
  p.cols = cols;
  const std::size_t d = ops[0].rows();
  for (const RowMatrix& o : ops) {
    if (o.rows() != static_cast<Eigen::Index>(d) || o.cols() != static_cast<Eigen::Index>(d))
      throw DimensionError("product_pepo: operators must all be d x d");
    DenseTensor w({1, 1, 1, 1, d, d});
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t i = 0; i < d; ++i) w.at({0, 0, 0, 0, j, i}) = o(j, i);
    p.sites.push_back(std::move(w));
  }
  return p;
}

Pepo identity_pepo(std::size_t rows, std::size_t cols, std::size_t d) {
  if (d == 0) throw ArgumentError("identity_pepo: d must be positive");
  return product_pepo(rows, cols, std::vector<RowMatrix>(rows * cols, RowMatrix::Identity(d, d)));
}

// ---------------------------------------------------------------- nearest neighbour

Rule2DTable nearest_neighbor_rules_2d(const RowMatrix& x, std::size_t side) {
  if (side < 2) throw ArgumentError("nearest-neighbour PEPO needs side >= 2");
  if (x.rows() != x.cols()) throw DimensionError("operator must be square");
  const RowMatrix one = RowMatrix::Identity(x.rows(), x.cols());
  Rule2DTable t;
  t.h_alphabet = {"1", "2", "3"};
  t.v_alphabet = {"1", "2"};
  t.left_boundary = t.right_boundary = t.top_boundary = t.bottom_boundary = "1";
  // branches: 1 = nothing yet, 2 = X placed, partner is the right neighbour, 3 = done
  t.rules = {
      {"1", "1", "1", "1", one, 1.0, "idle"},
      {"1", "2", "1", "1", x, 1.0, "horizontal pair, left"},
      {"2", "3", "1", "1", x, 1.0, "horizontal pair, right"},
      {"1", "3", "1", "2", x, 1.0, "vertical pair, upper"},
      {"1", "1", "2", "1", x, 1.0, "vertical pair, lower"},
      {"3", "3", "1", "1", one, 1.0, "done"},
  };
  // stem in the last column: 1 = no interaction above, 2 = X above waiting for its partner, 3 = done
  const std::size_t s = side - 1;
  t.v_alphabet_by_col[s] = {"1", "2", "3"};
  t.bottom_boundary_by_col[s] = "3";
  t.col_rules[s] = {
      {"1", "1", "1", "1", one, 1.0, "stem idle"},
      {"3", "1", "1", "3", one, 1.0, "branch reports"},
      {"1", "1", "3", "3", one, 1.0, "stem done"},
      {"2", "1", "1", "3", x, 1.0, "horizontal pair ends on the stem"},
      {"1", "1", "1", "2", x, 1.0, "vertical pair on the stem, upper"},
      {"1", "1", "2", "3", x, 1.0, "vertical pair on the stem, lower"},
  };
  return t;
}

Pepo pepo_nearest_neighbor(const RowMatrix& x, std::size_t side) {
  return pepo_from_rules_2d(nearest_neighbor_rules_2d(x, side), side, side, x.rows()).pepo;
}

// ---------------------------------------------------------------- long range, linear

namespace {

Label num(const char* p, long k) { return std::string(p) + std::to_string(k); }

void check_long_range(const Eigen::MatrixXd& c, const RowMatrix& x, const RowMatrix& y, std::size_t side) {
  if (side < 2) throw ArgumentError("long-range PEPO needs side >= 2");
  const auto n = static_cast<Eigen::Index>(side * side);
  if (c.rows() != n || c.cols() != n) throw DimensionError("coupling matrix must be side^2 x side^2");
  if (x.rows() != x.cols() || y.rows() != y.cols() || x.rows() != y.rows())
    throw DimensionError("X and Y must be square and of equal size");
}

}  // namespace

// Row of X carries R<k> (X k columns to the left) or L<k> (X k columns to the right of the
// left tensor) towards the coupling tensor C at (row of X, column of Y); V<m> runs down from C
// to Y. Rows report "e" to the stem in the last column, which allows exactly one report.
Rule2DTable long_range_rules_2d(const Eigen::MatrixXd& cm, const RowMatrix& x, const RowMatrix& y,
                                std::size_t side) {
  check_long_range(cm, x, y, side);
  const long n = static_cast<long>(side), s = n - 1;
  const RowMatrix one = RowMatrix::Identity(x.rows(), x.cols());
  auto coef = [&](long r1, long c1, long r2, long c2) { return cplx(cm(r1 * n + c1, r2 * n + c2), 0.0); };

  Rule2DTable t;
  t.left_boundary = t.right_boundary = t.top_boundary = t.bottom_boundary = "0";
  t.bottom_boundary_by_col[s] = "e";
  for (long b = 0; b + 1 < n; ++b) {
    std::vector<Label> a = {"0", "e"};
    for (long k = 1; k <= b + 1; ++k) a.push_back(num("R", k));
    for (long k = 1; k <= n - 1 - b; ++k) a.push_back(num("L", k));
    t.h_alphabet_by_bond[b] = a;
  }
  t.v_alphabet = {"0"};
  for (long m = 1; m < n; ++m) t.v_alphabet.push_back(num("V", m));
  t.v_alphabet_by_col[s] = t.v_alphabet;
  t.v_alphabet_by_col[s].insert(t.v_alphabet_by_col[s].begin() + 1, "e");
  t.h_alphabet = t.h_alphabet_by_bond.empty() ? std::vector<Label>{"0"} : t.h_alphabet_by_bond.begin()->second;

  for (long r = 0; r < n; ++r)
    for (long c = 0; c < n; ++c) {
      std::vector<Rule2D> rs;
      const long below = n - 1 - r;
      if (c < s) {
        rs.push_back({"0", "0", "0", "0", one, 1.0, "idle"});
        rs.push_back({"e", "e", "0", "0", one, 1.0, "done"});
        rs.push_back({"0", "R1", "0", "0", x, 1.0, "X, partner to the right or below right"});
        for (long k = 1; k <= c; ++k) {
          rs.push_back({num("R", k), num("R", k + 1), "0", "0", one, 1.0, "count right"});
          rs.push_back({num("R", k), "e", "0", "0", y, coef(r, c - k, r, c), "Y in the row of X"});
          for (long m = 1; m <= below; ++m)
            rs.push_back({num("R", k), "e", "0", num("V", m), one, coef(r, c - k, r + m, c), "C, X to the left"});
        }
        for (long k = 1; c + k <= s; ++k)
          for (long m = 1; m <= below; ++m)
            rs.push_back({"0", num("L", k), "0", num("V", m), one, coef(r, c + k, r + m, c), "C, X to the right"});
        if (c >= 1) {
          for (long k = 1; c + k <= s; ++k)
            rs.push_back({num("L", k + 1), num("L", k), "0", "0", one, 1.0, "count left"});
          rs.push_back({"L1", "e", "0", "0", x, 1.0, "X, C to the left"});
        }
        for (long m = 1; m <= below; ++m)
          rs.push_back({"0", "e", "0", num("V", m), x, coef(r, c, r + m, c), "X above Y"});
        for (long m = 1; m + 1 < n; ++m)
          rs.push_back({"0", "0", num("V", m + 1), num("V", m), one, 1.0, "count down"});
        rs.push_back({"0", "0", "V1", "0", y, 1.0, "Y below C"});
      } else {
        rs.push_back({"0", "0", "0", "0", one, 1.0, "stem idle"});
        rs.push_back({"0", "0", "e", "e", one, 1.0, "stem done"});
        rs.push_back({"e", "0", "0", "e", one, 1.0, "row reports"});
        for (long k = 1; k <= s; ++k) {
          rs.push_back({num("R", k), "0", "0", "e", y, coef(r, s - k, r, s), "Y on the stem in the row of X"});
          for (long m = 1; m <= below; ++m)
            rs.push_back({num("R", k), "0", "0", num("V", m), one, coef(r, s - k, r + m, s), "C on the stem"});
        }
        for (long m = 1; m <= below; ++m)
          rs.push_back({"0", "0", "0", num("V", m), x, coef(r, s, r + m, s), "X above Y on the stem"});
        rs.push_back({"L1", "0", "0", "e", x, 1.0, "X on the stem, C to the left"});
        for (long m = 1; m + 1 < n; ++m)
          rs.push_back({"0", "0", num("V", m + 1), num("V", m), one, 1.0, "count down"});
        rs.push_back({"0", "0", "V1", "e", y, 1.0, "Y on the stem"});
      }
      t.site_rules[{static_cast<std::size_t>(r), static_cast<std::size_t>(c)}] = std::move(rs);
    }
  return t;
}

std::size_t sqrt_mode_L(std::size_t side) {
  if (side < 2) throw ArgumentError("sqrt mode needs side >= 2");
  std::size_t l = 0;
  while (l * l < side - 1) ++l;
  return l;
}

// ---------------------------------------------------------------- long range, tabulated square-root rules

namespace {

struct TableRow {
  int number;
  const char* l;
  const char* r;
  const char* t;
  const char* b;
  char op;         // 'I', 'X', 'Y'
  const char* c;   // coefficient pattern, empty for none
  bool starred;
  const char* note;
};

// Printed numbering; the second "20" is stored as 30.
const TableRow kSqrtTable[] = {
    {1, "0", "0", "0", "0", 'I', "", false, ""},
    {2, "e", "e", "0", "e", 'I', "", false, ""},
    {3, "0", "0", "e", "e", 'I', "", false, ""},
    {4, "0", "1", "c", "1", 'X', "", false, ""},
    {5, "m", "e", "g", "n", 'X', "0,-1,m,n", false, "coefficient index read as zero horizontal distance"},
    {6, "-1", "0", "c", "e", 'X', "", false, ""},
    {7, "0", "c", "s", "g", 'X', "", false, "top input 's' is not in the alphabet"},
    {8, "0", "c", "1", "e", 'Y', "", false, ""},
    {9, "m", "f", "n", "e", 'Y', "n,m,0,0", false, ""},
    {10, "0", "g", "g", "e", 'Y', "", false, ""},
    {11, "m", "n", "o", "p", 'I', "n,m,o,p", false, ""},
    {12, "m", "-n", "o", "p", 'I', "-o,-n,m,p", false, ""},
    {13, "f", "e", "0", "f", 'I', "", false, ""},
    {14, "f", "0", "f", "e", 'I', "", false, ""},
    {15, "0", "g", "0", "g", 'I', "", false, ""},
    {16, "g", "0", "0", "g", 'I', "", false, ""},
    {17, "c", "e", "0", "c", 'I', "", false, ""},
    {18, "g", "0", "c", "e", 'I', "", false, ""},
    {19, "m", "0", "c", "n", 'I', "0,0,m,n", false, ""},
    {20, "0", "1", "0", "c", 'I', "", false, ""},
    {21, "c", "0", "1", "e", 'I', "", false, ""},
    {22, "L", "1", "c", "e", 'I', "", false, ""},
    {23, "0", "c", "1", "L", 'I', "", false, ""},
    {24, "-1", "-L", "c", "e", 'I', "", false, ""},
    {25, "-1", "e", "0", "c", 'I', "", false, ""},
    {26, "m", "f", "0", "m", 'I', "", false, ""},
    {27, "m", "0", "f", "m", 'I', "", false, ""},
    {28, "m", "m", "0", "d", 'I', "", false, ""},
    {29, "d", "0", "m", "m", 'I', "", false, ""},
    {30, "g", "-m", "0", "m", 'I', "", false, "printed as a second rule 20"},
    {31, "-m", "-m", "0", "d", 'I', "", false, ""},
    {32, "m", "m+1", "0", "c", 'I', "", true, ""},
    {33, "m", "m+1", "d", "e", 'I', "", true, ""},
    {34, "0", "d", "m+1", "m", 'I', "", true, ""},
    {35, "c", "0", "m+1", "m", 'I', "", true, ""},
    {36, "-m-1", "-m", "d", "e", 'I', "", true, ""},
    {37, "-m-1", "-m", "0", "c", 'I', "", true, ""},
};

struct Binding {
  long v[4] = {0, 0, 0, 0};  // m, n, o, p
};

long var_index(char ch) { return ch == 'm' ? 0 : ch == 'n' ? 1 : ch == 'o' ? 2 : ch == 'p' ? 3 : -1; }

// Substitute variables and L into a symbolic label.
Label expand(const std::string& sym, const Binding& b, long L) {
  if (sym == "L") return std::to_string(L);
  if (sym == "-L") return std::to_string(-L);
  std::string s = sym;
  bool neg = false;
  if (s.size() > 1 && s[0] == '-' && !std::isdigit(static_cast<unsigned char>(s[1]))) {
    neg = true;
    s = s.substr(1);
  }
  const long vi = s.empty() ? -1 : var_index(s[0]);
  if (vi < 0) return sym;
  long v = b.v[vi];
  if (s.size() > 1) v += std::stol(s.substr(1));  // "m+1", "m-1"
  return std::to_string(neg ? -v : v);
}

std::vector<long> vars_of(const TableRow& row) {
  std::set<long> vs;
  for (const char* f : {row.l, row.r, row.t, row.b, row.c})
    for (const char* p = f; *p; ++p)
      if (var_index(*p) >= 0) vs.insert(var_index(*p));
  return {vs.begin(), vs.end()};
}

}  // namespace

Rule2DTable sqrt_table_rules_2d(const Eigen::MatrixXd& cm, const RowMatrix& x, const RowMatrix& y,
                                std::size_t side) {
  check_long_range(cm, x, y, side);
  const long n = static_cast<long>(side);
  const long L = static_cast<long>(sqrt_mode_L(side));
  const RowMatrix one = RowMatrix::Identity(x.rows(), x.cols());

  Rule2DTable t;
  t.strict_labels = false;
  t.h_alphabet = {"0", "e", "c", "d", "f", "g"};
  t.v_alphabet = t.h_alphabet;
  for (long k = 1; k <= L; ++k) {
    t.h_alphabet.push_back(std::to_string(k));
    t.h_alphabet.push_back(std::to_string(-k));
    t.v_alphabet.push_back(std::to_string(k));
  }
  t.left_boundary = t.right_boundary = t.top_boundary = "0";
  t.bottom_boundary = "e";

  // distance from a coefficient index pair; "0,0" and "0,-1" are read as zero
  auto dist = [&](long a, long b) -> long {
    if (a == 0) return 0;
    if (a < 0) return -((-a - 1) * L + (-b));
    return (a - 1) * L + b;
  };

  for (long r = 0; r < n; ++r)
    for (long c = 0; c < n; ++c) {
      std::vector<Rule2D> rs;
      std::set<std::tuple<Label, Label, Label, Label>> seen;
      for (const TableRow& row : kSqrtTable) {
        const std::vector<long> vs = vars_of(row);
        const long hi = row.starred ? L - 1 : L;
        std::vector<long> cur(vs.size(), 1);
        if (hi < 1 && !vs.empty()) continue;
        while (true) {
          Binding bd;
          for (std::size_t i = 0; i < vs.size(); ++i) bd.v[vs[i]] = cur[i];
          Rule2D rule;
          rule.left = expand(row.l, bd, L);
          rule.right = expand(row.r, bd, L);
          rule.top = expand(row.t, bd, L);
          rule.bottom = expand(row.b, bd, L);
          rule.op = row.op == 'X' ? x : row.op == 'Y' ? y : one;
          rule.note = "table row " + std::to_string(row.number) + (row.note[0] ? std::string(": ") + row.note : "");
          bool ok = true;
          if (row.c[0]) {
            long idx[4];
            std::string pat = row.c;
            std::size_t pos = 0;
            for (int q = 0; q < 4; ++q) {
              const std::size_t comma = pat.find(',', pos);
              idx[q] = std::stol(expand(pat.substr(pos, comma - pos), bd, L));
              pos = comma == std::string::npos ? pat.size() : comma + 1;
            }
            const long hd = dist(idx[0], idx[1]), vd = dist(idx[2], idx[3]);
            const long r1 = r, c1 = c - hd, r2 = r + vd, c2 = c;
            ok = c1 >= 0 && c1 < n && r2 < n && vd >= 0 && (vd > 0 || hd > 0);
            if (ok) rule.weight = cm(r1 * n + c1, r2 * n + c2);
          }
          // repeated expansions of one printed rule collapse onto the same tuple for small L
          if (ok && seen.emplace(rule.left, rule.right, rule.top, rule.bottom).second) rs.push_back(std::move(rule));
          std::size_t i = 0;
          while (i < cur.size() && ++cur[i] > hi) cur[i++] = 1;
          if (i == cur.size()) break;
        }
      }
      t.site_rules[{static_cast<std::size_t>(r), static_cast<std::size_t>(c)}] = std::move(rs);
    }
  return t;
}

PepoBuild pepo_long_range(const Eigen::MatrixXd& c, const RowMatrix& x, const RowMatrix& y, std::size_t side,
                          LongRangeMode mode) {
  const Rule2DTable t =
      mode == LongRangeMode::Linear ? long_range_rules_2d(c, x, y, side) : sqrt_table_rules_2d(c, x, y, side);
  return pepo_from_rules_2d(t, side, side, x.rows());
}

// ---------------------------------------------------------------- dense forms

namespace {

// Raster contraction of a grid whose tensors are (left, right, top, bottom, phys).
// Returns a vector over the fused physical indices, site 0 most significant.
Vector contract_grid(const std::vector<DenseTensor>& sites, std::size_t rows, std::size_t cols) {
  // frontier axes: (P, V_0 .. V_{cols-1}, H)
  Shape fs(cols + 2, 1);
  DenseTensor f(fs);
  f.values()[0] = 1.0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const DenseTensor& w = sites[r * cols + c];
      // contract H with left, V_c with top
      DenseTensor g = contract(f, w, {{cols + 1, 0}, {1 + c, 2}});
      // g axes: P, V_0..V_{c-1}, V_{c+1}..V_{cols-1}, right, bottom, phys
      const std::size_t nv = cols - 1;
      std::vector<std::size_t> order;
      order.push_back(0);
      order.push_back(nv + 3);  // phys
      for (std::size_t k = 0; k < c; ++k) order.push_back(1 + k);
      order.push_back(nv + 2);  // bottom becomes V_c
      for (std::size_t k = c; k < nv; ++k) order.push_back(1 + k);
      order.push_back(nv + 1);  // right becomes H
      g = permute(g, order);
      Shape ns;
      ns.push_back(g.dim(0) * g.dim(1));
      for (std::size_t k = 2; k < g.rank(); ++k) ns.push_back(g.dim(k));
      f = reshape(g, ns);
    }
  if (f.size() != f.dim(0)) throw DimensionError("grid contraction left open bonds");
  Vector v(f.dim(0));
  for (std::size_t i = 0; i < f.dim(0); ++i) v(i) = f.values()[i];
  return v;
}

}  // namespace

RowMatrix pepo_to_dense(const Pepo& p) {
  validate_pepo(p);
  const std::size_t d = p.phys_dim(), n = p.rows * p.cols;
  if (std::pow(static_cast<double>(d), static_cast<double>(n)) > 4096.0)
    throw SizeGuardError("pepo_to_dense: d^N exceeds 4096");
  std::vector<DenseTensor> fused;
  for (const DenseTensor& s : p.sites)
    fused.push_back(reshape(s, {s.dim(0), s.dim(1), s.dim(2), s.dim(3), d * d}));
  const Vector v = contract_grid(fused, p.rows, p.cols);
  // v is over (o_0 i_0 o_1 i_1 ...); regroup into (o_0 o_1 ...), (i_0 i_1 ...)
  const std::size_t dn = ipow(d, n);
  RowMatrix m(dn, dn);
  for (std::size_t k = 0; k < dn * dn; ++k) {
    std::size_t rest = k, out = 0, in = 0, scale = 1;
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t pair = rest % (d * d);
      rest /= d * d;
      out += (pair / d) * scale;
      in += (pair % d) * scale;
      scale *= d;
    }
    m(out, in) = v(k);
  }
  return m;
}

Vector peps_to_dense(const Peps& p) {
  validate_peps(p);
  if (std::pow(static_cast<double>(p.phys_dim()), static_cast<double>(p.rows * p.cols)) > 4096.0)
    throw SizeGuardError("peps_to_dense: d^N exceeds 4096");
  return contract_grid(p.sites, p.rows, p.cols);
}

Peps random_peps(std::size_t rows, std::size_t cols, std::size_t d, std::size_t chi, std::uint64_t seed) {
  if (rows == 0 || cols == 0 || d == 0 || chi == 0) throw ArgumentError("random_peps: sizes must be positive");
  Rng rng = Rng(seed).substream("peps");
  Peps p;
  p.rows = rows;
  p.cols = cols;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      Shape s = {c == 0 ? 1 : chi, c + 1 == cols ? 1 : chi, r == 0 ? 1 : chi, r + 1 == rows ? 1 : chi, d};
      DenseTensor t = DenseTensor::random(s, rng);
      t *= 1.0 / t.norm();
      p.sites.push_back(std::move(t));
    }
  return p;
}

Peps product_peps(std::size_t rows, std::size_t cols, const std::vector<Vector>& locals) {
  check_grid(rows, cols, locals.size(), "product_peps");
  Peps p;
  p.rows = rows;
  p.cols = cols;
  const std::size_t d = locals[0].size();
  for (const Vector& v : locals) {
    if (static_cast<std::size_t>(v.size()) != d) throw DimensionError("product_peps: local vectors differ in size");
    DenseTensor t({1, 1, 1, 1, d});
    for (std::size_t i = 0; i < d; ++i) t.values()[i] = v(i);
    p.sites.push_back(std::move(t));
  }
  return p;
}

// ---------------------------------------------------------------- boundary contraction

namespace {

// Sandwich tensor with axes (top, right, left, bottom), each fused as (bra, op, ket).
DenseTensor sandwich(const DenseTensor& a, const DenseTensor& m) {
  const DenseTensor ma = contract(m, a, {{5, 4}});            // l2 r2 t2 b2 j l3 r3 t3 b3
  const DenseTensor full = contract(a.conj(), ma, {{4, 4}});  // l1 r1 t1 b1 l2 r2 t2 b2 l3 r3 t3 b3
  const DenseTensor p = permute(full, {2, 6, 10, 1, 5, 9, 0, 4, 8, 3, 7, 11});
  auto fuse = [&](std::size_t a0) { return p.dim(a0) * p.dim(a0 + 1) * p.dim(a0 + 2); };
  return reshape(p, {fuse(0), fuse(3), fuse(6), fuse(9)});
}

}  // namespace

BoundaryResult boundary_contract_expectation(const Peps& psi, const Pepo& m, std::size_t d_cut) {
  validate_peps(psi);
  validate_pepo(m);
  if (psi.rows != m.rows || psi.cols != m.cols) throw DimensionError("PEPS and PEPO grids differ");
  if (psi.phys_dim() != m.phys_dim()) throw DimensionError("PEPS and PEPO physical extents differ");
  if (d_cut == 0) throw ArgumentError("d_cut must be positive");
  const std::size_t rows = psi.rows, cols = psi.cols;
  BoundaryResult res;

  auto column = [&](std::size_t c) {
    std::vector<DenseTensor> col;
    for (std::size_t r = 0; r < rows; ++r) col.push_back(sandwich(psi.at(r, c), m.at(r, c)));
    return col;
  };

  // first column: (top, right, left=1, bottom) -> chain site (top, right, bottom)
  Chain boundary;
  for (DenseTensor& t : column(0)) boundary.push_back(reshape(t, {t.dim(0), t.dim(1), t.dim(3)}));
  for (std::size_t c = 1; c < cols; ++c) {
    OpChain o;
    for (DenseTensor& t : column(c)) o.push_back(std::move(t));  // (top, out=right, in=left, bottom)
    std::size_t exact = 0;
    for (std::size_t r = 0; r + 1 < rows; ++r)
      exact = std::max(exact, boundary[r].dim(2) * o[r].dim(3));
    if (exact <= d_cut) {
      boundary = apply_op_chain(o, boundary);
      res.truncation.push_back(0.0);
      res.converged.push_back(true);
    } else {
      FitOptions fo;
      fo.tol = 1e-14;
      fo.max_sweeps = 30;
      Chain guess = zipup_chain(&o, boundary, d_cut);
      FitResult fr = variational_fit(&o, boundary, std::move(guess), fo);
      boundary = std::move(fr.chain);
      res.truncation.push_back(fr.distance);
      res.converged.push_back(fr.converged);
    }
    for (std::size_t b : chain_bonds(boundary)) res.max_boundary_bond = std::max(res.max_boundary_bond, b);
  }
  // physical extents of the last column are the right boundary bonds, all 1
  RowMatrix acc = RowMatrix::Identity(1, 1);
  for (const DenseTensor& s : boundary) {
    if (s.dim(1) != 1) throw DimensionError("boundary contraction left an open right bond");
    acc = acc * s.as_matrix_rc(s.dim(0), s.dim(2));
  }
  res.value = acc(0, 0);
  return res;
}

TermwiseResult peps_expectation_termwise(const Peps& psi, const std::vector<PepsTerm>& terms, std::size_t d_cut) {
  validate_peps(psi);
  const std::size_t d = psi.phys_dim(), n = psi.rows * psi.cols;
  TermwiseResult res;
  for (const PepsTerm& term : terms) {
    std::vector<RowMatrix> ops(n, RowMatrix::Identity(d, d));
    for (const auto& [site, op] : term.ops) {
      if (site >= n) throw ArgumentError("term site outside the grid");
      if (op.rows() != static_cast<Eigen::Index>(d) || op.cols() != static_cast<Eigen::Index>(d))
        throw DimensionError("term operator is not d x d");
      ops[site] = op * ops[site];
    }
    const BoundaryResult b = boundary_contract_expectation(psi, product_pepo(psi.rows, psi.cols, ops), d_cut);
    res.value += term.coef * b.value;
    ++res.contractions;
    res.column_steps += psi.cols;
    for (double e : b.truncation) res.max_truncation = std::max(res.max_truncation, e);
  }
  return res;
}

std::vector<PepsTerm> nearest_neighbor_terms(const RowMatrix& x, std::size_t side) {
  std::vector<PepsTerm> out;
  for (std::size_t r = 0; r < side; ++r)
    for (std::size_t c = 0; c < side; ++c) {
      const std::size_t i = r * side + c;
      if (c + 1 < side) out.push_back({1.0, {{i, x}, {i + 1, x}}});
      if (r + 1 < side) out.push_back({1.0, {{i, x}, {i + side, x}}});
    }
  return out;
}

std::vector<PepsTerm> long_range_terms(const Eigen::MatrixXd& c, const RowMatrix& x, const RowMatrix& y,
                                       std::size_t side) {
  check_long_range(c, x, y, side);
  std::vector<PepsTerm> out;
  const std::size_t n = side * side;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (c(i, j) != 0.0) out.push_back({c(i, j), {{i, x}, {j, y}}});
  return out;
}

}  // namespace tnops
