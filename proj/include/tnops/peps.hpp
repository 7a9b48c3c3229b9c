#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tnops/mpo.hpp"
#include "tnops/tensor.hpp"

namespace tnops {

// Grids are row-major; site (r, c) has raster index r * cols + c, row 0 on top.
// Pepo tensors: (left, right, top, bottom, out, in). Peps tensors: (left, right, top, bottom, phys).
struct Pepo {
  std::size_t rows = 0, cols = 0;
  std::vector<DenseTensor> sites;

  const DenseTensor& at(std::size_t r, std::size_t c) const { return sites.at(r * cols + c); }
  std::size_t phys_dim() const { return sites.at(0).dim(4); }
  std::size_t max_horizontal_bond() const;
  std::size_t max_vertical_bond() const;
  // extent of the bond to the right of (r, c) / below (r, c)
  std::size_t horizontal_bond(std::size_t r, std::size_t c) const { return at(r, c).dim(1); }
  std::size_t vertical_bond(std::size_t r, std::size_t c) const { return at(r, c).dim(3); }
};

struct Peps {
  std::size_t rows = 0, cols = 0;
  std::vector<DenseTensor> sites;

  const DenseTensor& at(std::size_t r, std::size_t c) const { return sites.at(r * cols + c); }
  std::size_t phys_dim() const { return sites.at(0).dim(4); }
};

void validate_pepo(const Pepo& p);
void validate_peps(const Peps& p);

struct Rule2D {
  Label left, right, top, bottom;
  RowMatrix op;
  cplx weight = 1.0;
  std::string note;
};

struct Rule2DTable {
  std::vector<Label> h_alphabet;
  std::vector<Label> v_alphabet;
  std::map<std::size_t, std::vector<Label>> h_alphabet_by_bond;  // bond between columns b and b+1
  std::map<std::size_t, std::vector<Label>> v_alphabet_by_col;
  Label left_boundary = "0", right_boundary = "0", top_boundary = "0", bottom_boundary = "0";
  std::map<std::size_t, Label> top_boundary_by_col, bottom_boundary_by_col;
  std::vector<Rule2D> rules;
  std::map<std::size_t, std::vector<Rule2D>> col_rules;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Rule2D>> site_rules;
  bool strict_labels = true;  // unknown labels are a ConfigError; otherwise the rule never matches
};

struct PepoBuild {
  Pepo pepo;
  // rules that never matched any site, as "list#index note"
  std::vector<std::string> unused_rules;
};

PepoBuild pepo_from_rules_2d(const Rule2DTable& t, std::size_t rows, std::size_t cols, std::size_t d);

Pepo identity_pepo(std::size_t rows, std::size_t cols, std::size_t d);
Pepo product_pepo(std::size_t rows, std::size_t cols, const std::vector<RowMatrix>& ops);  // one op per site

// sum over nearest-neighbour edges of X_i X_j; horizontal bonds 3, vertical 2, last column 3.
Rule2DTable nearest_neighbor_rules_2d(const RowMatrix& x, std::size_t side);
Pepo pepo_nearest_neighbor(const RowMatrix& x, std::size_t side);

enum class LongRangeMode { Linear, Sqrt };

// H = sum_{i<j} c(i, j) X_i Y_j over raster indices; c is (side^2 x side^2), upper triangle read.
Rule2DTable long_range_rules_2d(const Eigen::MatrixXd& c, const RowMatrix& x, const RowMatrix& y, std::size_t side);
// The tabulated square-root construction, expanded for L = ceil(sqrt(side - 1)).
Rule2DTable sqrt_table_rules_2d(const Eigen::MatrixXd& c, const RowMatrix& x, const RowMatrix& y, std::size_t side);
PepoBuild pepo_long_range(const Eigen::MatrixXd& c, const RowMatrix& x, const RowMatrix& y, std::size_t side,
                          LongRangeMode mode);
std::size_t sqrt_mode_L(std::size_t side);

// Dense forms, guarded at d^(rows*cols) <= 4096.
RowMatrix pepo_to_dense(const Pepo& p);
Vector peps_to_dense(const Peps& p);

Peps random_peps(std::size_t rows, std::size_t cols, std::size_t d, std::size_t chi, std::uint64_t seed);
Peps product_peps(std::size_t rows, std::size_t cols, const std::vector<Vector>& locals);

struct BoundaryResult {
  cplx value = 0.0;
  std::vector<double> truncation;  // relative compression distance per absorbed column
  std::vector<bool> converged;
  std::size_t max_boundary_bond = 0;
};

// <psi|M|psi> by absorbing columns left to right into a boundary MPS truncated to d_cut.
BoundaryResult boundary_contract_expectation(const Peps& psi, const Pepo& m, std::size_t d_cut);

struct PepsTerm {
  cplx coef = 1.0;
  std::vector<std::pair<std::size_t, RowMatrix>> ops;  // (raster site, operator)
};

struct TermwiseResult {
  cplx value = 0.0;
  std::size_t contractions = 0;    // boundary contractions performed
  std::size_t column_steps = 0;    // absorbed columns over all contractions
  double max_truncation = 0.0;
};

TermwiseResult peps_expectation_termwise(const Peps& psi, const std::vector<PepsTerm>& terms, std::size_t d_cut);

// Terms of sum_<ij> X_i X_j and of sum_{i<j} c_ij X_i Y_j.
std::vector<PepsTerm> nearest_neighbor_terms(const RowMatrix& x, std::size_t side);
std::vector<PepsTerm> long_range_terms(const Eigen::MatrixXd& c, const RowMatrix& x, const RowMatrix& y,
                                       std::size_t side);

}  // namespace tnops
