#pragma once

#include <map>
#include <string>
#include <vector>

#include "tnops/chain.hpp"
#include "tnops/tensor.hpp"

namespace tnops {

// Site tensors have axes (left, out j, in i, right); op(j, i) = <j|op|i>.
struct Mpo {
  OpChain sites;

  std::size_t size() const { return sites.size(); }
  std::size_t phys_dim(std::size_t k = 0) const { return sites.at(k).dim(1); }
  std::vector<std::size_t> bonds() const;  // N-1 interior bonds
  std::size_t max_bond() const;
};

void validate_mpo(const Mpo& m);

using Label = std::string;

struct Rule {
  Label left;
  Label right;
  RowMatrix op;
  cplx weight = 1.0;
};

struct RuleTable {
  std::vector<Label> alphabet;
  std::vector<Rule> rules;
  Label left_boundary;
  Label right_boundary;
  // site -> rules used instead of `rules` on that site
  std::map<std::size_t, std::vector<Rule>> overrides;
  // bond b (between site b and b+1) -> alphabet replacing `alphabet` there
  std::map<std::size_t, std::vector<Label>> bond_alphabets;
};

Mpo from_rules(const RuleTable& rt, std::size_t n, std::size_t d);

DenseTensor to_dense(const Mpo& m);  // (d^N, d^N), guarded at d^N <= 4096
RowMatrix to_dense_matrix(const Mpo& m);

Mpo identity_mpo(std::size_t n, std::size_t d);
Mpo product_mpo(const std::vector<RowMatrix>& ops);
Mpo random_mpo(std::size_t n, std::size_t d, std::size_t bond, std::uint64_t seed);

Mpo add(const Mpo& a, const Mpo& b);
Mpo multiply(const Mpo& a, const Mpo& b);  // a * b as operators
Mpo scale(Mpo m, cplx c);
Mpo adjoint(const Mpo& m);
cplx trace(const Mpo& m);
cplx hs_inner(const Mpo& a, const Mpo& b);  // tr(a^dag b)
double hs_norm(const Mpo& m);

// (l, j, i, r) <-> (l, j*d+i, r)
Chain vectorize(const Mpo& m);
Mpo devectorize(const Chain& c, std::size_t d);

// O with O vec(B) = vec(A B)
OpChain left_multiplier(const Mpo& a);

// Operator Schmidt-rank cap at bond b: d^(2 min(b+1, N-b-1))
std::size_t representability_cap(std::size_t n, std::size_t d, std::size_t bond);

// Checks that every site tensor is upper triangular in (left, right) labels.
bool is_upper_triangular(const Mpo& m);

}  // namespace tnops
