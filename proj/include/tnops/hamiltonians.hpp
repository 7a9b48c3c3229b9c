#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tnops/mpo.hpp"

namespace tnops {

RowMatrix pauli_x();
RowMatrix pauli_y();
RowMatrix pauli_z();
RowMatrix eye(std::size_t d);
RowMatrix number_op();    // |1><1|
RowMatrix lowering_op();  // |0><1|

// Two-site term split as sum_s X^s (x) Y^s; singular values below cut*sigma_1 dropped.
struct SchmidtTerms {
  std::vector<RowMatrix> x;
  std::vector<RowMatrix> y;
};
SchmidtTerms schmidt_split(const RowMatrix& h, std::size_t d, double cut = 1e-12);

RuleTable nearest_neighbor_rules(const RowMatrix& x, const RowMatrix& y);
Mpo nearest_neighbor(const RowMatrix& x, const RowMatrix& y, std::size_t n);

Mpo fixed_range(const RowMatrix& x, const RowMatrix& y, std::size_t r, std::size_t n);

// terms[q-1] = (X_q, Y_q) couples sites at distance q.
Mpo ranged_all(const std::vector<std::pair<RowMatrix, RowMatrix>>& terms, const std::optional<RowMatrix>& local,
               std::size_t n);

// h keyed by 0-based (i, j), i < j; each term is d^2 x d^2 on (site i, site j).
using PairTerms = std::map<std::pair<std::size_t, std::size_t>, RowMatrix>;
Mpo general_two_body(const PairTerms& h, std::size_t n, std::size_t d);

// H = sum_k locals[k] + sum_{i<j} c(i,j) h_(i,j). c is read on its upper triangle.
Mpo fixed_type(const RowMatrix& h, const Eigen::MatrixXd& c, const std::vector<RowMatrix>& locals, std::size_t n,
               std::size_t d);
std::size_t fixed_type_max_bond(std::size_t n, std::size_t chi);

RuleTable exp_decay_rules(const RowMatrix& x, const RowMatrix& y, double beta, std::size_t n, bool periodic);
Mpo exp_decay(const RowMatrix& x, const RowMatrix& y, double beta, std::size_t n, bool periodic);
// Arbitrary two-site term h with coupling beta^q (plus beta^(N-q) when periodic).
Mpo exp_decay_general(const RowMatrix& h, double beta, std::size_t n, std::size_t d, bool periodic);

struct PolyExpTerm {
  double b = 1.0;
  unsigned k = 0;
  double alpha = 0.5;
};
Mpo poly_exp(const RowMatrix& x, const RowMatrix& y, const std::vector<PolyExpTerm>& terms, std::size_t n);

// sum_i c[i] ops[0](i) ops[1](i+1) ... ; c has N-k+1 entries (empty -> all 1).
Mpo k_body_chain(const std::vector<RowMatrix>& ops, const std::vector<double>& c, std::size_t n);

struct IsingParams {
  double B = 1.0;
};
struct XxzParams {
  double theta = 0.35;
  double delta = 0.1;
};
struct RydbergParams {
  double omega = 1.0;
  double delta = 0.0;
  double beta0 = 1.0;
};
struct SpinGlassParams {
  std::uint64_t seed = 0;
  double B = 1.0;
};

Mpo ising(const IsingParams& p, std::size_t n);
Mpo xxz(const XxzParams& p, std::size_t n);
Mpo rydberg(const RydbergParams& p, std::size_t n, const std::vector<double>& positions = {});
Eigen::MatrixXd rydberg_couplings(const RydbergParams& p, std::size_t n, const std::vector<double>& positions = {});
Mpo spin_glass(const SpinGlassParams& p, std::size_t n);
Eigen::MatrixXd spin_glass_couplings(const SpinGlassParams& p, std::size_t n);

std::vector<double> regular_positions(std::size_t n);  // x_j = j, 1-based
std::vector<double> randomize_positions(std::size_t n, double sigma, std::uint64_t seed);

// Declarative description consumed by the job layer.
enum class HamiltonianKind {
  NearestNeighbor,
  FixedRange,
  RangedAll,
  GeneralTwoBody,
  FixedType,
  ExpDecay,
  ExpDecayPeriodic,
  PolyExp,
  KBodyChain,
  Model,
};

struct ModelSpec {
  std::string name;  // ising | xxz | rydberg | spinglass
  double B = 1.0;
  double theta = 0.35;
  double delta = 0.1;
  double omega = 1.0;
  double beta0 = 1.0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

struct HamiltonianSpec {
  HamiltonianKind kind = HamiltonianKind::Model;
  std::size_t n_sites = 2;
  std::size_t d = 2;
  std::size_t range = 1;
  double beta = 0.5;
  std::vector<double> b_coeffs;
  std::vector<double> alpha_coeffs;
  std::vector<unsigned> powers;
  std::vector<double> couplings;  // row-major upper triangle, i<j
  std::vector<double> positions;
  std::vector<RowMatrix> ops;     // X, Y[, C] or the k-body list
  std::optional<RowMatrix> local;
  ModelSpec model;
};

Mpo build_hamiltonian(const HamiltonianSpec& spec);
const char* hamiltonian_kind_name(HamiltonianKind k);
HamiltonianKind hamiltonian_kind_from_name(const std::string& s);

// Upper-triangle vector <-> symmetric-free N x N matrix (lower part zero).
Eigen::MatrixXd couplings_matrix(const std::vector<double>& upper, std::size_t n);

}  // namespace tnops
