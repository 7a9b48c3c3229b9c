#pragma once

// Shared sweep engine for chains of rank-3 tensors (left, phys, right).
// States are chains directly; operators are chains after fusing (out, in).

#include <cstddef>
#include <optional>
#include <vector>

#include "tnops/tensor.hpp"

namespace tnops {

using Chain = std::vector<DenseTensor>;    // rank-3 sites
using OpChain = std::vector<DenseTensor>;  // rank-4 sites (left, out, in, right)

void validate_chain(const Chain& c);
void validate_op_chain(const OpChain& o);
std::vector<std::size_t> chain_bonds(const Chain& c);  // interior bonds, size N-1

// Left of `center` becomes left-orthonormal, right of it right-orthonormal.
void canonicalize_chain(Chain& c, std::size_t center);
void right_canonicalize(Chain& c);  // center 0
void left_canonicalize(Chain& c);   // center N-1

cplx chain_inner(const Chain& a, const Chain& b);  // <a|b>
double chain_norm(const Chain& c);                  // via QR sweep
cplx chain_expectation(const Chain& a, const OpChain& o, const Chain& b);

Chain chain_scaled(Chain c, cplx s);
Chain chain_sum(const Chain& a, const Chain& b, cplx alpha = 1.0, cplx beta = 1.0);
double chain_difference_norm(const Chain& a, const Chain& b);  // ||a - b|| without cancellation
Chain apply_op_chain(const OpChain& o, const Chain& c);       // exact, bonds multiply

// Right-canonicalize then truncate left-to-right. Returns summed discarded weight.
Chain svd_compress_chain(Chain c, std::size_t max_bond, double rel_tol, double* discarded = nullptr);

// Initial guess for O|T> at bond <= max_bond via a single zip-up pass.
Chain zipup_chain(const OpChain* o, const Chain& t, std::size_t max_bond);

double op_chain_norm2(const OpChain& o, const Chain& t);  // ||O|T>||^2

struct FitOptions {
  std::size_t max_sweeps = 50;
  double tol = 1e-12;                        // on squared relative distance change per sweep
  std::optional<double> target_norm2;        // ||O T||^2 if known
  bool compute_target_norm = true;           // exact norm when not supplied
  bool record_trace = false;
};

struct FitResult {
  Chain chain;
  double distance = 0.0;  // relative ||OT - G|| / ||OT||; NaN if target norm unknown
  double overlap_norm2 = 0.0;  // ||C||^2 at the final update
  double target_norm2 = 0.0;
  std::size_t sweeps = 0;
  bool converged = false;
  std::vector<double> trace;  // relative distance after every local update
};

// Environment building blocks. Environments have axes (bra, op, ket); o may be null.
DenseTensor chain_env_left(const DenseTensor& l, const DenseTensor& bra, const DenseTensor* o, const DenseTensor& ket);
DenseTensor chain_env_right(const DenseTensor& r, const DenseTensor& bra, const DenseTensor* o, const DenseTensor& ket);
// (bra_l, p, bra_r) tensor obtained by contracting l, o, ket and r.
DenseTensor chain_local(const DenseTensor& l, const DenseTensor* o, const DenseTensor& ket, const DenseTensor& r);
DenseTensor trivial_env();
// Move the orthogonality centre from k to k+1 (or k-1) by QR.
void gauge_shift_right(Chain& c, std::size_t k);
void gauge_shift_left(Chain& c, std::size_t k);

// Single-site variational fit of G to O|T> (O may be null). The centre tensor
// is set to the environment tensor C at each step.
FitResult variational_fit(const OpChain* o, const Chain& t, Chain guess, const FitOptions& opt);

}  // namespace tnops
