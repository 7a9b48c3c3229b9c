#pragma once

#include <optional>

#include "tnops/chain.hpp"
#include "tnops/mpo.hpp"

namespace tnops {

// Site tensors have axes (left, phys, right); boundary bonds are 1.
struct Mps {
  Chain sites;
  std::optional<std::size_t> center;

  std::size_t size() const { return sites.size(); }
  std::size_t phys_dim(std::size_t k = 0) const { return sites.at(k).dim(1); }
  std::vector<std::size_t> bonds() const { return chain_bonds(sites); }
  std::size_t max_bond() const;
};

void validate_mps(const Mps& s);

Mps random_mps(std::size_t n, std::size_t d, std::size_t chi, std::uint64_t seed);
Mps product_state(const std::vector<std::size_t>& levels, std::size_t d);
Mps product_state(const std::vector<Vector>& locals);

Mps canonicalize(Mps s, std::size_t center);
cplx overlap(const Mps& a, const Mps& b);  // <a|b>
double norm(const Mps& s);
Mps normalized(Mps s);
cplx expectation(const Mps& a, const Mpo& m, const Mps& b);  // <a|M|b>
Mps apply_mpo(const Mpo& m, const Mps& s);

Vector to_dense_vector(const Mps& s);  // guarded at d^N <= 4096
Mps from_dense_vector(const Vector& v, std::size_t n, std::size_t d);

enum class CompressMode { Svd, Variational };

struct MpsCompressResult {
  Mps state;
  double distance = 0.0;  // ||psi - psi'|| / ||psi||
  std::size_t sweeps = 0;
  bool converged = true;
  std::vector<double> trace;  // per-sweep distance (variational)
};

MpsCompressResult compress_mps(const Mps& s, std::size_t chi, CompressMode mode, double tol = 1e-12,
                               std::size_t max_sweeps = 50, std::uint64_t seed = 0);

// Approximate M|s> at bond chi: zip-up guess refined by variational sweeps.
struct ApplyCompressResult {
  Mps state;
  double distance = 0.0;  // relative; NaN when the exact norm was skipped
  double exact_norm = 0.0;
  std::size_t sweeps = 0;
  bool converged = true;
};
ApplyCompressResult apply_and_compress(const Mpo& m, const Mps& s, std::size_t chi, double tol = 1e-10,
                                       std::size_t max_sweeps = 10, double rel_cut = 1e-12);

}  // namespace tnops
