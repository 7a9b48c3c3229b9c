#pragma once

#include <cstdint>
#include <vector>

#include "tnops/mpo.hpp"

namespace tnops {

// A cut k separates sites [0, k) from [k, N); 1 <= k <= N-1.
struct CutRank {
  std::size_t cut = 0;
  std::size_t rank = 0;
  std::size_t bond = 0;     // MPO bond dimension across the cut
  bool borderline = false;  // a singular value within 10x of the threshold
};

struct RankReport {
  std::vector<CutRank> cuts;
  double tol = 1e-10;
  bool optimal = false;  // rank == bond at every cut
  // rank == bond at cuts with at least two sites on each side; single-site edge cuts
  // lose the completed-interaction block when there are no local terms
  bool optimal_interior = false;
  bool dense = true;     // false when ranks came from the canonical chain
};

// Normalized operator Schmidt values across a cut (dense, d^N <= 4096).
std::vector<double> operator_schmidt_values(const Mpo& m, std::size_t cut);
// The same values from a canonicalized vectorized chain; no size limit.
std::vector<double> operator_schmidt_values_chain(const Mpo& m, std::size_t cut);

std::size_t jamiolkowski_rank(const Mpo& m, std::size_t cut, double tol = 1e-10);

// Rank of the reduced density matrix of (M x 1)|phi+>^N over the first `cut` site pairs.
// Explicit construction; only meant for small N.
std::size_t choi_state_rank(const Mpo& m, std::size_t cut, double tol = 1e-10);

RankReport certify_builder(const Mpo& m, double tol = 1e-10);

// Seeded "generic" values, uniform in [0.5, 1.5].
std::vector<double> generic_values(std::size_t count, std::uint64_t seed);
RowMatrix generic_matrix(std::size_t d, std::uint64_t seed);

}  // namespace tnops
