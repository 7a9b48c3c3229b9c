#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tnops/mpo.hpp"
#include "tnops/mps.hpp"

namespace tnops {

enum class LocalSolver { Auto, Dense, Iterative };

struct GroundStateOptions {
  std::size_t chi = 16;
  std::size_t max_sweeps = 100;
  double energy_tol = 1e-10;  // relative change per sweep
  std::uint64_t seed = 0;
  LocalSolver solver = LocalSolver::Auto;
  std::optional<Mps> initial;
  double eig_tol = 1e-13;
};

struct GroundStateResult {
  Mps state;  // normalized, centre at 0
  double energy = 0.0;
  std::size_t sweeps = 0;
  bool converged = false;
  std::vector<double> sweep_energies;
};

GroundStateResult ground_state(const Mpo& h, const GroundStateOptions& opt);

// <psi|H|psi> / <psi|psi>
double energy(const Mps& psi, const Mpo& h);

// Dense Hermiticity check for small systems, HS-norm check otherwise.
bool is_hermitian(const Mpo& h, double tol = 1e-10);

}  // namespace tnops
