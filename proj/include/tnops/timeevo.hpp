#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tnops/compress.hpp"
#include "tnops/hamiltonians.hpp"
#include "tnops/mpo.hpp"
#include "tnops/mps.hpp"

namespace tnops {

struct TaylorPlan {
  unsigned order = 7;      // m
  unsigned doublings = 5;  // n
  double dt = 0.1;         // full step; base step is dt / 2^n
  std::size_t operator_d = 30;
  CompressOptions compress;  // target_d is overwritten by operator_d

  double base_step() const;
};

struct OperatorBuild {
  Mpo op;
  std::vector<double> distances;  // one per compression; NaN when not measured
  bool converged = true;
};

// exp(-i H tau) to order m by Horner's rule, compressing after each product.
OperatorBuild taylor_mpo(const Mpo& h, double tau, unsigned m, std::size_t operator_d, const CompressOptions& opt);
// U^(2^n) by repeated squaring.
OperatorBuild double_time(const Mpo& u, unsigned n, std::size_t operator_d, const CompressOptions& opt);
// taylor_mpo at the base step followed by double_time.
OperatorBuild plan_operator(const Mpo& h, const TaylorPlan& plan);

// Nearest-neighbour Hamiltonian as one d^2 x d^2 term per bond (fields already split onto bonds).
struct BondModel {
  std::size_t n = 0;
  std::size_t d = 2;
  std::vector<RowMatrix> bonds;
};

BondModel bond_model(const HamiltonianSpec& spec);  // UnsupportedError unless range 1
BondModel bond_model_ising(const IsingParams& p, std::size_t n);
BondModel bond_model_xxz(const XxzParams& p, std::size_t n);

OperatorBuild trotter_step_mpo(const BondModel& m, double dt, unsigned order, std::size_t operator_d = 64,
                               const CompressOptions& opt = {});

RowMatrix expm_hermitian(const RowMatrix& h, cplx factor);  // exp(factor * h), h Hermitian

struct Observables {
  const Mpo* hamiltonian = nullptr;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  RowMatrix site_op;           // defaults to n = |1><1|
  std::size_t every = 1;       // correlations recorded every `every` steps (and at the end)
  double alarm = 1e-6;         // flag steps whose compression distance exceeds this
  bool measure_distance = false;
};

struct EvolutionRecord {
  std::vector<double> times;
  std::vector<double> norms;
  std::vector<double> energies;
  std::vector<std::vector<double>> correlations;  // [time][pair]; NaN where not recorded
  std::vector<std::size_t> bonds;
  std::vector<double> distances;
  std::vector<bool> flagged;
  Mps final_state;
};

EvolutionRecord evolve(const Mps& psi0, const Mpo& u, double dt, std::size_t steps, std::size_t chi,
                       const Observables& obs);

// c_ij = <n_i n_j> - <n_i><n_j> on a normalized state.
double connected_correlation(const Mps& psi, const RowMatrix& op, std::size_t i, std::size_t j);

struct PowerProbe {
  unsigned power = 1;
  std::size_t d_exact = 0;
  std::vector<std::pair<std::size_t, double>> trace;  // (D_cut, distance)
};

// D_exact for H^1..H^n, each power built from the compressed previous one.
std::vector<PowerProbe> probe_power_bond_dim(const Mpo& h, unsigned n, std::size_t d_start = 1, double tol = 1e-10);

}  // namespace tnops
