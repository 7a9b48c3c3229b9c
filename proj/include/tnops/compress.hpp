#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tnops/mpo.hpp"
#include "tnops/mps.hpp"

namespace tnops {

enum class InitMode { Random, SvdSeed };

struct CompressOptions {
  std::size_t target_d = 1;
  std::size_t max_sweeps = 50;
  double tol = 1e-12;  // on the change of the squared relative distance per sweep
  InitMode init = InitMode::Random;
  std::uint64_t seed = 0;
  bool record_trace = false;
};

struct CompressResult {
  Mpo mpo;
  double distance = 0.0;  // ||M - M'||_HS / ||M||_HS
  std::size_t sweeps = 0;
  bool converged = false;
  bool at_precision_floor = false;  // distance <= 1e-15
  std::vector<double> trace;        // distance after each local update
};

// ||a - b||_HS / ||a||_HS, evaluated from the difference chain (no dense matrices).
double mpo_distance(const Mpo& a, const Mpo& b);
// Same quantity from the three HS inner products; loses accuracy below ~1e-8.
double mpo_distance_inner(const Mpo& a, const Mpo& b);

CompressResult compress_mpo(const Mpo& m, const CompressOptions& opt);

// Compress the product a*b without forming it at full bond. Without exact_distance the
// reported distance is NaN.
CompressResult compress_product(const Mpo& a, const Mpo& b, const CompressOptions& opt, bool exact_distance = true);

struct TruncationRow {
  std::size_t target_d = 0;
  double op_error = 0.0;
  double gs_fidelity_error = 0.0;
  double energy_rel_error = 0.0;
  bool converged = true;
};

struct GroundStateOptions;  // groundstate.hpp

struct TruncationStudyOptions {
  CompressOptions compress;
  std::size_t chi = 16;
  std::size_t gs_sweeps = 100;
  double gs_tol = 1e-10;
  std::uint64_t seed = 0;
};

std::vector<TruncationRow> truncation_study(const Mpo& m, const std::vector<std::size_t>& d_list, const Mps& gs_ref,
                                            double e_ref, const TruncationStudyOptions& opt);

// Evaluates an approximate operator the same way as truncation_study.
TruncationRow evaluate_approximation(const Mpo& m, const Mpo& approx, const Mps& gs_ref, double e_ref,
                                     const TruncationStudyOptions& opt);

}  // namespace tnops
