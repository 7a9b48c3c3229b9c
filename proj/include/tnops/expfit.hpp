#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "tnops/mpo.hpp"

namespace tnops {

struct ExpTerm {
  double lambda = 0.0;
  double beta = 0.0;
};

struct ExpSum {
  std::vector<ExpTerm> terms;
  double operator()(double q) const;
};

struct ExpFitOptions {
  double cap = 1.5;  // |beta| < cap
  std::size_t max_iter = 4000;
  double grad_tol = 1e-10;
  std::function<double(double)> weight;  // defaults to uniform
};

struct ExpFitResult {
  ExpSum sum;
  double residual = 0.0;   // RMS over q = 1..qMax
  double grad_norm = 0.0;  // of the RMS objective w.r.t. (lambda, beta)
  std::size_t iterations = 0;
  bool converged = false;
};

ExpFitResult fit_exp_sum(const std::function<double(double)>& f, std::size_t q_max, std::size_t n,
                         std::uint64_t seed = 0, const ExpFitOptions& opt = {});

// Fits for 1..n_max terms; each size is seeded with the previous best so residuals never increase.
std::vector<ExpFitResult> fit_exp_sum_sequence(const std::function<double(double)>& f, std::size_t q_max,
                                               std::size_t n_max, std::uint64_t seed = 0,
                                               const ExpFitOptions& opt = {});

double exp_sum_residual(const ExpSum& es, const std::function<double(double)>& f, std::size_t q_max);

// local, when given, is added on every site.
Mpo expsum_mpo(const ExpSum& es, const RowMatrix& x, const RowMatrix& y, std::size_t n,
                const std::optional<RowMatrix>& local = std::nullopt);
// Arbitrary two-site term; bond chi*n+2 with chi its Schmidt rank.
Mpo expsum_mpo_general(const ExpSum& es, const RowMatrix& h, std::size_t n, std::size_t d);
Mpo expsum_mpo_inhomogeneous(const ExpSum& es, const RowMatrix& x, const RowMatrix& y,
                             const std::vector<double>& positions);

}  // namespace tnops
