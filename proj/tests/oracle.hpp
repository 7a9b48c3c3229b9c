#pragma once

// Brute-force dense references shared by the unit tests and the acceptance binary.

#include <Eigen/Eigenvalues>
#include <cmath>
#include <utility>
#include <vector>

#include "tnops/hamiltonians.hpp"
#include "tnops/mpo.hpp"

namespace oracle {

using tnops::cplx;
using tnops::RowMatrix;

inline RowMatrix kron(const RowMatrix& a, const RowMatrix& b) {
  RowMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

// Operators at given sites, identity elsewhere; site 0 is the most significant factor.
inline RowMatrix embed(std::size_t n, const std::vector<std::pair<std::size_t, RowMatrix>>& ops, std::size_t d = 2) {
  RowMatrix out = RowMatrix::Ones(1, 1);
  for (std::size_t k = 0; k < n; ++k) {
    RowMatrix o = RowMatrix::Identity(d, d);
    for (const auto& [s, m] : ops)
      if (s == k) o = m * o;
    out = kron(out, o);
  }
  return out;
}

inline RowMatrix zero(std::size_t n, std::size_t d = 2) {
  const auto dim = static_cast<Eigen::Index>(std::pow(double(d), double(n)) + 0.5);
  return RowMatrix::Zero(dim, dim);
}

// d^2 x d^2 two-site term on (i, j) given as its Schmidt split.
inline RowMatrix embed_pair(std::size_t n, std::size_t i, std::size_t j, const RowMatrix& h, std::size_t d = 2) {
  const tnops::SchmidtTerms st = tnops::schmidt_split(h, d, 0.0);
  RowMatrix out = zero(n, d);
  for (std::size_t s = 0; s < st.x.size(); ++s) out += embed(n, {{i, st.x[s]}, {j, st.y[s]}}, d);
  return out;
}

inline double rel(const RowMatrix& a, const RowMatrix& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

inline double rel(const tnops::Mpo& m, const RowMatrix& b) { return rel(tnops::to_dense_matrix(m), b); }

inline double lowest_eigenvalue(const RowMatrix& h) {
  const Eigen::MatrixXcd m = h;
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

// Coefficient of X_i Y_j read off a dense operator: tr((X_i Y_j)^dag H) / tr((X_i Y_j)^dag X_i Y_j).
inline cplx coefficient(const RowMatrix& h, std::size_t n, std::size_t i, std::size_t j, const RowMatrix& x,
                        const RowMatrix& y) {
  const RowMatrix p = embed(n, {{i, x}, {j, y}});
  return (p.adjoint() * h).trace() / (p.adjoint() * p).trace();
}

inline RowMatrix random_hermitian(std::size_t dim, std::uint64_t seed) {
  tnops::Rng rng(seed);
  RowMatrix a(dim, dim);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.complex_uniform();
  return (a + a.adjoint()) / 2.0;
}

inline RowMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  tnops::Rng rng(seed);
  RowMatrix a(rows, cols);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.complex_uniform();
  return a;
}

}  // namespace oracle
