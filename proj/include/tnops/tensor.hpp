#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <utility>
#include <vector>

#include "tnops/errors.hpp"
#include "tnops/rng.hpp"

namespace tnops {

using cplx = std::complex<double>;
using Shape = std::vector<std::size_t>;
using RowMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;

std::size_t shape_product(const Shape& s);

// Row-major dense array of complex doubles. Rank 0 holds a single scalar.
class DenseTensor {
 public:
  DenseTensor();
  explicit DenseTensor(Shape shape);
  DenseTensor(Shape shape, std::vector<cplx> data);

  static DenseTensor scalar(cplx v);
  static DenseTensor identity(std::size_t n);
  static DenseTensor random(Shape shape, Rng& rng);
  static DenseTensor from_matrix(const RowMatrix& m);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t axis) const;

  cplx* data() { return data_.data(); }
  const cplx* data() const { return data_.data(); }
  const std::vector<cplx>& values() const { return data_; }
  std::vector<cplx>& values() { return data_; }

  std::size_t offset(std::initializer_list<std::size_t> idx) const;
  cplx& at(std::initializer_list<std::size_t> idx) { return data_[offset(idx)]; }
  cplx at(std::initializer_list<std::size_t> idx) const { return data_[offset(idx)]; }

  // Matrix view fusing the first `row_axes` axes into rows.
  Eigen::Map<RowMatrix> as_matrix(std::size_t row_axes);
  Eigen::Map<const RowMatrix> as_matrix(std::size_t row_axes) const;
  Eigen::Map<RowMatrix> as_matrix_rc(std::size_t rows, std::size_t cols);
  Eigen::Map<const RowMatrix> as_matrix_rc(std::size_t rows, std::size_t cols) const;

  double norm() const;
  double max_abs() const;
  bool all_finite() const;
  DenseTensor conj() const;

  DenseTensor& operator*=(cplx s);
  DenseTensor& operator+=(const DenseTensor& o);
  DenseTensor& operator-=(const DenseTensor& o);

 private:
  Shape shape_;
  std::vector<cplx> data_;
};

DenseTensor operator+(DenseTensor a, const DenseTensor& b);
DenseTensor operator-(DenseTensor a, const DenseTensor& b);
DenseTensor operator*(cplx s, DenseTensor a);

using AxisPairs = std::vector<std::pair<std::size_t, std::size_t>>;

DenseTensor contract(const DenseTensor& a, const DenseTensor& b, const AxisPairs& pairs);
DenseTensor permute(const DenseTensor& a, const std::vector<std::size_t>& order);
DenseTensor reshape(const DenseTensor& a, Shape new_shape);

struct QrResult {
  DenseTensor Q;
  DenseTensor R;
};
// Thin QR with real nonnegative diag(R).
QrResult qr(const DenseTensor& a);
void qr_matrix(const RowMatrix& a, RowMatrix& q, RowMatrix& r);

struct SvdResult {
  DenseTensor U;
  std::vector<double> S;
  DenseTensor Vh;
  double discarded_weight = 0.0;
};
SvdResult svd_truncated(const DenseTensor& a, std::size_t max_rank, double rel_tol);

struct SvdMatrices {
  RowMatrix U;
  Eigen::VectorXd S;
  RowMatrix Vh;
  double discarded_weight = 0.0;
};
SvdMatrices svd_matrix(const RowMatrix& a, std::size_t max_rank, double rel_tol);
// All singular values, descending.
Eigen::VectorXd singular_values(const RowMatrix& a);

struct EigResult {
  std::vector<double> values;  // ascending
  DenseTensor vectors;         // columns are eigenvectors
};
EigResult eig_hermitian_dense(const DenseTensor& h);

using LinearMap = std::function<void(const cplx* in, cplx* out)>;

struct LowestEigResult {
  double value = 0.0;
  std::vector<cplx> vector;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
};

class EigenConvergenceError : public ConvergenceError {
 public:
  EigenConvergenceError(const std::string& w, LowestEigResult best)
      : ConvergenceError(w), best_(std::move(best)) {}
  const LowestEigResult& best() const { return best_; }

 private:
  LowestEigResult best_;
};

struct LanczosOptions {
  double tol = 1e-12;
  int max_iter = 200;     // outer restarts
  int krylov_dim = 40;
  std::size_t dense_threshold = 512;
  std::uint64_t seed = 0;
  const std::vector<cplx>* start = nullptr;
};

// Non-throwing variant; check `converged`.
LowestEigResult lanczos_lowest(const LinearMap& apply, std::size_t dim, const LanczosOptions& opt);

// Throws EigenConvergenceError carrying the best iterate when max_iter is exhausted.
LowestEigResult eig_lowest_iterative(const LinearMap& apply, std::size_t dim, double tol, int max_iter,
                                     std::uint64_t seed);

}  // namespace tnops
