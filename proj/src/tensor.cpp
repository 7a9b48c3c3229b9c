#include "tnops/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <lapacke.h>

namespace tnops {

namespace {

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ")";
  return os.str();
}

void require_finite(const RowMatrix& a, const char* op) {
  if (!a.allFinite()) throw NumericError(std::string(op) + ": non-finite input");
}

}  // namespace

std::size_t shape_product(const Shape& s) {
  std::size_t p = 1;
  for (auto e : s) p *= e;
  return p;
}

DenseTensor::DenseTensor() : data_(1, cplx(0.0)) {}

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)) {
  for (auto e : shape_)
    if (e == 0) throw DimensionError("tensor extents must be positive: " + shape_str(shape_));
  data_.assign(shape_product(shape_), cplx(0.0));
}

DenseTensor::DenseTensor(Shape shape, std::vector<cplx> data) : shape_(std::move(shape)), data_(std::move(data)) {
  for (auto e : shape_)
    if (e == 0) throw DimensionError("tensor extents must be positive: " + shape_str(shape_));
  if (data_.size() != shape_product(shape_))
    throw DimensionError("data length " + std::to_string(data_.size()) + " does not match shape " + shape_str(shape_));
}

DenseTensor DenseTensor::scalar(cplx v) { return DenseTensor(Shape{}, {v}); }

DenseTensor DenseTensor::identity(std::size_t n) {
  DenseTensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0;
  return t;
}

DenseTensor DenseTensor::random(Shape shape, Rng& rng) {
  DenseTensor t(std::move(shape));
  for (auto& v : t.data_) v = rng.complex_uniform();
  return t;
}

DenseTensor DenseTensor::from_matrix(const RowMatrix& m) {
  DenseTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  std::copy(m.data(), m.data() + m.size(), t.data_.begin());
  return t;
}

std::size_t DenseTensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) throw ArgumentError("axis out of range");
  return shape_[axis];
}

std::size_t DenseTensor::offset(std::initializer_list<std::size_t> idx) const {
  if (idx.size() != shape_.size()) throw ArgumentError("index rank mismatch");
  std::size_t off = 0;
  std::size_t k = 0;
  for (auto i : idx) {
    if (i >= shape_[k]) throw ArgumentError("index out of range");
    off = off * shape_[k] + i;
    ++k;
  }
  return off;
}

Eigen::Map<RowMatrix> DenseTensor::as_matrix(std::size_t row_axes) {
  std::size_t rows = 1;
  for (std::size_t i = 0; i < row_axes; ++i) rows *= shape_[i];
  return as_matrix_rc(rows, data_.size() / rows);
}

Eigen::Map<const RowMatrix> DenseTensor::as_matrix(std::size_t row_axes) const {
  std::size_t rows = 1;
  for (std::size_t i = 0; i < row_axes; ++i) rows *= shape_[i];
  return as_matrix_rc(rows, data_.size() / rows);
}

Eigen::Map<RowMatrix> DenseTensor::as_matrix_rc(std::size_t rows, std::size_t cols) {
  if (rows * cols != data_.size()) throw DimensionError("matrix view size mismatch");
  return Eigen::Map<RowMatrix>(data_.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

Eigen::Map<const RowMatrix> DenseTensor::as_matrix_rc(std::size_t rows, std::size_t cols) const {
  if (rows * cols != data_.size()) throw DimensionError("matrix view size mismatch");
  return Eigen::Map<const RowMatrix>(data_.data(), static_cast<Eigen::Index>(rows),
                                     static_cast<Eigen::Index>(cols));
}

double DenseTensor::norm() const {
  double s = 0.0;
  for (const auto& v : data_) s += std::norm(v);
  return std::sqrt(s);
}

double DenseTensor::max_abs() const {
  double m = 0.0;
  for (const auto& v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool DenseTensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

DenseTensor DenseTensor::conj() const {
  DenseTensor t = *this;
  for (auto& v : t.data_) v = std::conj(v);
  return t;
}

DenseTensor& DenseTensor::operator*=(cplx s) {
  for (auto& v : data_) v *= s;
  return *this;
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& o) {
  if (o.shape_ != shape_) throw DimensionError("shape mismatch in +: " + shape_str(shape_) + " vs " + shape_str(o.shape_));
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& o) {
  if (o.shape_ != shape_) throw DimensionError("shape mismatch in -: " + shape_str(shape_) + " vs " + shape_str(o.shape_));
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }
DenseTensor operator*(cplx s, DenseTensor a) { return a *= s; }

DenseTensor permute(const DenseTensor& a, const std::vector<std::size_t>& order) {
  const std::size_t r = a.rank();
  if (order.size() != r) throw ArgumentError("permutation length does not match rank");
  std::vector<bool> seen(r, false);
  for (auto o : order) {
    if (o >= r || seen[o]) throw ArgumentError("invalid permutation");
    seen[o] = true;
  }
  bool ident = true;
  for (std::size_t i = 0; i < r; ++i) ident = ident && order[i] == i;
  if (ident) return a;

  const Shape& is = a.shape();
  std::vector<std::size_t> in_stride(r, 1);
  for (std::size_t k = r; k-- > 1;) in_stride[k - 1] = in_stride[k] * is[k];

  // Drop unit axes; they do not affect the memory walk.
  Shape os(r);
  for (std::size_t k = 0; k < r; ++k) os[k] = is[order[k]];
  std::vector<std::size_t> ext, st;
  for (std::size_t k = 0; k < r; ++k)
    if (os[k] != 1) {
      ext.push_back(os[k]);
      st.push_back(in_stride[order[k]]);
    }

  DenseTensor out(os);
  const cplx* src = a.data();
  cplx* dst = out.data();
  const std::size_t total = out.size();
  if (ext.empty()) {
    dst[0] = src[0];
    return out;
  }
  const std::size_t m = ext.size();
  const std::size_t inner_n = ext[m - 1];
  const std::size_t inner_s = st[m - 1];
  std::vector<std::size_t> cnt(m, 0);
  std::size_t off = 0;
  for (std::size_t done = 0; done < total; done += inner_n) {
    const cplx* p = src + off;
    for (std::size_t i = 0; i < inner_n; ++i) dst[done + i] = p[i * inner_s];
    for (std::size_t k = m - 1; k-- > 0;) {
      ++cnt[k];
      off += st[k];
      if (cnt[k] < ext[k]) break;
      off -= st[k] * ext[k];
      cnt[k] = 0;
    }
  }
  return out;
}

DenseTensor reshape(const DenseTensor& a, Shape new_shape) {
  if (shape_product(new_shape) != a.size())
    throw DimensionError("reshape size mismatch: " + shape_str(a.shape()) + " -> " + shape_str(new_shape));
  return DenseTensor(std::move(new_shape), a.values());
}

DenseTensor contract(const DenseTensor& a, const DenseTensor& b, const AxisPairs& pairs) {
  const std::size_t ra = a.rank(), rb = b.rank();
  std::vector<bool> ua(ra, false), ub(rb, false);
  for (auto [x, y] : pairs) {
    if (x >= ra || y >= rb) throw ArgumentError("contract: axis out of range");
    if (ua[x] || ub[y]) throw ArgumentError("contract: axis appears twice");
    ua[x] = ub[y] = true;
    if (a.dim(x) != b.dim(y))
      throw DimensionError("contract: extent mismatch " + std::to_string(a.dim(x)) + " vs " + std::to_string(b.dim(y)));
  }
  std::vector<std::size_t> pa, pb;
  Shape out_shape;
  std::size_t m = 1, k = 1, n = 1;
  for (std::size_t i = 0; i < ra; ++i)
    if (!ua[i]) {
      pa.push_back(i);
      out_shape.push_back(a.dim(i));
      m *= a.dim(i);
    }
  for (auto [x, y] : pairs) {
    pa.push_back(x);
    pb.push_back(y);
    k *= a.dim(x);
  }
  for (std::size_t j = 0; j < rb; ++j)
    if (!ub[j]) {
      pb.push_back(j);
      out_shape.push_back(b.dim(j));
      n *= b.dim(j);
    }
  const DenseTensor ap = permute(a, pa);
  const DenseTensor bp = permute(b, pb);
  DenseTensor out(out_shape);
  out.as_matrix_rc(m, n).noalias() = ap.as_matrix_rc(m, k) * bp.as_matrix_rc(k, n);
  return out;
}

void qr_matrix(const RowMatrix& a, RowMatrix& q, RowMatrix& r) {
  require_finite(a, "qr");
  const Eigen::Index rows = a.rows(), cols = a.cols();
  const Eigen::Index kk = std::min(rows, cols);
  Eigen::HouseholderQR<Eigen::MatrixXcd> h(a);
  Eigen::MatrixXcd qf = h.householderQ() * Eigen::MatrixXcd::Identity(rows, kk);
  Eigen::MatrixXcd rf = h.matrixQR().topRows(kk).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < kk; ++j) {
    const cplx d = rf(j, j);
    const double ad = std::abs(d);
    if (ad > 0.0) {
      const cplx ph = d / ad;
      rf.row(j) *= std::conj(ph);
      qf.col(j) *= ph;
    }
  }
  q = qf;
  r = rf;
}

QrResult qr(const DenseTensor& a) {
  if (a.rank() != 2) throw ArgumentError("qr expects a rank-2 tensor");
  RowMatrix q, r;
  qr_matrix(a.as_matrix(1), q, r);
  return {DenseTensor::from_matrix(q), DenseTensor::from_matrix(r)};
}

namespace {

// Thin SVD through LAPACK; gesdd first, gesvd if it fails to converge.
void lapack_svd(const RowMatrix& a, Eigen::MatrixXcd* U, Eigen::VectorXd& S, Eigen::MatrixXcd* Vh) {
  Eigen::MatrixXcd m = a;  // column major copy, overwritten
  const lapack_int rows = static_cast<lapack_int>(m.rows()), cols = static_cast<lapack_int>(m.cols());
  const lapack_int k = std::min(rows, cols);
  S.resize(k);
  if (k == 0) {
    if (U) U->resize(rows, 0);
    if (Vh) Vh->resize(0, cols);
    return;
  }
  const bool vec = U != nullptr;
  Eigen::MatrixXcd u(vec ? rows : 1, vec ? k : 1), vh(vec ? k : 1, vec ? cols : 1);
  auto* pm = reinterpret_cast<lapack_complex_double*>(m.data());
  auto* pu = reinterpret_cast<lapack_complex_double*>(u.data());
  auto* pv = reinterpret_cast<lapack_complex_double*>(vh.data());
  const char job = vec ? 'S' : 'N';
  Eigen::MatrixXcd backup = vec ? m : Eigen::MatrixXcd();
  lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, job, rows, cols, pm, rows, S.data(), pu,
                                   vec ? rows : 1, pv, vec ? k : 1);
  if (info > 0) {
    m = vec ? backup : Eigen::MatrixXcd(a);
    pm = reinterpret_cast<lapack_complex_double*>(m.data());
    std::vector<double> superb(static_cast<std::size_t>(k));
    info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, job, job, rows, cols, pm, rows, S.data(), pu, vec ? rows : 1, pv,
                          vec ? k : 1, superb.data());
  }
  if (info != 0) throw NumericError("svd: LAPACK did not converge (info " + std::to_string(info) + ")");
  if (vec) {
    *U = std::move(u);
    *Vh = std::move(vh);
  }
}

}  // namespace

Eigen::VectorXd singular_values(const RowMatrix& a) {
  require_finite(a, "svd");
  Eigen::VectorXd S;
  lapack_svd(a, nullptr, S, nullptr);
  return S;
}

SvdMatrices svd_matrix(const RowMatrix& a, std::size_t max_rank, double rel_tol) {
  require_finite(a, "svd");
  if (max_rank == 0) throw ArgumentError("svd: max_rank must be positive");
  const Eigen::Index kk = std::min(a.rows(), a.cols());
  Eigen::MatrixXcd U, Vh;
  Eigen::VectorXd S;
  lapack_svd(a, &U, S, &Vh);
  Eigen::Index keep = max_rank < static_cast<std::size_t>(kk) ? static_cast<Eigen::Index>(max_rank) : kk;
  const double s0 = kk > 0 ? S(0) : 0.0;
  if (rel_tol > 0.0) {
    Eigen::Index k = 0;
    while (k < keep && S(k) >= rel_tol * s0 && S(k) > 0.0) ++k;
    keep = std::max<Eigen::Index>(k, 1);
  }
  SvdMatrices out;
  out.discarded_weight = 0.0;
  for (Eigen::Index i = keep; i < kk; ++i) out.discarded_weight += S(i) * S(i);
  out.U = U.leftCols(keep);
  out.S = S.head(keep);
  out.Vh = Vh.topRows(keep);
  return out;
}

SvdResult svd_truncated(const DenseTensor& a, std::size_t max_rank, double rel_tol) {
  if (a.rank() != 2) throw ArgumentError("svd expects a rank-2 tensor");
  if (rel_tol < 0.0) throw ArgumentError("svd: rel_tol must be nonnegative");
  SvdMatrices m = svd_matrix(a.as_matrix(1), max_rank, rel_tol);
  SvdResult r;
  r.U = DenseTensor::from_matrix(m.U);
  r.Vh = DenseTensor::from_matrix(m.Vh);
  r.S.assign(m.S.data(), m.S.data() + m.S.size());
  r.discarded_weight = m.discarded_weight;
  return r;
}

EigResult eig_hermitian_dense(const DenseTensor& h) {
  if (h.rank() != 2 || h.dim(0) != h.dim(1)) throw ArgumentError("eig expects a square rank-2 tensor");
  auto m = h.as_matrix(1);
  require_finite(m, "eig");
  const double scale = std::max(1.0, m.norm());
  if ((m - m.adjoint()).norm() > 1e-10 * scale) throw ArgumentError("eig: matrix is not Hermitian");
  Eigen::MatrixXcd herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
  if (es.info() != Eigen::Success) throw NumericError("eig: eigensolver failed");
  EigResult r;
  r.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  r.vectors = DenseTensor::from_matrix(es.eigenvectors());
  return r;
}

namespace {

LowestEigResult dense_lowest(const LinearMap& apply, std::size_t dim) {
  Eigen::MatrixXcd H(dim, dim);
  std::vector<cplx> e(dim, 0.0), col(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    e[j] = 1.0;
    apply(e.data(), col.data());
    e[j] = 0.0;
    for (std::size_t i = 0; i < dim; ++i) H(i, j) = col[i];
  }
  const double scale = std::max(1.0, H.norm());
  if ((H - H.adjoint()).norm() > 1e-8 * scale) throw ArgumentError("linear map is not Hermitian");
  Eigen::MatrixXcd herm = 0.5 * (H + H.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
  LowestEigResult r;
  r.value = es.eigenvalues()(0);
  r.vector.assign(es.eigenvectors().col(0).data(), es.eigenvectors().col(0).data() + dim);
  r.iterations = 1;
  r.converged = true;
  Vector v = es.eigenvectors().col(0);
  r.residual = (H * v - r.value * v).norm();
  return r;
}

}  // namespace

LowestEigResult lanczos_lowest(const LinearMap& apply, std::size_t dim, const LanczosOptions& opt) {
  if (dim == 0) throw ArgumentError("lanczos: zero dimension");
  if (dim <= opt.dense_threshold) return dense_lowest(apply, dim);

  using Eigen::Index;
  const Index n = static_cast<Index>(dim);
  Vector x(n);
  if (opt.start && opt.start->size() == dim) {
    for (Index i = 0; i < n; ++i) x(i) = (*opt.start)[i];
  } else {
    Rng rng(opt.seed);
    for (Index i = 0; i < n; ++i) x(i) = rng.complex_uniform();
  }
  if (x.norm() == 0.0) x.setConstant(1.0);
  x.normalize();

  const Index m = std::min<Index>(opt.krylov_dim, n);
  Eigen::MatrixXcd V(n, m);
  Vector w(n);
  LowestEigResult best;
  best.value = std::numeric_limits<double>::infinity();
  double prev = std::numeric_limits<double>::infinity();

  for (int it = 1; it <= opt.max_iter; ++it) {
    std::vector<double> alpha, beta;
    V.col(0) = x;
    Index used = 0;
    for (Index j = 0; j < m; ++j) {
      apply(V.col(j).data(), w.data());
      const double a = std::real(V.col(j).dot(w));
      alpha.push_back(a);
      used = j + 1;
      // full reorthogonalization, two passes
      for (int pass = 0; pass < 2; ++pass) {
        Vector c = V.leftCols(j + 1).adjoint() * w;
        w.noalias() -= V.leftCols(j + 1) * c;
      }
      const double b = w.norm();
      if (j + 1 == m) break;
      if (b < 1e-14 * std::max(1.0, std::abs(a))) break;
      beta.push_back(b);
      V.col(j + 1) = w / b;
    }
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(used, used);
    for (Index i = 0; i < used; ++i) T(i, i) = alpha[i];
    for (Index i = 0; i + 1 < used; ++i) T(i, i + 1) = T(i + 1, i) = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const double lam = es.eigenvalues()(0);
    Eigen::VectorXcd y = es.eigenvectors().col(0).cast<cplx>();
    x = V.leftCols(used) * y;
    x.normalize();
    apply(x.data(), w.data());
    const double rq = std::real(x.dot(w));
    const double res = (w - rq * x).norm();
    if (rq < best.value) {
      best.value = rq;
      best.vector.assign(x.data(), x.data() + n);
      best.residual = res;
    }
    best.iterations = it;
    const double thr = std::max(100.0 * opt.tol * std::abs(rq), opt.tol);
    if (std::abs(rq - prev) < opt.tol * std::max(1.0, std::abs(rq)) && res < thr) {
      best.converged = true;
      break;
    }
    if (res < 1e-14 * std::max(1.0, std::abs(rq))) {
      best.converged = true;
      break;
    }
    (void)lam;
    prev = rq;
  }
  return best;
}

LowestEigResult eig_lowest_iterative(const LinearMap& apply, std::size_t dim, double tol, int max_iter,
                                     std::uint64_t seed) {
  LanczosOptions o;
  o.tol = tol;
  o.max_iter = max_iter;
  o.seed = seed;
  LowestEigResult r = lanczos_lowest(apply, dim, o);
  if (!r.converged) throw EigenConvergenceError("lanczos: iteration limit reached", r);
  return r;
}

}  // namespace tnops
