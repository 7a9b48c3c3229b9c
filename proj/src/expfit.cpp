#include "tnops/expfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "tnops/hamiltonians.hpp"

namespace tnops {

double ExpSum::operator()(double q) const {
  double s = 0.0;
  for (const auto& t : terms) s += t.lambda * std::pow(t.beta, q);
  return s;
}

double exp_sum_residual(const ExpSum& es, const std::function<double(double)>& f, std::size_t q_max) {
  double s = 0.0;
  for (std::size_t q = 1; q <= q_max; ++q) {
    const double r = es(static_cast<double>(q)) - f(static_cast<double>(q));
    s += r * r;
  }
  return std::sqrt(s / static_cast<double>(q_max));
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Problem {
  VectorXd y;  // samples q = 1..Q
  VectorXd sw; // sqrt weights
  double cap;
  double wsum;
};

double ipow(double b, std::size_t q) { return std::pow(b, static_cast<double>(q)); }

VectorXd residual(const Problem& pr, const VectorXd& lam, const VectorXd& beta) {
  const Eigen::Index Q = pr.y.size();
  VectorXd r(Q);
  for (Eigen::Index q = 0; q < Q; ++q) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) m += lam(i) * ipow(beta(i), static_cast<std::size_t>(q + 1));
    r(q) = pr.sw(q) * (m - pr.y(q));
  }
  return r;
}

double rms(const Problem& pr, const VectorXd& r) { return std::sqrt(r.squaredNorm() / pr.wsum); }

// lambda by weighted least squares for fixed beta
VectorXd solve_lambda(const Problem& pr, const VectorXd& beta) {
  const Eigen::Index Q = pr.y.size(), n = beta.size();
  MatrixXd v(Q, n);
  for (Eigen::Index q = 0; q < Q; ++q)
    for (Eigen::Index i = 0; i < n; ++i) v(q, i) = pr.sw(q) * ipow(beta(i), static_cast<std::size_t>(q + 1));
  VectorXd rhs = pr.sw.cwiseProduct(pr.y);
  return v.completeOrthogonalDecomposition().solve(rhs);
}

MatrixXd jacobian(const Problem& pr, const VectorXd& lam, const VectorXd& beta) {
  const Eigen::Index Q = pr.y.size(), n = lam.size();
  MatrixXd j(Q, 2 * n);
  for (Eigen::Index q = 0; q < Q; ++q) {
    const std::size_t qq = static_cast<std::size_t>(q + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      j(q, i) = pr.sw(q) * ipow(beta(i), qq);
      j(q, n + i) = pr.sw(q) * lam(i) * static_cast<double>(qq) * ipow(beta(i), qq - 1);
    }
  }
  return j;
}

struct Fit {
  VectorXd lam, beta;
  double res = std::numeric_limits<double>::infinity();
  double grad = std::numeric_limits<double>::infinity();
  std::size_t iters = 0;
};

bool admissible(const Problem& pr, const VectorXd& beta) {
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    if (!std::isfinite(beta(i)) || std::abs(beta(i)) >= pr.cap) return false;
    for (Eigen::Index k = 0; k < i; ++k)
      if (beta(i) == beta(k)) return false;
  }
  return true;
}

double grad_norm(const Problem& pr, const VectorXd& lam, const VectorXd& beta) {
  const VectorXd r = residual(pr, lam, beta);
  return (jacobian(pr, lam, beta).transpose() * r).norm() / pr.wsum;
}

// Levenberg-Marquardt on (lambda, beta); only improving steps are taken.
Fit refine(const Problem& pr, VectorXd lam, VectorXd beta, std::size_t max_iter, double gtol) {
  const Eigen::Index n = lam.size();
  VectorXd r = residual(pr, lam, beta);
  double f = r.squaredNorm();
  double mu = 1e-3;
  std::size_t it = 0;
  std::size_t stall = 0;
  for (; it < max_iter; ++it) {
    const MatrixXd j = jacobian(pr, lam, beta);
    const VectorXd g = j.transpose() * r;
    if (g.norm() / pr.wsum < gtol) break;
    VectorXd dg = j.colwise().norm().transpose();
    for (Eigen::Index k = 0; k < dg.size(); ++k) dg(k) = std::max(dg(k), 1e-300);
    bool accepted = false;
    for (int tries = 0; tries < 40 && !accepted; ++tries) {
      MatrixXd a(j.rows() + 2 * n, 2 * n);
      a.topRows(j.rows()) = j;
      a.bottomRows(2 * n) = (std::sqrt(mu) * dg).asDiagonal();
      VectorXd b = VectorXd::Zero(j.rows() + 2 * n);
      b.head(j.rows()) = -r;
      const VectorXd step = a.colPivHouseholderQr().solve(b);
      VectorXd nl = lam + step.head(n), nb = beta + step.tail(n);
      if (admissible(pr, nb)) {
        VectorXd nr = residual(pr, nl, nb);
        double nf = nr.squaredNorm();
        // re-solving lambda exactly can only help
        VectorXd ll = solve_lambda(pr, nb);
        VectorXd lr = residual(pr, ll, nb);
        if (lr.allFinite() && lr.squaredNorm() < nf) {
          nl = ll;
          nr = lr;
          nf = lr.squaredNorm();
        }
        if (std::isfinite(nf) && nf < f) {
          stall = (f - nf) < 1e-15 * f ? stall + 1 : 0;
          lam = nl;
          beta = nb;
          r = nr;
          f = nf;
          mu = std::max(mu / 3.0, 1e-15);
          accepted = true;
          break;
        }
      }
      mu *= 4.0;
    }
    if (!accepted || stall > 20) break;
  }
  Fit out;
  out.lam = lam;
  out.beta = beta;
  out.res = rms(pr, r);
  out.grad = grad_norm(pr, lam, beta);
  out.iters = it;
  return out;
}

// Matrix-pencil poles from the sampled sequence.
VectorXd pencil_poles(const Problem& pr, std::size_t n) {
  const Eigen::Index Q = pr.y.size();
  const Eigen::Index L = std::max<Eigen::Index>(static_cast<Eigen::Index>(n), Q / 2);
  const Eigen::Index rows = Q - L;
  MatrixXd h(rows, L + 1);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c <= L; ++c) h(r, c) = pr.y(r + c);
  Eigen::JacobiSVD<MatrixXd> svd(h, Eigen::ComputeThinV);
  const Eigen::Index m = std::min<Eigen::Index>(static_cast<Eigen::Index>(n), svd.matrixV().cols());
  MatrixXd v = svd.matrixV().leftCols(m);
  MatrixXd v1 = v.topRows(L), v2 = v.bottomRows(L);
  MatrixXd pm = v1.completeOrthogonalDecomposition().pseudoInverse() * v2;
  Eigen::EigenSolver<MatrixXd> es(pm.transpose());
  VectorXd z(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    double zi = i < m ? es.eigenvalues()(i).real() : 0.5;
    zi = std::clamp(zi, -0.98 * pr.cap, 0.98 * pr.cap);
    z(i) = zi;
  }
  // keep poles distinct
  for (Eigen::Index i = 0; i < z.size(); ++i)
    for (Eigen::Index k = 0; k < i; ++k)
      if (std::abs(z(i) - z(k)) < 1e-6) z(i) = std::clamp(z(i) * 0.97 + 0.01 * static_cast<double>(i), -0.98 * pr.cap, 0.98 * pr.cap);
  return z;
}

Fit from_poles(const Problem& pr, const VectorXd& beta, std::size_t iters, double gtol) {
  VectorXd lam = solve_lambda(pr, beta);
  if (!lam.allFinite()) lam.setZero();
  return refine(pr, lam, beta, iters, gtol);
}

Problem make_problem(const std::function<double(double)>& f, std::size_t q_max, const ExpFitOptions& opt) {
  Problem pr;
  pr.y.resize(static_cast<Eigen::Index>(q_max));
  pr.sw.resize(static_cast<Eigen::Index>(q_max));
  pr.cap = opt.cap;
  pr.wsum = 0.0;
  for (std::size_t q = 1; q <= q_max; ++q) {
    pr.y(static_cast<Eigen::Index>(q - 1)) = f(static_cast<double>(q));
    const double w = opt.weight ? opt.weight(static_cast<double>(q)) : 1.0;
    if (!(w >= 0.0)) throw ArgumentError("fit_exp_sum: weights must be nonnegative");
    pr.sw(static_cast<Eigen::Index>(q - 1)) = std::sqrt(w);
    pr.wsum += w;
  }
  if (!pr.y.allFinite()) throw NumericError("fit_exp_sum: non-finite samples");
  return pr;
}

ExpFitResult to_result(const Fit& f, const ExpFitOptions& opt) {
  ExpFitResult r;
  std::vector<std::size_t> idx(static_cast<std::size_t>(f.beta.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return f.beta(static_cast<Eigen::Index>(a)) > f.beta(static_cast<Eigen::Index>(b)); });
  for (auto i : idx) r.sum.terms.push_back({f.lam(static_cast<Eigen::Index>(i)), f.beta(static_cast<Eigen::Index>(i))});
  r.residual = f.res;
  r.grad_norm = f.grad;
  r.iterations = f.iters;
  r.converged = f.grad < opt.grad_tol || f.res < 1e-14;
  return r;
}

}  // namespace

std::vector<ExpFitResult> fit_exp_sum_sequence(const std::function<double(double)>& f, std::size_t q_max,
                                               std::size_t n_max, std::uint64_t seed, const ExpFitOptions& opt) {
  if (n_max == 0) throw ArgumentError("fit_exp_sum: n must be at least 1");
  if (q_max < 2 * n_max) throw ArgumentError("fit_exp_sum: need qMax >= 2n");
  const Problem pr = make_problem(f, q_max, opt);
  Rng rng = Rng(seed).substream("expfit");
  std::vector<ExpFitResult> out;
  Fit prev;
  for (std::size_t n = 1; n <= n_max; ++n) {
    Fit best = from_poles(pr, pencil_poles(pr, n), opt.max_iter, opt.grad_tol);
    if (n > 1) {
      // extend the previous optimum by one term, trying several starting poles
      std::vector<double> cands = {0.05, 0.2, 0.4, 0.6, 0.8, 0.9, 0.95, 0.98, -0.5};
      for (int extra = 0; extra < 3; ++extra) cands.push_back(rng.uniform(-0.95, 0.99));
      Fit seeded;
      for (double c : cands) {
        VectorXd beta(static_cast<Eigen::Index>(n)), lam(static_cast<Eigen::Index>(n));
        beta.head(static_cast<Eigen::Index>(n - 1)) = prev.beta;
        lam.head(static_cast<Eigen::Index>(n - 1)) = prev.lam;
        beta(static_cast<Eigen::Index>(n - 1)) = c * pr.cap / 1.5;
        lam(static_cast<Eigen::Index>(n - 1)) = 0.0;
        if (!admissible(pr, beta)) continue;
        Fit t = refine(pr, lam, beta, opt.max_iter / 4, opt.grad_tol);
        if (t.res < seeded.res) seeded = t;
      }
      if (seeded.res < std::numeric_limits<double>::infinity())
        seeded = refine(pr, seeded.lam, seeded.beta, opt.max_iter, opt.grad_tol);
      if (seeded.res < best.res) best = seeded;
      if (!(best.res <= prev.res)) {
        // fall back to the previous fit with a dormant extra term
        best = prev;
        best.lam.conservativeResize(static_cast<Eigen::Index>(n));
        best.beta.conservativeResize(static_cast<Eigen::Index>(n));
        best.lam(static_cast<Eigen::Index>(n - 1)) = 0.0;
        best.beta(static_cast<Eigen::Index>(n - 1)) = 0.0;
        best.grad = grad_norm(pr, best.lam, best.beta);
      }
    }
    out.push_back(to_result(best, opt));
    prev = best;
  }
  return out;
}

ExpFitResult fit_exp_sum(const std::function<double(double)>& f, std::size_t q_max, std::size_t n,
                         std::uint64_t seed, const ExpFitOptions& opt) {
  return fit_exp_sum_sequence(f, q_max, n, seed, opt).back();
}

Mpo expsum_mpo(const ExpSum& es, const RowMatrix& x, const RowMatrix& y, std::size_t n,
                const std::optional<RowMatrix>& local) {
  if (es.terms.empty()) throw ArgumentError("expsum_mpo: empty sum");
  if (n < 2) throw ArgumentError("expsum_mpo: N must be at least 2");
  const std::size_t d = static_cast<std::size_t>(x.rows());
  RuleTable rt;
  rt.alphabet.push_back("I");
  for (std::size_t i = 0; i < es.terms.size(); ++i) rt.alphabet.push_back("e" + std::to_string(i));
  rt.alphabet.push_back("D");
  rt.left_boundary = "I";
  rt.right_boundary = "D";
  rt.rules.push_back({"I", "I", eye(d), 1.0});
  rt.rules.push_back({"D", "D", eye(d), 1.0});
  if (local) rt.rules.push_back({"I", "D", *local, 1.0});
  for (std::size_t i = 0; i < es.terms.size(); ++i) {
    const Label e = "e" + std::to_string(i);
    const auto& t = es.terms[i];
    rt.rules.push_back({"I", e, x, 1.0});
    rt.rules.push_back({e, e, eye(d), t.beta});
    rt.rules.push_back({e, "D", y, t.lambda * t.beta});
  }
  return from_rules(rt, n, d);
}

Mpo expsum_mpo_general(const ExpSum& es, const RowMatrix& h, std::size_t n, std::size_t d) {
  if (es.terms.empty()) throw ArgumentError("expsum_mpo: empty sum");
  const SchmidtTerms st = schmidt_split(h, d);
  RuleTable rt;
  rt.alphabet.push_back("I");
  for (std::size_t i = 0; i < es.terms.size(); ++i)
    for (std::size_t s = 0; s < st.x.size(); ++s) rt.alphabet.push_back("e" + std::to_string(i) + "s" + std::to_string(s));
  rt.alphabet.push_back("D");
  rt.left_boundary = "I";
  rt.right_boundary = "D";
  rt.rules.push_back({"I", "I", eye(d), 1.0});
  rt.rules.push_back({"D", "D", eye(d), 1.0});
  for (std::size_t i = 0; i < es.terms.size(); ++i)
    for (std::size_t s = 0; s < st.x.size(); ++s) {
      const Label e = "e" + std::to_string(i) + "s" + std::to_string(s);
      const auto& t = es.terms[i];
      rt.rules.push_back({"I", e, st.x[s], 1.0});
      rt.rules.push_back({e, e, eye(d), t.beta});
      rt.rules.push_back({e, "D", st.y[s], t.lambda * t.beta});
    }
  return from_rules(rt, n, d);
}

Mpo expsum_mpo_inhomogeneous(const ExpSum& es, const RowMatrix& x, const RowMatrix& y,
                             const std::vector<double>& positions) {
  const std::size_t n = positions.size();
  if (n < 2) throw ArgumentError("expsum_mpo_inhomogeneous: need at least 2 positions");
  for (std::size_t j = 0; j + 1 < n; ++j)
    if (!(positions[j + 1] > positions[j])) throw ArgumentError("positions must be strictly increasing");
  for (const auto& t : es.terms)
    if (t.beta <= 0.0) throw ArgumentError("inhomogeneous exponential sum needs positive beta");
  const std::size_t d = static_cast<std::size_t>(x.rows());
  RuleTable rt;
  rt.alphabet.push_back("I");
  for (std::size_t i = 0; i < es.terms.size(); ++i) rt.alphabet.push_back("e" + std::to_string(i));
  rt.alphabet.push_back("D");
  rt.left_boundary = "I";
  rt.right_boundary = "D";
  for (std::size_t k = 0; k < n; ++k) {
    const double gap = k == 0 ? 1.0 : positions[k] - positions[k - 1];
    std::vector<Rule> rs;
    rs.push_back({"I", "I", eye(d), 1.0});
    rs.push_back({"D", "D", eye(d), 1.0});
    for (std::size_t i = 0; i < es.terms.size(); ++i) {
      const Label e = "e" + std::to_string(i);
      const auto& t = es.terms[i];
      const double bg = std::pow(t.beta, gap);
      rs.push_back({"I", e, x, 1.0});
      rs.push_back({e, e, eye(d), bg});
      rs.push_back({e, "D", y, t.lambda * bg});
    }
    rt.overrides[k] = std::move(rs);
  }
  return from_rules(rt, n, d);
}

}  // namespace tnops
