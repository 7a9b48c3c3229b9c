#include "tnops/groundstate.hpp"

#include <cmath>
#include <limits>

namespace tnops {

bool is_hermitian(const Mpo& h, double tol) {
  validate_mpo(h);
  double total = 1.0;
  for (std::size_t k = 0; k < h.size(); ++k) total *= static_cast<double>(h.phys_dim(k));
  if (total <= 4096.0) {
    const RowMatrix m = to_dense_matrix(h);
    return (m - m.adjoint()).norm() <= tol * std::max(1.0, m.norm());
  }
  const double n = hs_norm(h);
  const double diff = chain_difference_norm(vectorize(h), vectorize(adjoint(h)));
  return diff <= tol * std::max(1.0, n);
}

double energy(const Mps& psi, const Mpo& h) {
  const cplx e = expectation(psi, h, psi);
  const double nn = std::real(overlap(psi, psi));
  if (nn <= 0.0) throw NumericError("energy: zero state");
  if (std::abs(e.imag()) > 1e-10 * std::max(1.0, std::abs(e.real())))
    throw NumericError("energy: expectation value has an imaginary part; is H Hermitian?");
  return e.real() / nn;
}

GroundStateResult ground_state(const Mpo& h, const GroundStateOptions& opt) {
  validate_mpo(h);
  if (opt.chi == 0) throw ArgumentError("ground_state: chi must be positive");
  if (!is_hermitian(h)) throw ArgumentError("ground_state: Hamiltonian is not Hermitian");
  const std::size_t n = h.size();
  Mps psi;
  if (opt.initial) {
    psi = *opt.initial;
    if (psi.size() != n) throw DimensionError("ground_state: initial state length mismatch");
  } else {
    psi = random_mps(n, h.phys_dim(), opt.chi, Rng(opt.seed).substream("solver").next_u64());
  }
  canonicalize_chain(psi.sites, 0);
  {
    const double nn = psi.sites[0].norm();
    if (nn == 0.0) throw NumericError("ground_state: zero initial state");
    psi.sites[0] *= 1.0 / nn;
  }

  std::vector<DenseTensor> L(n + 1), R(n + 1);
  L[0] = trivial_env();
  R[n] = trivial_env();
  for (std::size_t k = n - 1; k >= 1; --k) R[k] = chain_env_right(R[k + 1], psi.sites[k], &h.sites[k], psi.sites[k]);

  LanczosOptions lo;
  lo.tol = opt.eig_tol;
  lo.max_iter = 30;
  lo.krylov_dim = 30;
  lo.dense_threshold = 128;
  if (opt.solver == LocalSolver::Dense) lo.dense_threshold = std::numeric_limits<std::size_t>::max();
  if (opt.solver == LocalSolver::Iterative) lo.dense_threshold = 0;
  Rng rng = Rng(opt.seed).substream("lanczos");

  double e = std::numeric_limits<double>::infinity();
  auto solve = [&](std::size_t k) {
    DenseTensor& a = psi.sites[k];
    const Shape sh = a.shape();
    const DenseTensor* w = &h.sites[k];
    const DenseTensor& lk = L[k];
    const DenseTensor& rk = R[k + 1];
    LinearMap apply = [&](const cplx* in, cplx* out) {
      DenseTensor x(sh, std::vector<cplx>(in, in + shape_product(sh)));
      DenseTensor y = chain_local(lk, w, x, rk);
      std::copy(y.data(), y.data() + y.size(), out);
    };
    std::vector<cplx> start(a.values());
    lo.start = &start;
    lo.seed = rng.next_u64();
    LowestEigResult r = lanczos_lowest(apply, a.size(), lo);
    a = DenseTensor(sh, std::move(r.vector));
    e = r.value;
  };

  GroundStateResult res;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    if (n == 1) {
      solve(0);
    } else {
      for (std::size_t k = 0; k + 1 < n; ++k) {
        solve(k);
        gauge_shift_right(psi.sites, k);
        L[k + 1] = chain_env_left(L[k], psi.sites[k], &h.sites[k], psi.sites[k]);
      }
      for (std::size_t k = n - 1; k >= 1; --k) {
        solve(k);
        gauge_shift_left(psi.sites, k);
        R[k] = chain_env_right(R[k + 1], psi.sites[k], &h.sites[k], psi.sites[k]);
      }
    }
    res.sweep_energies.push_back(e);
    res.sweeps = sweep;
    if (std::abs(prev - e) < opt.energy_tol * std::max(1.0, std::abs(e))) {
      res.converged = true;
      break;
    }
    prev = e;
  }
  const double nn = psi.sites[0].norm();
  psi.sites[0] *= 1.0 / nn;
  psi.center = 0;
  res.state = std::move(psi);
  res.energy = energy(res.state, h);
  return res;
}

}  // namespace tnops
