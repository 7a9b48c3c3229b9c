#include "tnops/compress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tnops/groundstate.hpp"

namespace tnops {

double mpo_distance(const Mpo& a, const Mpo& b) {
  validate_mpo(a);
  validate_mpo(b);
  if (a.size() != b.size()) throw DimensionError("mpo_distance: length mismatch");
  const double na = hs_norm(a);
  if (na == 0.0) throw NumericError("mpo_distance: reference operator has zero norm");
  return chain_difference_norm(vectorize(a), vectorize(b)) / na;
}

double mpo_distance_inner(const Mpo& a, const Mpo& b) {
  const double aa = std::real(hs_inner(a, a));
  if (aa == 0.0) throw NumericError("mpo_distance: reference operator has zero norm");
  const double bb = std::real(hs_inner(b, b));
  const double ab = std::real(hs_inner(a, b));
  return std::sqrt(std::max(0.0, aa + bb - 2.0 * ab) / aa);
}

namespace {

Chain random_guess(std::size_t n, std::size_t p, std::size_t bond, std::uint64_t seed) {
  Rng rng = Rng(seed).substream("compressor");
  Chain g;
  std::size_t l = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t r = 1;
    if (k + 1 < n) {
      double cap = static_cast<double>(bond);
      cap = std::min(cap, std::pow(static_cast<double>(p), static_cast<double>(k + 1)));
      cap = std::min(cap, std::pow(static_cast<double>(p), static_cast<double>(n - k - 1)));
      r = static_cast<std::size_t>(cap);
    }
    g.push_back(DenseTensor::random({l, p, r}, rng));
    l = r;
  }
  return g;
}

CompressResult finish(FitResult fr, std::size_t d, double dist) {
  CompressResult res;
  res.mpo = devectorize(fr.chain, d);
  res.distance = dist;
  res.sweeps = fr.sweeps;
  res.converged = fr.converged;
  res.at_precision_floor = dist <= 1e-15;
  res.trace = std::move(fr.trace);
  return res;
}

}  // namespace

CompressResult compress_mpo(const Mpo& m, const CompressOptions& opt) {
  validate_mpo(m);
  if (opt.target_d == 0) throw ArgumentError("compress_mpo: targetD must be positive");
  const std::size_t n = m.size(), d = m.phys_dim();
  const Chain t = vectorize(m);
  const double nm = chain_norm(t);
  if (nm == 0.0) {
    CompressResult z;
    z.mpo = scale(identity_mpo(n, d), 0.0);
    z.converged = true;
    z.at_precision_floor = true;
    return z;
  }
  Chain guess = opt.init == InitMode::SvdSeed ? svd_compress_chain(t, opt.target_d, 0.0)
                                              : random_guess(n, d * d, opt.target_d, opt.seed);
  FitOptions fo;
  fo.max_sweeps = opt.max_sweeps;
  fo.tol = opt.tol;
  fo.target_norm2 = nm * nm;
  fo.record_trace = opt.record_trace;
  FitResult fr = variational_fit(nullptr, t, std::move(guess), fo);
  const double dist = chain_difference_norm(t, fr.chain) / nm;
  return finish(std::move(fr), d, dist);
}

CompressResult compress_product(const Mpo& a, const Mpo& b, const CompressOptions& opt, bool exact_distance) {
  validate_mpo(a);
  validate_mpo(b);
  if (a.size() != b.size()) throw DimensionError("compress_product: length mismatch");
  if (opt.target_d == 0) throw ArgumentError("compress_product: targetD must be positive");
  const std::size_t n = a.size(), d = a.phys_dim();
  const OpChain o = left_multiplier(a);
  const Chain t = vectorize(b);
  Chain guess = opt.init == InitMode::SvdSeed ? zipup_chain(&o, t, opt.target_d)
                                              : random_guess(n, d * d, opt.target_d, opt.seed);
  FitOptions fo;
  fo.max_sweeps = opt.max_sweeps;
  fo.tol = opt.tol;
  fo.record_trace = opt.record_trace;
  fo.compute_target_norm = exact_distance;
  Chain exact;
  if (exact_distance) {
    exact = vectorize(multiply(a, b));
    const double ne = chain_norm(exact);
    fo.target_norm2 = ne * ne;
  }
  FitResult fr = variational_fit(&o, t, std::move(guess), fo);
  double dist = fr.distance;
  if (exact_distance) {
    const double ne = std::sqrt(fr.target_norm2);
    dist = ne == 0.0 ? 0.0 : chain_difference_norm(exact, fr.chain) / ne;
  }
  return finish(std::move(fr), d, dist);
}

TruncationRow evaluate_approximation(const Mpo& m, const Mpo& approx, const Mps& gs_ref, double e_ref,
                                     const TruncationStudyOptions& opt) {
  TruncationRow row;
  row.op_error = mpo_distance(m, approx);
  GroundStateOptions go;
  go.chi = opt.chi;
  go.max_sweeps = opt.gs_sweeps;
  go.energy_tol = opt.gs_tol;
  go.seed = opt.seed;
  go.initial = gs_ref;  // warm start from the reference state
  // a fit stopped short of its optimum need not be exactly Hermitian
  const Mpo target = is_hermitian(approx) ? approx : scale(add(approx, adjoint(approx)), 0.5);
  GroundStateResult gr = ground_state(target, go);
  const double ov = std::abs(overlap(gs_ref, gr.state)) / (norm(gs_ref) * norm(gr.state));
  row.gs_fidelity_error = std::max(0.0, 1.0 - ov);
  row.energy_rel_error = std::abs(gr.energy - e_ref) / std::abs(e_ref);
  row.converged = gr.converged;
  return row;
}

std::vector<TruncationRow> truncation_study(const Mpo& m, const std::vector<std::size_t>& d_list, const Mps& gs_ref,
                                            double e_ref, const TruncationStudyOptions& opt) {
  std::vector<TruncationRow> rows;
  for (std::size_t dd : d_list) {
    CompressOptions co = opt.compress;
    co.target_d = dd;
    CompressResult cr = compress_mpo(m, co);
    TruncationRow row = evaluate_approximation(m, cr.mpo, gs_ref, e_ref, opt);
    row.target_d = dd;
    row.op_error = cr.distance;
    row.converged = row.converged && cr.converged;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace tnops
