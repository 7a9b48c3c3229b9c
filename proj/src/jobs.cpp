#include "tnops/jobs.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <sstream>
#include <thread>

#include "json_util.hpp"
#include "tnops/compress.hpp"
#include "tnops/errors.hpp"
#include "tnops/expfit.hpp"
#include "tnops/groundstate.hpp"
#include "tnops/io.hpp"
#include "tnops/peps.hpp"
#include "tnops/rng.hpp"
#include "tnops/timeevo.hpp"

namespace tnops {

using detail::get_or;
using detail::json;

namespace {

const char* kVersion = "0.1.0";

// ---------------------------------------------------------------- config

struct CompressCfg {
  std::size_t target_d = 8;
  std::size_t max_sweeps = 50;
  double tol = 1e-12;
  std::string init = "svd";
  std::vector<std::size_t> d_list;
};

struct GroundCfg {
  std::size_t chi = 16;
  std::size_t max_sweeps = 100;
  double energy_tol = 1e-10;
  std::string solver = "auto";
  std::size_t repeats = 1;
};

struct EvolveCfg {
  std::string method = "taylor";
  double dt = 0.1;
  std::size_t steps = 10;
  unsigned order = 7;
  unsigned doublings = 5;
  std::size_t operator_d = 30;
  unsigned trotter_order = 2;
  std::size_t chi = 32;
  std::string initial = "neel";
  std::vector<std::size_t> levels;
  double angle = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t every = 1;
  double alarm = 1e-6;
};

struct ProbeCfg {
  unsigned n = 4;
  double tol = 1e-10;
  std::size_t d_start = 1;
};

struct PepsCfg {
  std::size_t side = 2;
  std::string kind = "nearestNeighbor";  // nearestNeighbor | longRange
  std::string mode = "linear";           // linear | sqrt
  std::string x = "sz";
  std::string y = "sz";
  double alpha = 3.0;                    // couplings 1 / r^alpha
  std::string state = "product";         // product | random
  std::vector<std::size_t> levels;
  std::size_t chi = 2;
  std::vector<std::size_t> d_cut = {4, 8, 16};
  bool termwise = false;
};

struct JobConfig {
  std::uint64_t seed = 0;
  std::optional<HamiltonianSpec> hamiltonian;
  std::string mpo_file;
  CompressCfg compression;
  GroundCfg groundstate;
  EvolveCfg evolution;
  ProbeCfg probe;
  double rank_tol = 1e-10;
  PepsCfg peps;
};

JobConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  JobConfig c;
  c.seed = get_or<std::uint64_t>(j, "seed", 0);
  if (j.contains("hamiltonian") && !j["hamiltonian"].is_null()) c.hamiltonian = detail::spec_from_json(j["hamiltonian"]);
  c.mpo_file = get_or<std::string>(j, "mpo_file", "");
  if (j.contains("compression")) {
    const json& s = j["compression"];
    c.compression.target_d = get_or(s, "target_d", c.compression.target_d);
    c.compression.max_sweeps = get_or(s, "max_sweeps", c.compression.max_sweeps);
    c.compression.tol = get_or(s, "tol", c.compression.tol);
    c.compression.init = get_or(s, "init", c.compression.init);
    c.compression.d_list = get_or(s, "d_list", c.compression.d_list);
    if (c.compression.init != "svd" && c.compression.init != "random")
      throw ConfigError("compression.init must be 'svd' or 'random'");
  }
  if (j.contains("groundstate")) {
    const json& s = j["groundstate"];
    c.groundstate.chi = get_or(s, "chi", c.groundstate.chi);
    c.groundstate.max_sweeps = get_or(s, "max_sweeps", c.groundstate.max_sweeps);
    c.groundstate.energy_tol = get_or(s, "energy_tol", c.groundstate.energy_tol);
    c.groundstate.solver = get_or(s, "solver", c.groundstate.solver);
    c.groundstate.repeats = get_or(s, "repeats", c.groundstate.repeats);
    if (c.groundstate.repeats == 0) throw ConfigError("groundstate.repeats must be >= 1");
  }
  if (j.contains("evolution")) {
    const json& s = j["evolution"];
    EvolveCfg& e = c.evolution;
    e.method = get_or(s, "method", e.method);
    e.dt = get_or(s, "dt", e.dt);
    e.steps = get_or(s, "steps", e.steps);
    e.order = get_or(s, "order", e.order);
    e.doublings = get_or(s, "doublings", e.doublings);
    e.operator_d = get_or(s, "operator_d", e.operator_d);
    e.trotter_order = get_or(s, "trotter_order", e.trotter_order);
    e.chi = get_or(s, "chi", e.chi);
    e.initial = get_or(s, "initial", e.initial);
    e.levels = get_or(s, "levels", e.levels);
    e.angle = get_or(s, "angle", e.angle);
    e.pairs = get_or(s, "pairs", e.pairs);
    e.every = get_or(s, "every", e.every);
    e.alarm = get_or(s, "alarm", e.alarm);
    if (e.method != "taylor" && e.method != "trotter") throw ConfigError("evolution.method must be taylor or trotter");
  }
  if (j.contains("probe")) {
    const json& s = j["probe"];
    c.probe.n = get_or(s, "n", c.probe.n);
    c.probe.tol = get_or(s, "tol", c.probe.tol);
    c.probe.d_start = get_or(s, "d_start", c.probe.d_start);
  }
  if (j.contains("rank")) c.rank_tol = get_or(j["rank"], "tol", c.rank_tol);
  if (j.contains("peps")) {
    const json& s = j["peps"];
    PepsCfg& p = c.peps;
    p.side = get_or(s, "side", p.side);
    p.kind = get_or(s, "kind", p.kind);
    p.mode = get_or(s, "mode", p.mode);
    p.x = get_or(s, "x", p.x);
    p.y = get_or(s, "y", p.y);
    p.alpha = get_or(s, "alpha", p.alpha);
    p.state = get_or(s, "state", p.state);
    p.levels = get_or(s, "levels", p.levels);
    p.chi = get_or(s, "chi", p.chi);
    p.d_cut = get_or(s, "d_cut", p.d_cut);
    p.termwise = get_or(s, "termwise", p.termwise);
    if (p.kind != "nearestNeighbor" && p.kind != "longRange") throw ConfigError("peps.kind must be nearestNeighbor or longRange");
    if (p.mode != "linear" && p.mode != "sqrt") throw ConfigError("peps.mode must be linear or sqrt");
  }
  return c;
}

json config_to_json(const JobConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["hamiltonian"] = c.hamiltonian ? detail::spec_to_json(*c.hamiltonian) : json(nullptr);
  j["mpo_file"] = c.mpo_file;
  const CompressCfg& k = c.compression;
  j["compression"] = {{"target_d", k.target_d}, {"max_sweeps", k.max_sweeps}, {"tol", k.tol},
                      {"init", k.init},         {"d_list", k.d_list}};
  const GroundCfg& g = c.groundstate;
  j["groundstate"] = {{"chi", g.chi},       {"max_sweeps", g.max_sweeps}, {"energy_tol", g.energy_tol},
                      {"solver", g.solver}, {"repeats", g.repeats}};
  const EvolveCfg& e = c.evolution;
  j["evolution"] = {{"method", e.method},     {"dt", e.dt},           {"steps", e.steps},
                    {"order", e.order},       {"doublings", e.doublings}, {"operator_d", e.operator_d},
                    {"trotter_order", e.trotter_order}, {"chi", e.chi}, {"initial", e.initial},
                    {"levels", e.levels},     {"angle", e.angle},     {"pairs", e.pairs},
                    {"every", e.every},       {"alarm", e.alarm}};
  j["probe"] = {{"n", c.probe.n}, {"tol", c.probe.tol}, {"d_start", c.probe.d_start}};
  j["rank"] = {{"tol", c.rank_tol}};
  const PepsCfg& p = c.peps;
  j["peps"] = {{"side", p.side},   {"kind", p.kind},   {"mode", p.mode},     {"x", p.x},
               {"y", p.y},         {"alpha", p.alpha}, {"state", p.state},   {"levels", p.levels},
               {"chi", p.chi},     {"d_cut", p.d_cut}, {"termwise", p.termwise}};
  return j;
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text.empty() ? "{}" : text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON config: ") + e.what());
  }
}

// ---------------------------------------------------------------- helpers

struct Ctx {
  JobConfig cfg;
  std::filesystem::path out;
  unsigned workers = 1;
  bool verbose = false;
  std::function<void(const std::string&)> log;
  std::ostringstream summary;
  json result;
  bool not_converged = false;

  std::uint64_t stream(const char* name) const { return Rng(cfg.seed).substream(name).seed_state(); }
  std::string path(const std::string& f) const { return (out / f).string(); }
  void note(const std::string& s) {
    if (verbose && log) log(s);
  }
  void write_result(const std::string& file) { write_text(path(file), result.dump(2) + "\n"); }
};

Mpo input_mpo(Ctx& c) {
  if (!c.cfg.mpo_file.empty()) return load_mpo(c.cfg.mpo_file);
  if (!c.cfg.hamiltonian) throw ConfigError("config needs 'hamiltonian' or 'mpo_file'");
  return build_hamiltonian(*c.cfg.hamiltonian);
}

CompressOptions compress_options(const Ctx& c) {
  CompressOptions o;
  o.target_d = c.cfg.compression.target_d;
  o.max_sweeps = c.cfg.compression.max_sweeps;
  o.tol = c.cfg.compression.tol;
  o.init = c.cfg.compression.init == "svd" ? InitMode::SvdSeed : InitMode::Random;
  o.seed = c.stream("compressor");
  return o;
}

GroundStateOptions ground_options(const Ctx& c, std::uint64_t seed) {
  GroundStateOptions o;
  o.chi = c.cfg.groundstate.chi;
  o.max_sweeps = c.cfg.groundstate.max_sweeps;
  o.energy_tol = c.cfg.groundstate.energy_tol;
  o.seed = seed;
  const std::string& s = c.cfg.groundstate.solver;
  if (s == "auto")
    o.solver = LocalSolver::Auto;
  else if (s == "dense")
    o.solver = LocalSolver::Dense;
  else if (s == "iterative")
    o.solver = LocalSolver::Iterative;
  else
    throw ConfigError("groundstate.solver must be auto, dense or iterative");
  return o;
}

std::string bond_report(const Mpo& m) { return "D=" + std::to_string(m.max_bond()); }

// ---------------------------------------------------------------- commands

void cmd_build(Ctx& c) {
  if (!c.cfg.hamiltonian) throw ConfigError("build needs 'hamiltonian'");
  const Mpo m = build_hamiltonian(*c.cfg.hamiltonian);
  save_mpo(c.path("mpo.tnops"), m, c.cfg.seed);
  c.result = {{"bonds", m.bonds()}, {"max_bond", m.max_bond()}, {"report", bond_report(m)}, {"n_sites", m.size()}};
  c.write_result("build.json");
  c.summary << bond_report(m) << "\n";
}

void cmd_compress(Ctx& c) {
  const Mpo m = input_mpo(c);
  const CompressResult r = compress_mpo(m, compress_options(c));
  save_mpo(c.path("compressed.tnops"), r.mpo, c.cfg.seed);
  c.result = {{"target_d", c.cfg.compression.target_d},
              {"distance", r.distance},
              {"sweeps", r.sweeps},
              {"converged", r.converged},
              {"original_max_bond", m.max_bond()},
              {"max_bond", r.mpo.max_bond()}};
  c.write_result("compress.json");
  c.not_converged = !r.converged;
  c.summary << "distance=" << format_double(r.distance) << " sweeps=" << r.sweeps << (r.converged ? "" : " (not converged)")
            << "\n";
}

void cmd_truncation_study(Ctx& c) {
  const Mpo m = input_mpo(c);
  std::vector<std::size_t> d_list = c.cfg.compression.d_list;
  if (d_list.empty())
    for (std::size_t dd = 1; dd <= m.max_bond(); ++dd) d_list.push_back(dd);

  const GroundStateOptions go = ground_options(c, c.stream("solver"));
  c.note("reference ground state");
  const GroundStateResult ref = ground_state(m, go);

  TruncationStudyOptions to;
  to.compress = compress_options(c);
  to.chi = go.chi;
  to.gs_sweeps = go.max_sweeps;
  to.gs_tol = go.energy_tol;
  to.seed = go.seed;

  std::vector<TruncationRow> rows(d_list.size());
  std::vector<std::exception_ptr> errs(d_list.size());
  auto work = [&](std::size_t w, std::size_t nw) {
    for (std::size_t i = w; i < d_list.size(); i += nw) {
      try {
        rows[i] = truncation_study(m, {d_list[i]}, ref.state, ref.energy, to).at(0);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  const std::size_t nw = std::max<std::size_t>(1, std::min<std::size_t>(c.workers, d_list.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < nw; ++w) pool.emplace_back(work, w, nw);
  work(0, nw);
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);

  std::vector<std::vector<double>> table;
  bool all_conv = ref.converged;
  for (const TruncationRow& r : rows) {
    table.push_back({double(r.target_d), r.op_error, r.gs_fidelity_error, r.energy_rel_error, r.converged ? 1.0 : 0.0});
    all_conv = all_conv && r.converged;
  }
  write_csv(c.path("truncation.csv"), {"D", "op_error", "gs_fidelity_error", "energy_rel_error", "converged"}, table);
  c.result = {{"rows", rows.size()}, {"reference_energy", ref.energy}, {"reference_converged", ref.converged},
              {"converged", all_conv}, {"exact_max_bond", m.max_bond()}};
  c.write_result("truncation.json");
  c.not_converged = !all_conv;
  c.summary << "wrote " << rows.size() << " rows to truncation.csv\n";
}

void cmd_ground(Ctx& c) {
  const Mpo m = input_mpo(c);
  const std::size_t reps = c.cfg.groundstate.repeats;
  json runs = json::array();
  std::vector<double> es;
  std::optional<GroundStateResult> best;
  bool all_conv = true;
  Rng seeds(c.stream("solver"));
  for (std::size_t k = 0; k < reps; ++k) {
    const std::uint64_t s = k == 0 ? c.stream("solver") : seeds.next_u64();
    GroundStateResult r = ground_state(m, ground_options(c, s));
    runs.push_back({{"energy", r.energy}, {"sweeps", r.sweeps}, {"converged", r.converged}, {"chi", c.cfg.groundstate.chi},
                    {"seed", s}});
    es.push_back(r.energy);
    all_conv = all_conv && r.converged;
    if (!best || r.energy < best->energy) best = std::move(r);
    c.note("run " + std::to_string(k) + " E=" + format_double(es.back()));
  }
  save_mps(c.path("state.tnops"), best->state, c.cfg.seed);
  const auto [lo, hi] = std::minmax_element(es.begin(), es.end());
  c.result = {{"energy", best->energy},     {"sweeps", best->sweeps}, {"converged", all_conv},
              {"chi", c.cfg.groundstate.chi}, {"seed", c.cfg.seed},   {"spread", *hi - *lo},
              {"runs", runs}};
  c.write_result("ground.json");
  c.not_converged = !all_conv;
  c.summary << "E=" << format_double(best->energy) << (all_conv ? "" : " (not converged)") << "\n";
}

Mps initial_state(const EvolveCfg& e, std::size_t n) {
  std::vector<std::size_t> lv(n, 0);
  if (e.initial == "neel") {
    for (std::size_t i = 0; i < n; ++i) lv[i] = i % 2;
  } else if (e.initial == "domain_wall") {
    for (std::size_t i = n / 2; i < n; ++i) lv[i] = 1;
  } else if (e.initial == "product") {
    if (e.levels.size() != n) throw ConfigError("evolution.levels needs one entry per site");
    lv = e.levels;
  } else if (e.initial == "tilted") {
    Vector v(2);
    v << std::cos(e.angle / 2), std::sin(e.angle / 2);
    return product_state(std::vector<Vector>(n, v));
  } else {
    throw ConfigError("evolution.initial must be neel, domain_wall, product or tilted");
  }
  return product_state(lv, 2);
}

void cmd_evolve(Ctx& c) {
  if (!c.cfg.hamiltonian) throw ConfigError("evolve needs 'hamiltonian'");
  const EvolveCfg& e = c.cfg.evolution;
  const HamiltonianSpec& spec = *c.cfg.hamiltonian;
  if (spec.d != 2) throw UnsupportedError("evolve supports d = 2 only");
  const Mpo h = build_hamiltonian(spec);
  for (const auto& [i, j] : e.pairs)
    if (i >= h.size() || j >= h.size()) throw ConfigError("evolution.pairs index out of range");

  OperatorBuild ob;
  if (e.method == "taylor") {
    TaylorPlan p;
    p.order = e.order;
    p.doublings = e.doublings;
    p.dt = e.dt;
    p.operator_d = e.operator_d;
    p.compress = compress_options(c);
    ob = plan_operator(h, p);
  } else {
    ob = trotter_step_mpo(bond_model(spec), e.dt, e.trotter_order, e.operator_d, compress_options(c));
  }
  c.note("step operator " + bond_report(ob.op));

  Observables obs;
  obs.hamiltonian = &h;
  obs.pairs = e.pairs;
  obs.site_op = number_op();
  obs.every = e.every;
  obs.alarm = e.alarm;
  const EvolutionRecord rec = evolve(initial_state(e, h.size()), ob.op, e.dt, e.steps, e.chi, obs);

  std::vector<std::string> head = {"t", "norm", "energy", "bond", "distance", "flagged"};
  for (const auto& [i, j] : e.pairs) head.push_back("c_" + std::to_string(i) + "_" + std::to_string(j));
  std::vector<std::vector<double>> table;
  for (std::size_t k = 0; k < rec.times.size(); ++k) {
    std::vector<double> row = {rec.times[k], rec.norms[k], rec.energies[k], double(rec.bonds[k]), rec.distances[k],
                               rec.flagged[k] ? 1.0 : 0.0};
    for (std::size_t p = 0; p < e.pairs.size(); ++p) row.push_back(rec.correlations[k][p]);
    table.push_back(std::move(row));
  }
  write_csv(c.path("evolution.csv"), head, table);
  save_mps(c.path("final_state.tnops"), rec.final_state, c.cfg.seed);

  double dn = 0.0, de = 0.0;
  const double e0 = rec.energies.front();
  for (std::size_t k = 0; k < rec.times.size(); ++k) {
    dn = std::max(dn, std::abs(rec.norms[k] - 1.0));
    de = std::max(de, std::abs(rec.energies[k] - e0) / std::max(std::abs(e0), 1e-300));
  }
  const std::size_t flagged = std::count(rec.flagged.begin(), rec.flagged.end(), true);
  c.result = {{"method", e.method},         {"operator_bond", ob.op.max_bond()}, {"operator_converged", ob.converged},
              {"steps", e.steps},           {"max_norm_error", dn},              {"max_energy_drift", de},
              {"flagged_steps", flagged}};
  c.write_result("evolve.json");
  c.not_converged = !ob.converged;
  c.summary << "max|norm-1|=" << format_double(dn) << " max rel dE=" << format_double(de) << "\n";
}

void cmd_probe_power(Ctx& c) {
  const Mpo m = input_mpo(c);
  const std::vector<PowerProbe> pp = probe_power_bond_dim(m, c.cfg.probe.n, c.cfg.probe.d_start, c.cfg.probe.tol);
  json arr = json::array();
  for (const PowerProbe& p : pp) {
    json tr = json::array();
    for (const auto& [dc, dist] : p.trace) tr.push_back({dc, dist});
    arr.push_back({{"n", p.power}, {"D_exact", p.d_exact}, {"trace", tr}});
    c.summary << "n=" << p.power << " D_exact=" << p.d_exact << "\n";
  }
  c.result = {{"tol", c.cfg.probe.tol}, {"powers", arr}};
  c.write_result("powers.json");
}

void cmd_rank_check(Ctx& c) {
  const Mpo m = input_mpo(c);
  const RankReport r = certify_builder(m, c.cfg.rank_tol);
  c.result = detail::rank_to_json(r);
  c.write_result("rank.json");
  for (const CutRank& k : r.cuts) c.summary << "cut " << k.cut << ": rank " << k.rank << " bond " << k.bond << "\n";
  c.summary << (r.optimal ? "optimal" : r.optimal_interior ? "optimal at interior cuts" : "not optimal") << "\n";
}

Eigen::MatrixXd grid_couplings(std::size_t side, double alpha) {
  const std::size_t n = side * side;
  Eigen::MatrixXd cm = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dr = double(i / side) - double(j / side), dc = double(i % side) - double(j % side);
      cm(i, j) = std::pow(std::hypot(dr, dc), -alpha);
    }
  return cm;
}

PepoBuild peps_operator(const PepsCfg& p) {
  const RowMatrix x = named_operator(p.x), y = named_operator(p.y);
  if (p.kind == "nearestNeighbor") return {pepo_nearest_neighbor(x, p.side), {}};
  return pepo_long_range(grid_couplings(p.side, p.alpha), x, y, p.side,
                         p.mode == "sqrt" ? LongRangeMode::Sqrt : LongRangeMode::Linear);
}

std::vector<PepsTerm> peps_terms(const PepsCfg& p) {
  const RowMatrix x = named_operator(p.x), y = named_operator(p.y);
  if (p.kind == "nearestNeighbor") return nearest_neighbor_terms(x, p.side);
  return long_range_terms(grid_couplings(p.side, p.alpha), x, y, p.side);
}

// Dense sum of the terms; the oracle for small grids.
RowMatrix terms_dense(const std::vector<PepsTerm>& terms, std::size_t sites) {
  const std::size_t dim = std::size_t(1) << sites;
  RowMatrix h = RowMatrix::Zero(dim, dim);
  for (const PepsTerm& t : terms) {
    RowMatrix op = RowMatrix::Identity(1, 1);
    for (std::size_t s = 0; s < sites; ++s) {
      RowMatrix f = RowMatrix::Identity(2, 2);
      for (const auto& [site, o] : t.ops)
        if (site == s) f = o * f;
      RowMatrix k(op.rows() * 2, op.cols() * 2);
      for (Eigen::Index a = 0; a < op.rows(); ++a)
        for (Eigen::Index b = 0; b < op.cols(); ++b) k.block(a * 2, b * 2, 2, 2) = op(a, b) * f;
      op = std::move(k);
    }
    h += t.coef * op;
  }
  return h;
}

void cmd_peps_build(Ctx& c) {
  const PepsCfg& p = c.cfg.peps;
  const PepoBuild b = peps_operator(p);
  json hb = json::array(), vb = json::array();
  for (std::size_t r = 0; r < p.side; ++r)
    for (std::size_t col = 0; col < p.side; ++col) {
      if (col + 1 < p.side) hb.push_back(b.pepo.horizontal_bond(r, col));
      if (r + 1 < p.side) vb.push_back(b.pepo.vertical_bond(r, col));
    }
  c.result = {{"side", p.side},
              {"kind", p.kind},
              {"mode", p.mode},
              {"max_horizontal_bond", b.pepo.max_horizontal_bond()},
              {"max_vertical_bond", b.pepo.max_vertical_bond()},
              {"horizontal_bonds", hb},
              {"vertical_bonds", vb},
              {"unused_rules", b.unused_rules}};
  if (p.side * p.side <= 12) {
    const RowMatrix dense = pepo_to_dense(b.pepo);
    const RowMatrix ref = terms_dense(peps_terms(p), p.side * p.side);
    const double err = (dense - ref).norm() / std::max(ref.norm(), 1e-300);
    c.result["dense_relative_error"] = err;
    c.summary << "dense relative error " << format_double(err) << "\n";
  }
  c.write_result("pepo.json");
  c.summary << "horizontal D=" << b.pepo.max_horizontal_bond() << " vertical D=" << b.pepo.max_vertical_bond() << "\n";
}

void cmd_peps_expect(Ctx& c) {
  const PepsCfg& p = c.cfg.peps;
  Peps psi;
  if (p.state == "random") {
    psi = random_peps(p.side, p.side, 2, p.chi, c.stream("builder"));
  } else if (p.state == "product") {
    std::vector<Vector> loc;
    for (std::size_t s = 0; s < p.side * p.side; ++s) {
      Vector v = Vector::Zero(2);
      v(s < p.levels.size() ? p.levels[s] % 2 : 0) = 1.0;
      loc.push_back(v);
    }
    psi = product_peps(p.side, p.side, loc);
  } else {
    throw ConfigError("peps.state must be product or random");
  }
  const PepoBuild b = peps_operator(p);
  json runs = json::array();
  bool all_conv = true;
  for (std::size_t dc : p.d_cut) {
    const BoundaryResult r = boundary_contract_expectation(psi, b.pepo, dc);
    const BoundaryResult nr = boundary_contract_expectation(psi, identity_pepo(p.side, p.side, 2), dc);
    const bool conv = std::all_of(r.converged.begin(), r.converged.end(), [](bool v) { return v; });
    all_conv = all_conv && conv;
    const double worst = r.truncation.empty() ? 0.0 : *std::max_element(r.truncation.begin(), r.truncation.end());
    runs.push_back({{"d_cut", dc},
                    {"re", r.value.real()},
                    {"im", r.value.imag()},
                    {"norm_squared", nr.value.real()},
                    {"normalized", (r.value / nr.value).real()},
                    {"max_truncation", worst},
                    {"max_boundary_bond", r.max_boundary_bond},
                    {"converged", conv}});
    c.summary << "D_cut=" << dc << " <H>=" << format_double((r.value / nr.value).real()) << "\n";
  }
  c.result = {{"side", p.side}, {"state", p.state}, {"boundary", runs}};
  if (p.termwise && !p.d_cut.empty()) {
    const TermwiseResult t = peps_expectation_termwise(psi, peps_terms(p), p.d_cut.back());
    c.result["termwise"] = {{"re", t.value.real()},
                            {"im", t.value.imag()},
                            {"contractions", t.contractions},
                            {"column_steps", t.column_steps}};
  }
  if (p.side * p.side <= 12) {
    const Vector v = peps_to_dense(psi);
    const RowMatrix h = pepo_to_dense(b.pepo);
    const cplx ex = v.dot(h * v);
    c.result["dense"] = {{"re", ex.real()}, {"im", ex.imag()}, {"normalized", ex.real() / v.squaredNorm()}};
  }
  c.write_result("peps.json");
  c.not_converged = !all_conv;
}

// ---------------------------------------------------------------- selftest

RowMatrix kron(const RowMatrix& a, const RowMatrix& b) {
  RowMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

// ops placed at consecutive sites starting at `site`, identity elsewhere
RowMatrix embed(const std::vector<RowMatrix>& ops, std::size_t site, std::size_t n) {
  RowMatrix out = RowMatrix::Identity(1, 1);
  for (std::size_t s = 0; s < n; ++s) {
    const bool in = s >= site && s < site + ops.size();
    out = kron(out, in ? ops[s - site] : RowMatrix(RowMatrix::Identity(2, 2)));
  }
  return out;
}

double rel(const RowMatrix& a, const RowMatrix& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<Check> run_selftest(const std::filesystem::path& dir) {
  std::vector<Check> out;
  auto check = [&](const std::string& name, auto fn) {
    Check c{name, false, ""};
    try {
      std::tie(c.pass, c.detail) = fn();
    } catch (const std::exception& e) {
      c.detail = std::string("exception: ") + e.what();
    }
    out.push_back(c);
  };
  const std::size_t n = 6;
  const RowMatrix gx = generic_matrix(2, 11), gy = generic_matrix(2, 12), gz = generic_matrix(2, 13);
  auto num = [](double v) { return format_double(v); };

  check("nearest-neighbor builder matches dense sum", [&] {
    RowMatrix ref = RowMatrix::Zero(64, 64);
    for (std::size_t i = 0; i + 1 < n; ++i) ref += embed({gx, gy}, i, n);
    const double e = rel(to_dense_matrix(nearest_neighbor(gx, gy, n)), ref);
    return std::make_pair(e < 1e-12, "rel " + num(e));
  });
  check("ising model matches dense sum", [&] {
    RowMatrix ref = RowMatrix::Zero(64, 64);
    for (std::size_t i = 0; i + 1 < n; ++i) ref -= embed({pauli_z(), pauli_z()}, i, n);
    for (std::size_t i = 0; i < n; ++i) ref -= 0.7 * embed({pauli_x()}, i, n);
    const double e = rel(to_dense_matrix(ising({0.7}, n)), ref);
    return std::make_pair(e < 1e-12, "rel " + num(e));
  });
  check("fixed-range builder matches dense sum", [&] {
    RowMatrix ref = RowMatrix::Zero(64, 64);
    for (std::size_t i = 0; i + 2 < n; ++i) ref += embed({gx, RowMatrix::Identity(2, 2), gy}, i, n);
    const double e = rel(to_dense_matrix(fixed_range(gx, gy, 2, n)), ref);
    return std::make_pair(e < 1e-12, "rel " + num(e));
  });
  check("three-body chain matches dense sum", [&] {
    RowMatrix ref = RowMatrix::Zero(64, 64);
    for (std::size_t i = 0; i + 2 < n; ++i) ref += embed({gx, gy, gz}, i, n);
    const double e = rel(to_dense_matrix(k_body_chain({gx, gy, gz}, {}, n)), ref);
    return std::make_pair(e < 1e-12, "rel " + num(e));
  });
  check("bond dimensions (nearest-neighbor 3, range-3 5, four-body 5)", [&] {
    const std::size_t a = nearest_neighbor(gx, gy, n).max_bond();
    const std::size_t b = fixed_range(gx, gy, 3, 8).max_bond();
    const std::size_t k = k_body_chain({gx, gy, gz, gx}, {}, 8).max_bond();
    return std::make_pair(a == 3 && b == 5 && k == 5,
                          std::to_string(a) + " " + std::to_string(b) + " " + std::to_string(k));
  });
  check("add and multiply match dense algebra", [&] {
    const Mpo a = random_mpo(4, 2, 3, 21), b = random_mpo(4, 2, 2, 22);
    const RowMatrix da = to_dense_matrix(a), db = to_dense_matrix(b);
    const double e1 = rel(to_dense_matrix(add(a, b)), da + db);
    const double e2 = rel(to_dense_matrix(multiply(a, b)), da * db);
    return std::make_pair(e1 < 1e-12 && e2 < 1e-12, num(e1) + " " + num(e2));
  });
  check("compression at the exact bond is lossless", [&] {
    CompressOptions o;
    o.target_d = 3;
    o.init = InitMode::SvdSeed;
    const CompressResult r = compress_mpo(ising({0.7}, 8), o);
    return std::make_pair(r.distance < 1e-10, "distance " + num(r.distance));
  });
  check("ground state matches dense lowest eigenvalue", [&] {
    const Mpo h = ising({0.7}, n);
    const Eigen::MatrixXcd dh = to_dense_matrix(h);
    const double e0 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(dh).eigenvalues()(0);
    GroundStateOptions o;
    o.chi = 8;
    const GroundStateResult r = ground_state(h, o);
    const double diff = std::abs(r.energy - e0);
    return std::make_pair(diff < 1e-9 && r.energy >= e0 - 1e-10, "dE " + num(diff));
  });
  check("Taylor step operator matches dense exponential", [&] {
    const Mpo h = xxz({0.35, 0.1}, n);
    TaylorPlan p;
    p.order = 7;
    p.doublings = 2;
    p.dt = 0.1;
    p.operator_d = 64;
    p.compress.init = InitMode::SvdSeed;
    const OperatorBuild ob = plan_operator(h, p);
    const RowMatrix ref = expm_hermitian(to_dense_matrix(h), cplx(0.0, -0.1));
    const double e = rel(to_dense_matrix(ob.op), ref);
    return std::make_pair(e < 1e-8, "rel " + num(e));
  });
  check("operator Schmidt ranks equal bonds at interior cuts", [&] {
    const RankReport r = certify_builder(nearest_neighbor(gx, gy, n));
    return std::make_pair(r.optimal_interior, std::string(r.optimal_interior ? "ok" : "mismatch"));
  });
  check("container round trip is exact", [&] {
    const Mpo a = random_mpo(4, 2, 3, 31);
    const std::string f = (dir / "selftest_roundtrip.tnops").string();
    save_mpo(f, a, 31);
    const Mpo b = load_mpo(f);
    std::filesystem::remove(f);
    bool same = a.size() == b.size();
    for (std::size_t k = 0; same && k < a.size(); ++k)
      same = a.sites[k].shape() == b.sites[k].shape() && a.sites[k].values() == b.sites[k].values();
    return std::make_pair(same, std::string(same ? "identical" : "differs"));
  });
  check("nearest-neighbor PEPO matches dense sum on 2x2", [&] {
    const std::vector<PepsTerm> t = nearest_neighbor_terms(pauli_z(), 2);
    const double e = rel(pepo_to_dense(pepo_nearest_neighbor(pauli_z(), 2)), terms_dense(t, 4));
    return std::make_pair(e < 1e-11, "rel " + num(e));
  });
  check("exponential-sum residual is nonincreasing", [&] {
    const auto seq = fit_exp_sum_sequence([](double q) { return std::pow(q, -3.0); }, 99, 4, 1);
    bool mono = true;
    for (std::size_t i = 1; i < seq.size(); ++i) mono = mono && seq[i].residual <= seq[i - 1].residual;
    return std::make_pair(mono, "last " + num(seq.back().residual));
  });
  return out;
}

void cmd_selftest(Ctx& c) {
  const std::vector<Check> checks = run_selftest(c.out);
  json arr = json::array();
  bool all = true;
  for (const Check& k : checks) {
    c.summary << (k.pass ? "PASS " : "FAIL ") << k.name << " (" << k.detail << ")\n";
    arr.push_back({{"name", k.name}, {"pass", k.pass}, {"detail", k.detail}});
    all = all && k.pass;
  }
  c.result = {{"all_pass", all}, {"checks", arr}};
  c.write_result("selftest.json");
  if (!all) throw NumericError("selftest: some invariants failed");
}

JobStatus status_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config:
    case ErrorKind::Argument:
    case ErrorKind::Io:
    case ErrorKind::Ambiguity:
    case ErrorKind::Unsupported:
    case ErrorKind::Dimension: return JobStatus::Config;
    case ErrorKind::Convergence: return JobStatus::NotConverged;
    case ErrorKind::SizeGuard: return JobStatus::SizeGuard;
    default: return JobStatus::Failed;
  }
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace

std::string normalize_config(const std::string& command, const std::string& config_json) {
  (void)command;
  return config_to_json(parse_config(parse_text(config_json))).dump();
}

JobResult run_job(const JobOptions& opt) {
  JobResult res;
  Ctx c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    c.cfg = parse_config(parse_text(opt.config_json));
    if (opt.seed) c.cfg.seed = *opt.seed;
    c.out = opt.out_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(opt.out_dir);
    c.workers = std::max(1u, opt.workers);
    c.verbose = opt.verbose;
    c.log = opt.log;
    std::error_code ec;
    std::filesystem::create_directories(c.out, ec);
    if (ec) throw IoError("cannot create output directory: " + c.out.string());

    const std::string& cmd = opt.command;
    if (cmd == "build") cmd_build(c);
    else if (cmd == "compress") cmd_compress(c);
    else if (cmd == "truncation-study") cmd_truncation_study(c);
    else if (cmd == "ground") cmd_ground(c);
    else if (cmd == "evolve") cmd_evolve(c);
    else if (cmd == "probe-power") cmd_probe_power(c);
    else if (cmd == "rank-check") cmd_rank_check(c);
    else if (cmd == "peps-build") cmd_peps_build(c);
    else if (cmd == "peps-expect") cmd_peps_expect(c);
    else if (cmd == "selftest") cmd_selftest(c);
    else throw ConfigError("unknown command: " + cmd);
    res.status = c.not_converged ? JobStatus::NotConverged : JobStatus::Ok;
  } catch (const Error& e) {
    res.status = status_for(e.kind());
    res.error = e.what();
  } catch (const std::exception& e) {
    res.status = JobStatus::Failed;
    res.error = e.what();
  }
  res.summary = c.summary.str();
  res.result_json = c.result.is_null() ? "{}" : c.result.dump();

  // timestamps live only here so result files stay byte-identical across reruns
  if (!c.out.empty()) {
    try {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      json meta = {{"command", opt.command}, {"seed", c.cfg.seed},  {"workers", c.workers}, {"version", kVersion},
                   {"started_utc", utc_now()}, {"wall_seconds", secs}, {"status", int(res.status)},
                   {"config", config_to_json(c.cfg)}};
      write_text((c.out / "meta.json").string(), meta.dump(2) + "\n");
    } catch (...) {
    }
  }
  return res;
}

}  // namespace tnops
