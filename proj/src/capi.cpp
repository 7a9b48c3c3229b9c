#include "tnops/tnops_c.h"

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>

#include "tnops/compress.hpp"
#include "tnops/errors.hpp"
#include "tnops/groundstate.hpp"
#include "tnops/io.hpp"
#include "tnops/jobs.hpp"

struct tnops_mpo {
  tnops::Mpo m;
};
struct tnops_mps {
  tnops::Mps s;
};

namespace {

thread_local std::string g_last_error;

tnops_status code_for(tnops::ErrorKind k) {
  using tnops::ErrorKind;
  switch (k) {
    case ErrorKind::Dimension: return TNOPS_ERR_DIMENSION;
    case ErrorKind::Argument: return TNOPS_ERR_ARGUMENT;
    case ErrorKind::Numeric: return TNOPS_ERR_NUMERIC;
    case ErrorKind::Convergence: return TNOPS_ERR_CONVERGENCE;
    case ErrorKind::Config: return TNOPS_ERR_CONFIG;
    case ErrorKind::SizeGuard: return TNOPS_ERR_SIZE_GUARD;
    case ErrorKind::Ambiguity: return TNOPS_ERR_AMBIGUITY;
    case ErrorKind::Unsupported: return TNOPS_ERR_UNSUPPORTED;
    case ErrorKind::Io: return TNOPS_ERR_IO;
  }
  return TNOPS_ERR_INTERNAL;
}

template <class F>
tnops_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return TNOPS_OK;
  } catch (const tnops::Error& e) {
    g_last_error = e.what();
    return code_for(e.kind());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TNOPS_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return TNOPS_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) throw tnops::ArgumentError(std::string("null ") + what);
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

}  // namespace

extern "C" {

const char* tnops_version(void) { return "0.1.0"; }
const char* tnops_last_error(void) { return g_last_error.c_str(); }
void tnops_string_free(char* s) { std::free(s); }

tnops_status tnops_mpo_build(const char* hamiltonian_json, tnops_mpo** out) {
  return guarded([&] {
    need(hamiltonian_json, "config");
    need(out, "output");
    *out = nullptr;
    auto h = new tnops_mpo{tnops::build_hamiltonian(tnops::hamiltonian_spec_from_json(hamiltonian_json))};
    *out = h;
  });
}

tnops_status tnops_mpo_load(const char* path, tnops_mpo** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "output");
    *out = nullptr;
    *out = new tnops_mpo{tnops::load_mpo(path)};
  });
}

tnops_status tnops_mpo_save(const tnops_mpo* m, const char* path, uint64_t seed) {
  return guarded([&] {
    need(m, "mpo");
    need(path, "path");
    tnops::save_mpo(path, m->m, seed);
  });
}

void tnops_mpo_free(tnops_mpo* m) { delete m; }
size_t tnops_mpo_size(const tnops_mpo* m) { return m ? m->m.size() : 0; }
size_t tnops_mpo_max_bond(const tnops_mpo* m) { return m ? m->m.max_bond() : 0; }

size_t tnops_mpo_bonds(const tnops_mpo* m, size_t* bonds, size_t cap) {
  if (!m) return 0;
  const std::vector<std::size_t> b = m->m.bonds();
  for (size_t i = 0; bonds && i < b.size() && i < cap; ++i) bonds[i] = b[i];
  return b.size();
}

tnops_status tnops_mpo_to_dense(const tnops_mpo* m, double* buf, size_t buf_len) {
  return guarded([&] {
    need(m, "mpo");
    need(buf, "buffer");
    const tnops::RowMatrix d = tnops::to_dense_matrix(m->m);
    if (buf_len < 2 * static_cast<size_t>(d.size())) throw tnops::ArgumentError("dense buffer too small");
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      buf[2 * i] = d.data()[i].real();
      buf[2 * i + 1] = d.data()[i].imag();
    }
  });
}

tnops_status tnops_mpo_compress(const tnops_mpo* m, size_t target_d, uint64_t seed, tnops_mpo** out,
                                double* distance) {
  return guarded([&] {
    need(m, "mpo");
    need(out, "output");
    *out = nullptr;
    tnops::CompressOptions o;
    o.target_d = target_d;
    o.seed = seed;
    o.init = tnops::InitMode::SvdSeed;
    tnops::CompressResult r = tnops::compress_mpo(m->m, o);
    if (distance) *distance = r.distance;
    *out = new tnops_mpo{std::move(r.mpo)};
  });
}

tnops_status tnops_ground_state(const tnops_mpo* h, size_t chi, uint64_t seed, tnops_mps** out, double* energy) {
  return guarded([&] {
    need(h, "mpo");
    need(out, "output");
    *out = nullptr;
    tnops::GroundStateOptions o;
    o.chi = chi;
    o.seed = seed;
    tnops::GroundStateResult r = tnops::ground_state(h->m, o);
    if (energy) *energy = r.energy;
    *out = new tnops_mps{std::move(r.state)};
  });
}

tnops_status tnops_mps_load(const char* path, tnops_mps** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "output");
    *out = nullptr;
    *out = new tnops_mps{tnops::load_mps(path)};
  });
}

tnops_status tnops_mps_save(const tnops_mps* s, const char* path, uint64_t seed) {
  return guarded([&] {
    need(s, "mps");
    need(path, "path");
    tnops::save_mps(path, s->s, seed);
  });
}

void tnops_mps_free(tnops_mps* s) { delete s; }
size_t tnops_mps_size(const tnops_mps* s) { return s ? s->s.size() : 0; }
size_t tnops_mps_max_bond(const tnops_mps* s) { return s ? s->s.max_bond() : 0; }

tnops_status tnops_mps_energy(const tnops_mps* s, const tnops_mpo* h, double* energy) {
  return guarded([&] {
    need(s, "mps");
    need(h, "mpo");
    need(energy, "output");
    *energy = tnops::energy(s->s, h->m);
  });
}

int tnops_run_job(const char* command, const char* config_json, const char* out_dir, int has_seed, uint64_t seed,
                  unsigned workers, int verbose, char** summary, char** result_json) {
  tnops::JobOptions o;
  o.command = command ? command : "";
  o.config_json = config_json ? config_json : "{}";
  o.out_dir = out_dir ? out_dir : ".";
  if (has_seed) o.seed = seed;
  o.workers = workers;
  o.verbose = verbose != 0;
  o.log = [](const std::string& line) { std::cerr << line << "\n"; };
  const tnops::JobResult r = tnops::run_job(o);
  g_last_error = r.error;
  if (summary) *summary = dup(r.summary);
  if (result_json) *result_json = dup(r.result_json);
  return static_cast<int>(r.status);
}

char* tnops_normalize_config(const char* command, const char* config_json) {
  char* out = nullptr;
  guarded([&] {
    need(config_json, "config");
    out = dup(tnops::normalize_config(command ? command : "", config_json));
  });
  return out;
}

}  // extern "C"
