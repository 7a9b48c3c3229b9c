#ifndef TNOPS_C_H
#define TNOPS_C_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  TNOPS_OK = 0,
  TNOPS_ERR_DIMENSION = 1,
  TNOPS_ERR_ARGUMENT = 2,
  TNOPS_ERR_NUMERIC = 3,
  TNOPS_ERR_CONVERGENCE = 4,
  TNOPS_ERR_CONFIG = 5,
  TNOPS_ERR_SIZE_GUARD = 6,
  TNOPS_ERR_AMBIGUITY = 7,
  TNOPS_ERR_UNSUPPORTED = 8,
  TNOPS_ERR_IO = 9,
  TNOPS_ERR_INTERNAL = 10
} tnops_status;

typedef struct tnops_mpo tnops_mpo;
typedef struct tnops_mps tnops_mps;

const char* tnops_version(void);
/* Message of the last failed call on this thread; empty after a success. */
const char* tnops_last_error(void);
void tnops_string_free(char* s);

/* hamiltonian_json follows the HamiltonianSpec schema. */
tnops_status tnops_mpo_build(const char* hamiltonian_json, tnops_mpo** out);
tnops_status tnops_mpo_load(const char* path, tnops_mpo** out);
tnops_status tnops_mpo_save(const tnops_mpo* m, const char* path, uint64_t seed);
void tnops_mpo_free(tnops_mpo* m);
size_t tnops_mpo_size(const tnops_mpo* m);
size_t tnops_mpo_max_bond(const tnops_mpo* m);
/* Writes min(cap, N-1) interior bonds; returns N-1. */
size_t tnops_mpo_bonds(const tnops_mpo* m, size_t* bonds, size_t cap);
/* Row-major interleaved (re, im) dense matrix; buf holds 2 * d^(2N) doubles. */
tnops_status tnops_mpo_to_dense(const tnops_mpo* m, double* buf, size_t buf_len);
tnops_status tnops_mpo_compress(const tnops_mpo* m, size_t target_d, uint64_t seed, tnops_mpo** out,
                                double* distance);

tnops_status tnops_ground_state(const tnops_mpo* h, size_t chi, uint64_t seed, tnops_mps** out, double* energy);
tnops_status tnops_mps_load(const char* path, tnops_mps** out);
tnops_status tnops_mps_save(const tnops_mps* s, const char* path, uint64_t seed);
void tnops_mps_free(tnops_mps* s);
size_t tnops_mps_size(const tnops_mps* s);
size_t tnops_mps_max_bond(const tnops_mps* s);
tnops_status tnops_mps_energy(const tnops_mps* s, const tnops_mpo* h, double* energy);

/* Runs a CLI job. The return value is the job exit code (0, 1, 2, 3, 4).
   summary and result_json (either may be NULL) receive strings released with tnops_string_free. */
int tnops_run_job(const char* command, const char* config_json, const char* out_dir, int has_seed, uint64_t seed,
                  unsigned workers, int verbose, char** summary, char** result_json);
/* Canonical config text; NULL on error. */
char* tnops_normalize_config(const char* command, const char* config_json);

#ifdef __cplusplus
}
#endif

#endif
