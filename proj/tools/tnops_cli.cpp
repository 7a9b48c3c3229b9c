// Command-line front end. Talks to the library only through the C API.
#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "tnops/tnops_c.h"

namespace {

unsigned default_workers() {
  if (const char* e = std::getenv("TNOPS_WORKERS")) {
    try {
      const long v = std::stol(e);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix product operator toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tnops_version());

  std::string config_path, out_dir = ".";
  std::uint64_t seed = 0;
  unsigned workers = default_workers();
  bool verbose = false;

  const char* commands[][2] = {
      {"build", "Build an MPO from a Hamiltonian spec"},
      {"compress", "Variationally compress an MPO"},
      {"truncation-study", "Errors versus compressed bond dimension (CSV)"},
      {"ground", "Variational ground state"},
      {"evolve", "Real-time evolution with a Taylor or Trotter step operator"},
      {"probe-power", "Exact bond dimensions of powers of H"},
      {"rank-check", "Operator Schmidt ranks versus bond dimensions"},
      {"peps-build", "Build a 2D PEPO and report its bonds"},
      {"peps-expect", "PEPS expectation values by boundary contraction"},
      {"selftest", "Dense-oracle invariant suite"},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c[0], c[1]);
    sub->add_option("--config", config_path, "JSON job config")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Top-level seed (overrides the config)");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--workers", workers, "Worker threads (env TNOPS_WORKERS)")->check(CLI::PositiveNumber);
    sub->add_flag("--verbose", verbose, "Progress on stderr");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::string config = "{}";
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    config = ss.str();
  } else if (sub->get_name() != "selftest") {
    std::cerr << "error: --config is required for " << sub->get_name() << "\n";
    return 2;
  }
  const bool has_seed = sub->count("--seed") > 0;

  char* summary = nullptr;
  char* result = nullptr;
  const int rc = tnops_run_job(sub->get_name().c_str(), config.c_str(), out_dir.c_str(), has_seed ? 1 : 0, seed, workers,
                               verbose ? 1 : 0, &summary, &result);
  if (summary) std::cout << summary;
  if (rc != 0 && *tnops_last_error()) std::cerr << "error: " << tnops_last_error() << "\n";
  if (rc == 3) std::cerr << "warning: not converged; results written and flagged\n";
  tnops_string_free(summary);
  tnops_string_free(result);
  return rc;
}
