#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace tnops {

// Exit status of a job; matches the CLI exit codes.
enum class JobStatus : int {
  Ok = 0,
  Failed = 1,
  Config = 2,       // bad config, arguments, missing files
  NotConverged = 3, // results were still written and flagged
  SizeGuard = 4,
};

struct JobOptions {
  std::string command;
  std::string config_json = "{}";
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the config's seed
  unsigned workers = 1;
  bool verbose = false;
  std::function<void(const std::string&)> log;  // progress lines; stdout summary goes to result
};

struct JobResult {
  JobStatus status = JobStatus::Ok;
  std::string summary;  // human-readable lines
  std::string result_json;
  std::string error;
};

// Commands: build, compress, truncation-study, ground, evolve, probe-power, rank-check,
// peps-build, peps-expect, selftest. Never throws.
JobResult run_job(const JobOptions& opt);

// Canonical form of a job config: every field the command reads, with defaults filled in.
std::string normalize_config(const std::string& command, const std::string& config_json);

}  // namespace tnops
