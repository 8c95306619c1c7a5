#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccgldpc/density_evolution.hpp"
#include "ccgldpc/ensemble.hpp"

namespace ccgldpc {

enum class Analysis {
  kBpThreshold,
  kMapThreshold,
  kExitCurve,
  kDminCurve,
  kWeightSpectrum,
  kTransferGrid,
};

Analysis parse_analysis(const std::string& name);
std::string analysis_name(Analysis a);

struct JobCell {
  EnsembleSpec spec;
  Analysis analysis = Analysis::kBpThreshold;
  std::vector<int> block_sections;  // dmin/wenum N values for this cell
};

struct JobConfig {
  std::vector<JobCell> cells;
  double resolution = 1e-5;      // bisection width for BP thresholds
  double map_resolution = 2e-4;  // grid-halving stability for MAP
  DEConfig de;
  double alpha = 0.5;
  int cap = 0;  // spectrum truncation, 0 = automatic
  bool structured_bcc = false;
  std::vector<double> transfer_grid = {0.25, 0.5, 0.75};
  long mc_sections = 0;  // adds sampled transfer columns when positive
  std::string output;    // artifact path, empty = no file
  std::string format = "csv";
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = CCGLDPC_WORKERS env or 1
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// strict parse: unknown keys anywhere are rejected; every spec is
// validated before the job may start
JobConfig parse_job_config(const std::string& json_text);

// FNV-1a over the canonical config serialization; execution-only fields
// (output path, worker count) do not participate
std::uint64_t config_hash(const JobConfig& cfg);

struct CellLog {
  std::string summary;
  double seconds = 0.0;
  bool failed = false;
};

struct JobResult {
  int exit_code = 0;  // 0 ok, 1 cell errors (artifact still written)
  std::string artifact;
  std::vector<CellLog> logs;
};

// runs every cell on a bounded worker pool and assembles the artifact
// with its provenance block; writes cfg.output when set
JobResult run_job(const JobConfig& cfg);

}  // namespace ccgldpc
