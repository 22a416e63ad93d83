#pragma once

#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "fsl/diagnostics.hpp"
#include "fsl/oracle.hpp"

namespace fsl::cli {

std::uint64_t derive_run_seed(std::uint64_t master, std::size_t run_index);

// Fully constructed experiment: posterior spec, score model, chain template
// and the resolved config (observation filled in when synthesized).
struct BuiltExperiment {
  ExperimentConfig resolved;
  PosteriorSpec spec;
  ScoreModel score;
  ChainConfig chain_proto;
  std::optional<CoeffVec> x_true;
};

BuiltExperiment build_experiment(const ExperimentConfig& cfg);

struct DivergenceInfo {
  std::uint64_t chain = 0;
  std::size_t iteration = 0;
  std::string message;
};

struct RunOutcome {
  std::vector<SampleStore> chains;  // completed and partial stores, in order
  std::optional<SampleStore> merged;
  std::vector<DivergenceInfo> divergences;
  Report report;
  // Headline error metric: fisher criterion against the conjugate oracle
  // when available, otherwise the grid KL when enabled.
  std::optional<double> metric;
  std::optional<double> metric_se;
  BoundDecomposition bound;
  bool bound_available = false;
};

// Runs all chains (concurrently up to `threads`) and assembles diagnostics.
RunOutcome run_experiment(const BuiltExperiment& exp, std::size_t threads);

// Output files: samples.csv, moments.csv, report.txt, summary.json,
// manifest.cfg, optional chain checkpoints.
void write_outputs(const RunOutcome& outcome, const BuiltExperiment& exp,
                   const std::string& out_dir, std::size_t threads);

// 1D orthonormal basis evaluation of a coefficient row on a uniform grid.
std::vector<double> render_field(std::span<const double> coeffs,
                                 const std::string& basis,
                                 std::size_t grid_points);

// Subcommand entry points; return process exit codes (0 ok, 1 config/usage
// error, 2 chain divergence, 3 internal error).
int cmd_run(const std::string& config_path);
int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::vector<double>& values);
int cmd_bound(const std::string& params_path);
int cmd_render(const std::string& samples_csv, std::size_t row,
               const std::string& basis, std::size_t points,
               const std::string& output_path);

}  // namespace fsl::cli
