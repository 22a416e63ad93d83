#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsl::cli {

// Configuration / manifest parse error with a file:line / field-precise
// message.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sectioned key = value text, '#' comments. The grammar is documented in the
// README; manifests emitted by the runner are valid configs.
class ParsedConfig {
 public:
  static ParsedConfig parse_file(const std::string& path);
  static ParsedConfig parse_string(const std::string& text,
                                   const std::string& name);

  bool has(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const;

  std::string get_string(const std::string& section, const std::string& key,
                         std::optional<std::string> fallback = {}) const;
  double get_double(const std::string& section, const std::string& key,
                    std::optional<double> fallback = {}) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::optional<std::uint64_t> fallback = {}) const;
  bool get_onoff(const std::string& section, const std::string& key,
                 bool fallback) const;
  std::vector<double> get_double_list(const std::string& section,
                                      const std::string& key) const;

  // Rejects unknown keys in a section (typo guard).
  void check_keys(const std::string& section,
                  const std::vector<std::string>& allowed) const;
  void check_sections(const std::vector<std::string>& allowed) const;

  [[noreturn]] void fail(const std::string& section, const std::string& key,
                         const std::string& msg) const;

  const std::string& name() const { return name_; }

 private:
  struct Value {
    std::string text;
    int line = 0;
  };
  std::string name_;
  std::map<std::string, std::map<std::string, Value>> sections_;
  std::map<std::string, int> section_lines_;
};

// Everything the experiment runner needs, fully resolved and validated.
struct ExperimentConfig {
  // problem
  std::string problem;  // mode_observation | quadratic_map | rosenbrock | none
  std::size_t d0 = 1;
  double sigma2 = 1.0;
  std::vector<double> observation;  // resolved y
  std::optional<std::uint64_t> synthesize_seed;

  // prior
  std::string prior_law;  // power | constant
  double prior_s = 2.0;
  double prior_scale = 1.0;
  std::size_t dim = 2;

  // score
  std::string score_kind;  // exact | perturbed
  std::string score_law;   // defaults to prior law
  double score_s = 2.0;
  double score_scale = 1.0;
  double tau = 1e-4;
  double epsilon = 0.0;
  double omega = 1.0;

  // sampler
  double alpha = 1.0;
  std::string schedule;  // constant | geometric | polynomial
  double gamma = 1e-3;
  double gamma_start = 0.0;
  double gamma_end = 0.0;
  double exponent = 0.55;
  std::size_t n_iters = 1000;
  std::size_t burn_in = 0;
  std::size_t lag = 1;
  std::uint64_t seed = 0;
  std::size_t chains = 1;
  std::string init;  // prior | zero
  bool annealing = false;
  double eta_start = 1.0;
  double tau_start = 0.0;
  double tau_end = 0.0;
  std::size_t n_anneal = 0;
  std::size_t stochastic_batch = 0;
  double divergence_ceiling = 1e8;
  double lipschitz_hint = 0.0;

  // diagnostics
  bool oracle_compare = true;
  bool grid_kl_on = false;
  double grid_x_min = -4.0, grid_x_max = 4.0;
  double grid_y_min = -3.0, grid_y_max = 12.0;
  std::size_t grid_resolution = 512;
  std::size_t kl_bins = 32;
  bool bound_on = true;
  std::size_t mismatch_probes = 16;
  std::optional<double> kl0_override;

  // output
  std::string output_directory = "out";
  bool checkpoints = false;

  static ExperimentConfig load(const ParsedConfig& cfg);

  // Serializes the fully resolved state back to the config grammar;
  // re-running the result reproduces the run bit-exactly.
  std::string to_manifest(std::size_t threads) const;
};

}  // namespace fsl::cli
