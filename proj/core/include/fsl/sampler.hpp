#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "fsl/forward.hpp"
#include "fsl/score.hpp"
#include "fsl/spectral.hpp"

namespace fsl {

// Step-size sequence gamma_k, k = 0..n-1. All kinds are nonincreasing and
// hit the requested endpoints exactly.
class StepSchedule {
 public:
  enum class Kind { constant, geometric_decay, polynomial_decay };

  static StepSchedule constant(double gamma, std::size_t n);
  static StepSchedule geometric(double start, double end, std::size_t n);
  // gamma_k = a (b + k)^(-exponent) with a, b solved from the endpoints.
  static StepSchedule polynomial(double start, double end, double exponent,
                                 std::size_t n);

  double at(std::size_t k) const;
  double max_value() const { return start_; }
  Kind kind() const { return kind_; }
  double start() const { return start_; }
  double end() const { return end_; }
  double exponent() const { return exponent_; }
  std::size_t length() const { return n_; }

 private:
  StepSchedule() = default;
  Kind kind_ = Kind::constant;
  double start_ = 0.0, end_ = 0.0, exponent_ = 0.0;
  double poly_a_ = 0.0, poly_b_ = 0.0;
  std::size_t n_ = 0;
};

// Weighted annealing: the score term is multiplied by eta_k and evaluated at
// tau_k, both decaying geometrically over n_anneal steps and holding at
// (1, tau_end) afterwards.
class AnnealingSchedule {
 public:
  static AnnealingSchedule make(double eta_start, double tau_start,
                                double tau_end, std::size_t n_anneal);
  double eta_at(std::size_t k) const;
  double tau_at(std::size_t k) const;
  double eta_start() const { return eta_start_; }
  double tau_start() const { return tau_start_; }
  double tau_end() const { return tau_end_; }
  std::size_t n_anneal() const { return n_anneal_; }

 private:
  double eta_start_ = 1.0, tau_start_ = 0.0, tau_end_ = 0.0;
  std::size_t n_anneal_ = 0;
};

struct ChainConfig {
  double alpha = 1.0;           // operator-power exponent
  StepSchedule step = StepSchedule::constant(1e-3, 1);
  std::optional<AnnealingSchedule> annealing;
  double tau = 1e-4;            // diffusion time when not annealing
  std::size_t n_iters = 1;
  std::size_t burn_in = 0;
  std::size_t lag = 1;
  std::uint64_t seed = 0;
  std::uint64_t chain_index = 0;
  std::size_t stochastic_batch = 0;  // 0 = full-batch gradient
  double divergence_ceiling = 1e8;
  double lipschitz_hint = 0.0;  // 0 = probe-estimate for the step-size cap
  // Test-only hook: drops the noise term so single steps are deterministic.
  // Not reachable from the CLI.
  bool suppress_noise = false;

  void validate() const;
  double eta_at(std::size_t k) const;
  double tau_at(std::size_t k) const;
};

struct ChainState {
  CoeffVec x;
  std::size_t k = 0;
};

struct RunWarnings {
  bool step_cap_exceeded = false;
  double step_cap = 0.0;       // 1/(sqrt(128) Tr(C^alpha) L)
  double max_gamma = 0.0;
  double lipschitz_used = 0.0;
};

// Post-burn-in, thinned iterates of one chain (or several merged ones),
// together with everything needed to reproduce the run.
struct SampleStore {
  std::vector<CoeffVec> samples;
  std::vector<std::size_t> iteration;   // iterate index of each sample
  std::vector<std::size_t> chain_offsets{0};  // sample index where each chain starts
  std::vector<std::uint64_t> chain_indices{0};
  std::size_t dim = 0;
  ChainConfig config;
  CoeffVec init;
  RunWarnings warnings;
  bool is_reference = false;

  std::size_t size() const { return samples.size(); }
};

SampleStore merge_stores(std::vector<SampleStore> stores);

// One update of the recursion
//   X_{k+1} = X_k + gamma_k (C^{alpha-1} eta_k S_theta(tau_k, X_k)
//                            + C^alpha grad log rho(y - A(X_k)))
//           + sqrt(2 gamma_k) xi,   xi_j ~ N(0, lambda_j^alpha).
ChainState step(const ChainState& state, const ChainConfig& cfg,
                const ScoreModel& score, const PosteriorSpec& spec);

// Runs n_iters steps from init and records every lag-th iterate after
// burn_in. Fully deterministic given (seed, chain_index); bit-identical to
// repeated step() calls.
SampleStore run_chain(const ChainConfig& cfg, const ScoreModel& score,
                      const PosteriorSpec& spec, const CoeffVec& init);

// Theoretical step-size cap 1/(sqrt(128) Tr(C^alpha) L). run_chain warns
// (never aborts) when the schedule exceeds it: the stylized benchmarks
// deliberately run far above the cap.
double max_step_size(double trace_c_alpha, double lipschitz);

// Text checkpoint of (iteration, state); coefficients are stored as hex
// floats so resume is bit-exact.
struct Checkpoint {
  std::size_t iteration = 0;
  CoeffVec x;
  std::uint64_t seed = 0;
  std::uint64_t chain_index = 0;
};

void write_checkpoint(std::ostream& os, const Checkpoint& cp);
Checkpoint read_checkpoint(std::istream& is);

// Resumes a run from a checkpoint; the concatenation of the two segments is
// bit-identical to an uninterrupted run with the same config.
SampleStore run_chain_from(const Checkpoint& cp, const ChainConfig& cfg,
                           const ScoreModel& score, const PosteriorSpec& spec);

}  // namespace fsl
