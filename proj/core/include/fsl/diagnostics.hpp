#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fsl/oracle.hpp"
#include "fsl/sampler.hpp"

namespace fsl {

// Per-mode sample mean and unbiased variance with batch-means standard
// errors. Batch means are computed within chains, so merged multi-chain
// stores get honest errors too; the batch structure absorbs autocorrelation
// that a naive iid error would miss.
struct ModeStats {
  double mean = 0.0;
  double variance = 0.0;
  double se_mean = 0.0;
  double se_variance = 0.0;
};

struct MomentSummary {
  std::vector<ModeStats> modes;
  // Leading cross-covariance (modes 1 and 2) when dim >= 2.
  double cov12 = 0.0;
  double se_cov12 = 0.0;
  std::size_t n_samples = 0;
  std::size_t n_batches = 0;
};

MomentSummary moments(const SampleStore& store);

// Empirical KL between the 2D histogram of the first two modes and the
// truth integrated per bin. Add-one smoothing is applied to both the actual
// and the truth-expected counts before normalization, so disjoint support
// yields a large finite value, never infinity. Samples outside the truth
// domain are clamped into the edge bins.
struct KlEstimate {
  double value = 0.0;
  double bootstrap_se = 0.0;
  bool under_resolved = false;  // bins^2 > n/10
  std::size_t bins = 0;
};

KlEstimate grid_kl(const SampleStore& store, const GridDensity2D& truth,
                   std::size_t bins, std::size_t bootstrap_rounds = 100,
                   std::uint64_t bootstrap_seed = 0);

// Diagonal Gaussian summary (per-mode mean and variance).
struct DiagonalGaussian {
  std::vector<double> mean;
  std::vector<double> variance;
};

DiagonalGaussian fit_diagonal_gaussian(const SampleStore& store);

// Closed form of the operator-weighted relative Fisher criterion
// int ||C^{alpha/2} grad log(d nu / d mu)||^2 d nu for diagonal Gaussians:
//   sum_j lambda_j^alpha [ (m1_j - m2_j)^2 / v2_j^2
//                          + (1/v2_j - 1/v1_j)^2 v1_j ].
double gaussian_relative_fisher(const DiagonalGaussian& nu,
                                const DiagonalGaussian& mu,
                                const SpectralOperator& c, double alpha);

// Inputs of the convergence-bound evaluator. `lipschitz` is the max of the
// combined drift constant and the likelihood constant; `mismatch_k` is the
// mismatch constant, user-supplied or probe-estimated.
struct BoundParams {
  double kl0 = 0.0;
  double n_iters = 0.0;
  double gamma = 0.0;
  double trace_c_alpha = 0.0;
  double trace_c_alpha_minus_2 = 0.0;
  double lipschitz = 0.0;
  double mismatch_k = 0.0;
  double tau = 0.0;
  double eps_tau = 0.0;
};

// The four right-hand-side terms:
//   4 KL0/(N gamma)
//   + ((16 sqrt(Tr) + 64) Tr L^2) gamma
//   + (4/Tr + 16) K^2 tau^2
//   + (4/Tr + 16) Tr(C^{alpha-2}) eps^2.
struct BoundDecomposition {
  double kl_term = 0.0;
  double discretization_term = 0.0;
  double mismatch_term = 0.0;
  double approximation_term = 0.0;
  double total = 0.0;
  bool step_size_valid = true;  // gamma within the theoretical cap
  double step_cap = 0.0;
};

BoundDecomposition theorem1_bound(const BoundParams& p);

// Least-squares slope of log(value) against log(x) with its standard error.
struct LogLogFit {
  double slope = 0.0;
  double se_slope = 0.0;
  double intercept = 0.0;
};

LogLogFit fit_loglog(std::span<const std::pair<double, double>> points);

// Convergence-rate regression: slope of log(error) vs log(N).
inline LogLogFit rate_fit(std::span<const std::pair<double, double>> points) {
  return fit_loglog(points);
}

// Probe estimate of the mismatch constant: max over probes of
// ||score_mismatch(tau, x)||_H / tau.
double estimate_mismatch_constant(const SpectralOperator& c,
                                  const SpectralOperator& c_mu0,
                                  std::span<const CoeffVec> probes, double tau);

// Dimension-refinement stability: the same experiment run at increasing
// truncations must produce statistically indistinguishable error metrics.
struct DimensionPoint {
  std::size_t dim = 0;
  double metric = 0.0;
  double se = 0.0;
};

struct StabilityVerdict {
  std::vector<DimensionPoint> points;
  double spread = 0.0;        // max - min of the metric
  double pooled_error = 0.0;  // sqrt(2 * mean(se^2))
  bool stable = false;        // spread <= 2 * pooled_error
};

StabilityVerdict assess_dimension_stability(
    std::span<const DimensionPoint> points);

StabilityVerdict dimension_sweep(
    const std::function<DimensionPoint(std::size_t)>& experiment,
    std::span<const std::size_t> dims);

// Ordered key/value tree that serializes to an indented text document.
// The CLI converts the same tree to JSON and CSV tables.
class Report {
 public:
  using Value = std::variant<double, std::uint64_t, std::string>;

  Report& section(const std::string& name);
  void set(const std::string& key, double v);
  void set(const std::string& key, std::uint64_t v);
  void set(const std::string& key, const std::string& v);
  void set(const std::string& key, const char* v);

  const std::vector<std::pair<std::string, Value>>& values() const {
    return values_;
  }
  const std::vector<std::pair<std::string, Report>>& sections() const {
    return sections_;
  }

  std::string to_text() const;

 private:
  void render(std::string& out, int depth) const;
  std::vector<std::pair<std::string, Value>> values_;
  std::vector<std::pair<std::string, Report>> sections_;
};

}  // namespace fsl
