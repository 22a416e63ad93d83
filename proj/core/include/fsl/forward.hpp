#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fsl/spectral.hpp"

namespace fsl {

// iid Gaussian observation noise with per-component variance sigma2.
struct NoiseModel {
  double sigma2;
  explicit NoiseModel(double s2) : sigma2(s2) {
    if (!(s2 > 0.0) || !std::isfinite(s2))
      throw InvalidArgument("NoiseModel: sigma2 must be finite and > 0");
  }
};

// Measurement operator A : H -> R^N. Implementations must depend only on the
// first d0() coefficients of the input; the test suite probes that with
// finite differences on every built-in.
class MeasurementOperator {
 public:
  virtual ~MeasurementOperator() = default;
  virtual std::string name() const = 0;
  virtual std::size_t n_obs() const = 0;
  virtual std::size_t d0() const = 0;
  virtual void apply(const CoeffVec& x, std::span<double> out) const = 0;
  // Accumulates J_A(x)^T w into acc (acc must have acc.dim() >= d0()).
  virtual void add_jacobian_transpose(const CoeffVec& x,
                                      std::span<const double> w,
                                      CoeffVec& acc) const = 0;
  // Gradient of a single observation component, zero above d0().
  virtual void grad_component(std::size_t i, const CoeffVec& x,
                              CoeffVec& out) const = 0;
};

// Linear read-out of the first d0 modes, A_i(x) = x_i.
class ModeObservation final : public MeasurementOperator {
 public:
  explicit ModeObservation(std::size_t d0);
  std::string name() const override { return "mode_observation"; }
  std::size_t n_obs() const override { return d0_; }
  std::size_t d0() const override { return d0_; }
  void apply(const CoeffVec& x, std::span<double> out) const override;
  void add_jacobian_transpose(const CoeffVec& x, std::span<const double> w,
                              CoeffVec& acc) const override;
  void grad_component(std::size_t i, const CoeffVec& x,
                      CoeffVec& out) const override;

 private:
  std::size_t d0_;
};

// Componentwise nonlinear map A_i(x) = x_i^2 + 0.5 x_i on the first d0
// modes. Non-log-concave posterior; the desk-scale nonlinear benchmark.
class QuadraticMap final : public MeasurementOperator {
 public:
  explicit QuadraticMap(std::size_t d0);
  std::string name() const override { return "quadratic_map"; }
  std::size_t n_obs() const override { return d0_; }
  std::size_t d0() const override { return d0_; }
  void apply(const CoeffVec& x, std::span<double> out) const override;
  void add_jacobian_transpose(const CoeffVec& x, std::span<const double> w,
                              CoeffVec& acc) const override;
  void grad_component(std::size_t i, const CoeffVec& x,
                      CoeffVec& out) const override;

 private:
  std::size_t d0_;
};

// A(x) = x_2 - x_1^2 with a single zero observation. Combined with the
// extra -x_2^2/2 potential below and a N(0, I_2) prior, the posterior
// density is proportional to exp(-x_1^2/2 - (x_2 - x_1^2)^2).
class RosenbrockResidual final : public MeasurementOperator {
 public:
  std::string name() const override { return "rosenbrock"; }
  std::size_t n_obs() const override { return 1; }
  std::size_t d0() const override { return 2; }
  void apply(const CoeffVec& x, std::span<double> out) const override;
  void add_jacobian_transpose(const CoeffVec& x, std::span<const double> w,
                              CoeffVec& acc) const override;
  void grad_component(std::size_t i, const CoeffVec& x,
                      CoeffVec& out) const override;
};

// No observations at all; the posterior is the prior. Useful for
// prior-only sanity runs.
class ZeroOperator final : public MeasurementOperator {
 public:
  std::string name() const override { return "none"; }
  std::size_t n_obs() const override { return 0; }
  std::size_t d0() const override { return 1; }
  void apply(const CoeffVec&, std::span<double>) const override {}
  void add_jacobian_transpose(const CoeffVec&, std::span<const double>,
                              CoeffVec&) const override {}
  void grad_component(std::size_t, const CoeffVec&,
                      CoeffVec&) const override {}
};

// Measurement operator, noise model and observation vector, plus an optional
// additive potential for benchmark targets whose density is easier to state
// directly than as a Gaussian residual.
struct ForwardProblem {
  std::shared_ptr<const MeasurementOperator> op;
  NoiseModel noise;
  std::vector<double> y;
  std::function<double(const CoeffVec&)> extra_potential;  // may be empty
  std::function<void(const CoeffVec&, CoeffVec&)> extra_potential_grad;

  ForwardProblem(std::shared_ptr<const MeasurementOperator> oper,
                 NoiseModel noise_model, std::vector<double> obs);
};

ForwardProblem make_mode_observation_problem(std::size_t d0, double sigma2,
                                             std::vector<double> y);
ForwardProblem make_quadratic_problem(std::size_t d0, double sigma2,
                                      std::vector<double> y);
ForwardProblem make_rosenbrock_problem();
ForwardProblem make_prior_only_problem();

// Synthesizes an observation y = A(x_true) + noise with x_true drawn from
// the prior; returns the problem with y filled in and the draw used.
struct SynthesizedObservation {
  std::vector<double> y;
  CoeffVec x_true;
};
SynthesizedObservation synthesize_observation(const MeasurementOperator& op,
                                              const NoiseModel& noise,
                                              const GaussianMeasure& prior,
                                              std::uint64_t seed);

// Gaussian prior together with a forward problem.
struct PosteriorSpec {
  GaussianMeasure prior;
  ForwardProblem problem;

  PosteriorSpec(GaussianMeasure prior_measure, ForwardProblem fwd);
};

// A(x).
std::vector<double> apply_forward(const ForwardProblem& p, const CoeffVec& x);

// Phi_0(x) = ||y - A(x)||^2 / (2 sigma2) (+ extra potential), additive
// constant fixed to zero.
double neg_log_likelihood(const PosteriorSpec& spec, const CoeffVec& x);

// grad log rho(y - A(x)) = -grad Phi_0(x) = J_A(x)^T (y - A(x)) / sigma2,
// embedded as a coefficient vector (zero above d0).
CoeffVec grad_log_likelihood(const PosteriorSpec& spec, const CoeffVec& x);
void grad_log_likelihood_into(const PosteriorSpec& spec, const CoeffVec& x,
                              CoeffVec& out);

// Unbiased minibatch estimator: (n_obs/|subset|) * sum over the subset of
// per-component contributions. The extra potential, when present, is
// deterministic and always included in full.
CoeffVec stochastic_grad_log_likelihood(const PosteriorSpec& spec,
                                        const CoeffVec& x,
                                        std::span<const std::size_t> subset);
void stochastic_grad_log_likelihood_into(const PosteriorSpec& spec,
                                         const CoeffVec& x,
                                         std::span<const std::size_t> subset,
                                         CoeffVec& out);

// Empirical lower bound on the Lipschitz constant of grad Phi_0: max over
// probe pairs of the gradient difference ratio, probes uniform in the ball
// of the given radius.
double estimate_lipschitz(const PosteriorSpec& spec, std::size_t probes,
                          double radius, RngStream& rng);

}  // namespace fsl
