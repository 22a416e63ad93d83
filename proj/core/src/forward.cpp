#include "fsl/forward.hpp"

#include <cmath>

namespace fsl {

namespace {
void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument(msg);
}
}  // namespace

ModeObservation::ModeObservation(std::size_t d0) : d0_(d0) {
  require(d0 >= 1, "ModeObservation: d0 must be >= 1");
}

void ModeObservation::apply(const CoeffVec& x, std::span<double> out) const {
  for (std::size_t i = 0; i < d0_; ++i) out[i] = x[i];
}

void ModeObservation::add_jacobian_transpose(const CoeffVec&,
                                             std::span<const double> w,
                                             CoeffVec& acc) const {
  for (std::size_t i = 0; i < d0_; ++i) acc[i] += w[i];
}

void ModeObservation::grad_component(std::size_t i, const CoeffVec&,
                                     CoeffVec& out) const {
  for (std::size_t j = 0; j < out.dim(); ++j) out[j] = 0.0;
  out[i] = 1.0;
}

QuadraticMap::QuadraticMap(std::size_t d0) : d0_(d0) {
  require(d0 >= 1, "QuadraticMap: d0 must be >= 1");
}

void QuadraticMap::apply(const CoeffVec& x, std::span<double> out) const {
  for (std::size_t i = 0; i < d0_; ++i) out[i] = x[i] * x[i] + 0.5 * x[i];
}

void QuadraticMap::add_jacobian_transpose(const CoeffVec& x,
                                          std::span<const double> w,
                                          CoeffVec& acc) const {
  for (std::size_t i = 0; i < d0_; ++i) acc[i] += (2.0 * x[i] + 0.5) * w[i];
}

void QuadraticMap::grad_component(std::size_t i, const CoeffVec& x,
                                  CoeffVec& out) const {
  for (std::size_t j = 0; j < out.dim(); ++j) out[j] = 0.0;
  out[i] = 2.0 * x[i] + 0.5;
}

void RosenbrockResidual::apply(const CoeffVec& x, std::span<double> out) const {
  out[0] = x[1] - x[0] * x[0];
}

void RosenbrockResidual::add_jacobian_transpose(const CoeffVec& x,
                                                std::span<const double> w,
                                                CoeffVec& acc) const {
  acc[0] += -2.0 * x[0] * w[0];
  acc[1] += w[0];
}

void RosenbrockResidual::grad_component(std::size_t, const CoeffVec& x,
                                        CoeffVec& out) const {
  for (std::size_t j = 0; j < out.dim(); ++j) out[j] = 0.0;
  out[0] = -2.0 * x[0];
  out[1] = 1.0;
}

ForwardProblem::ForwardProblem(std::shared_ptr<const MeasurementOperator> oper,
                               NoiseModel noise_model, std::vector<double> obs)
    : op(std::move(oper)), noise(noise_model), y(std::move(obs)) {
  require(op != nullptr, "ForwardProblem: null operator");
  require(y.size() == op->n_obs(),
          "ForwardProblem: observation length does not match n_obs");
  for (double v : y)
    require(std::isfinite(v), "ForwardProblem: observation must be finite");
}

ForwardProblem make_mode_observation_problem(std::size_t d0, double sigma2,
                                             std::vector<double> y) {
  return ForwardProblem(std::make_shared<ModeObservation>(d0),
                        NoiseModel(sigma2), std::move(y));
}

ForwardProblem make_quadratic_problem(std::size_t d0, double sigma2,
                                      std::vector<double> y) {
  return ForwardProblem(std::make_shared<QuadraticMap>(d0), NoiseModel(sigma2),
                        std::move(y));
}

ForwardProblem make_rosenbrock_problem() {
  // Phi_0(x) = (x_2 - x_1^2)^2 - x_2^2/2: Gaussian residual with y = 0,
  // sigma2 = 1/2, plus the -x_2^2/2 correction that cancels the prior's
  // pull on x_2.
  ForwardProblem p(std::make_shared<RosenbrockResidual>(), NoiseModel(0.5),
                   {0.0});
  p.extra_potential = [](const CoeffVec& x) { return -0.5 * x[1] * x[1]; };
  p.extra_potential_grad = [](const CoeffVec& x, CoeffVec& g) {
    g[1] += -x[1];
  };
  return p;
}

ForwardProblem make_prior_only_problem() {
  return ForwardProblem(std::make_shared<ZeroOperator>(), NoiseModel(1.0), {});
}

SynthesizedObservation synthesize_observation(const MeasurementOperator& op,
                                              const NoiseModel& noise,
                                              const GaussianMeasure& prior,
                                              std::uint64_t seed) {
  // Two fixed substreams: one for the ground-truth draw, one for the
  // observation noise. Coefficients draw per-mode in order, so the same seed
  // produces the same truth (and hence the same y) at any truncation >= d0.
  RngStream truth_stream(seed, 0x7472757468ULL);
  SynthesizedObservation out;
  out.x_true = sample_gaussian(prior, truth_stream);
  out.y.resize(op.n_obs());
  op.apply(out.x_true, out.y);
  RngStream noise_stream(seed, 0x6f6273ULL);
  const double sd = std::sqrt(noise.sigma2);
  for (double& v : out.y) v += sd * noise_stream.normal();
  return out;
}

PosteriorSpec::PosteriorSpec(GaussianMeasure prior_measure, ForwardProblem fwd)
    : prior(std::move(prior_measure)), problem(std::move(fwd)) {
  require(prior.dim() >= problem.op->d0(),
          "PosteriorSpec: prior dimension smaller than the operator's d0");
}

std::vector<double> apply_forward(const ForwardProblem& p, const CoeffVec& x) {
  require(x.dim() >= p.op->d0(),
          "apply_forward: input dimension smaller than the operator's d0");
  std::vector<double> out(p.op->n_obs());
  p.op->apply(x, out);
  return out;
}

double neg_log_likelihood(const PosteriorSpec& spec, const CoeffVec& x) {
  const auto& p = spec.problem;
  std::vector<double> ax(p.op->n_obs());
  p.op->apply(x, ax);
  double ss = 0.0;
  for (std::size_t i = 0; i < ax.size(); ++i) {
    const double r = p.y[i] - ax[i];
    ss += r * r;
  }
  double phi = ss / (2.0 * p.noise.sigma2);
  if (p.extra_potential) phi += p.extra_potential(x);
  return phi;
}

void grad_log_likelihood_into(const PosteriorSpec& spec, const CoeffVec& x,
                              CoeffVec& out) {
  const auto& p = spec.problem;
  if (out.dim() != x.dim()) out = CoeffVec(x.dim());
  for (std::size_t j = 0; j < out.dim(); ++j) out[j] = 0.0;
  std::vector<double> w(p.op->n_obs());
  p.op->apply(x, w);
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = (p.y[i] - w[i]) / p.noise.sigma2;  // residual / sigma2
  p.op->add_jacobian_transpose(x, w, out);
  if (p.extra_potential_grad) {
    // grad log-likelihood = -grad Phi_0, so the potential gradient enters
    // with a sign flip.
    CoeffVec extra(x.dim());
    p.extra_potential_grad(x, extra);
    for (std::size_t j = 0; j < out.dim(); ++j) out[j] -= extra[j];
  }
}

CoeffVec grad_log_likelihood(const PosteriorSpec& spec, const CoeffVec& x) {
  CoeffVec out(x.dim());
  grad_log_likelihood_into(spec, x, out);
  return out;
}

void stochastic_grad_log_likelihood_into(const PosteriorSpec& spec,
                                         const CoeffVec& x,
                                         std::span<const std::size_t> subset,
                                         CoeffVec& out) {
  const auto& p = spec.problem;
  require(!subset.empty(),
          "stochastic_grad_log_likelihood: subset must be nonempty");
  for (std::size_t i : subset)
    require(i < p.op->n_obs(),
            "stochastic_grad_log_likelihood: index out of range");
  if (out.dim() != x.dim()) out = CoeffVec(x.dim());
  for (std::size_t j = 0; j < out.dim(); ++j) out[j] = 0.0;
  std::vector<double> ax(p.op->n_obs());
  p.op->apply(x, ax);
  const double scale =
      static_cast<double>(p.op->n_obs()) / static_cast<double>(subset.size());
  CoeffVec g(x.dim());
  for (std::size_t i : subset) {
    p.op->grad_component(i, x, g);
    const double w = scale * (p.y[i] - ax[i]) / p.noise.sigma2;
    for (std::size_t j = 0; j < x.dim(); ++j) out[j] += w * g[j];
  }
  if (p.extra_potential_grad) {
    CoeffVec extra(x.dim());
    p.extra_potential_grad(x, extra);
    for (std::size_t j = 0; j < out.dim(); ++j) out[j] -= extra[j];
  }
}

CoeffVec stochastic_grad_log_likelihood(const PosteriorSpec& spec,
                                        const CoeffVec& x,
                                        std::span<const std::size_t> subset) {
  CoeffVec out(x.dim());
  stochastic_grad_log_likelihood_into(spec, x, subset, out);
  return out;
}

double estimate_lipschitz(const PosteriorSpec& spec, std::size_t probes,
                          double radius, RngStream& rng) {
  require(probes >= 2, "estimate_lipschitz: need at least 2 probes");
  require(radius > 0.0, "estimate_lipschitz: radius must be positive");
  const std::size_t dim = spec.prior.dim();
  std::vector<CoeffVec> xs;
  std::vector<CoeffVec> gs;
  xs.reserve(probes);
  gs.reserve(probes);
  for (std::size_t i = 0; i < probes; ++i) {
    CoeffVec x(dim);
    for (std::size_t j = 0; j < dim; ++j)
      x[j] = radius * (2.0 * rng.uniform() - 1.0);
    // grad Phi_0 = -grad log-likelihood
    gs.push_back(-1.0 * grad_log_likelihood(spec, x));
    xs.push_back(std::move(x));
  }
  double best = 0.0;
  for (std::size_t a = 0; a < probes; ++a) {
    for (std::size_t b = a + 1; b < probes; ++b) {
      const double dx = (xs[a] - xs[b]).norm();
      if (dx == 0.0) continue;
      best = std::max(best, (gs[a] - gs[b]).norm() / dx);
    }
  }
  return best;
}

}  // namespace fsl
