#include "fsl/oracle.hpp"

#include <cmath>

namespace fsl {

namespace {
void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument(msg);
}
}  // namespace

std::vector<std::array<double, 2>> rosenbrock_direct_sample(std::size_t n,
                                                            RngStream& rng) {
  require(n >= 1, "rosenbrock_direct_sample: n must be >= 1");
  std::vector<std::array<double, 2>> out(n);
  const double sd2 = std::sqrt(0.5);
  for (auto& s : out) {
    const double x1 = rng.normal();
    s[0] = x1;
    s[1] = x1 * x1 + sd2 * rng.normal();
  }
  return out;
}

ModePosterior linear_gaussian_posterior(const PosteriorSpec& spec) {
  const auto* op = dynamic_cast<const ModeObservation*>(spec.problem.op.get());
  if (op == nullptr)
    throw UnsupportedOracle(
        "linear_gaussian_posterior: requires the mode_observation operator");
  if (spec.problem.extra_potential)
    throw UnsupportedOracle(
        "linear_gaussian_posterior: extra potentials are not conjugate");
  const std::size_t dim = spec.prior.dim();
  const double sigma2 = spec.problem.noise.sigma2;
  ModePosterior post;
  post.mean.resize(dim);
  post.variance.resize(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    const double prior_var = spec.prior.covariance[j];
    if (j < op->d0()) {
      if (prior_var == 0.0)
        throw UnsupportedOracle(
            "linear_gaussian_posterior: degenerate observed prior mode");
      const double v = 1.0 / (1.0 / prior_var + 1.0 / sigma2);
      post.variance[j] = v;
      post.mean[j] = v * spec.problem.y[j] / sigma2;
    } else {
      post.variance[j] = prior_var;
      post.mean[j] = spec.prior.mean[j];
    }
  }
  return post;
}

GridDensity2D::GridDensity2D(std::function<double(double, double)> log_density,
                             double x_min, double x_max, double y_min,
                             double y_max, std::size_t resolution)
    : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max),
      res_(resolution) {
  require(resolution >= 64, "GridDensity2D: resolution must be >= 64");
  require(x_max > x_min && y_max > y_min, "GridDensity2D: empty ranges");
  const std::size_t nodes = res_ + 1;
  values_.resize(nodes * nodes);
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t iy = 0; iy < nodes; ++iy)
    for (std::size_t ix = 0; ix < nodes; ++ix) {
      const double v = log_density(node_x(ix), node_y(iy));
      values_[iy * nodes + ix] = v;
      max_log = std::max(max_log, v);
    }
  require(std::isfinite(max_log), "GridDensity2D: log-density never finite");
  for (double& v : values_) v = std::exp(v - max_log);

  // Trapezoid normalization over cells.
  double total = 0.0;
  for (std::size_t cy = 0; cy < res_; ++cy)
    for (std::size_t cx = 0; cx < res_; ++cx) total += cell_mass(cx, cy);
  require(total > 0.0, "GridDensity2D: zero total mass");
  for (double& v : values_) v /= total;

  // Boundary-value check: the perimeter cells must carry a negligible
  // fraction of the mass, otherwise the domain truncates the density.
  double boundary = 0.0;
  for (std::size_t c = 0; c < res_; ++c) {
    boundary += cell_mass(c, 0) + cell_mass(c, res_ - 1);
    if (c != 0 && c != res_ - 1)
      boundary += cell_mass(0, c) + cell_mass(res_ - 1, c);
  }
  if (boundary / total > 1e-4)
    throw DomainTooSmall(
        "GridDensity2D: perimeter cells carry " + std::to_string(boundary) +
        " of the mass; enlarge the domain");
}

double GridDensity2D::node_x(std::size_t ix) const {
  return x_min_ + (x_max_ - x_min_) * static_cast<double>(ix) /
                      static_cast<double>(res_);
}

double GridDensity2D::node_y(std::size_t iy) const {
  return y_min_ + (y_max_ - y_min_) * static_cast<double>(iy) /
                      static_cast<double>(res_);
}

double GridDensity2D::cell_mass(std::size_t cx, std::size_t cy) const {
  const std::size_t nodes = res_ + 1;
  const double hx = (x_max_ - x_min_) / static_cast<double>(res_);
  const double hy = (y_max_ - y_min_) / static_cast<double>(res_);
  const double* row0 = values_.data() + cy * nodes + cx;
  const double* row1 = row0 + nodes;
  return 0.25 * hx * hy * (row0[0] + row0[1] + row1[0] + row1[1]);
}

double GridDensity2D::density_at(std::size_t ix, std::size_t iy) const {
  return values_[iy * (res_ + 1) + ix];
}

GridDensity2D::Moments GridDensity2D::moments() const {
  const std::size_t nodes = res_ + 1;
  const double hx = (x_max_ - x_min_) / static_cast<double>(res_);
  const double hy = (y_max_ - y_min_) / static_cast<double>(res_);
  double m = 0.0, mx = 0.0, my = 0.0, mxx = 0.0, myy = 0.0, mxy = 0.0;
  for (std::size_t iy = 0; iy < nodes; ++iy) {
    const double wy = (iy == 0 || iy == res_) ? 0.5 : 1.0;
    const double y = node_y(iy);
    for (std::size_t ix = 0; ix < nodes; ++ix) {
      const double wx = (ix == 0 || ix == res_) ? 0.5 : 1.0;
      const double x = node_x(ix);
      const double w = wx * wy * values_[iy * nodes + ix];
      m += w;
      mx += w * x;
      my += w * y;
      mxx += w * x * x;
      myy += w * y * y;
      mxy += w * x * y;
    }
  }
  (void)hx;
  (void)hy;
  mx /= m;
  my /= m;
  mxx /= m;
  myy /= m;
  mxy /= m;
  return Moments{mx, my, mxx - mx * mx, myy - my * my, mxy - mx * my};
}

std::vector<double> GridDensity2D::bin_masses(std::size_t bins) const {
  require(bins >= 1 && res_ % bins == 0,
          "bin_masses: bin count must divide the grid resolution");
  const std::size_t per = res_ / bins;
  std::vector<double> masses(bins * bins, 0.0);
  for (std::size_t cy = 0; cy < res_; ++cy)
    for (std::size_t cx = 0; cx < res_; ++cx)
      masses[(cy / per) * bins + (cx / per)] += cell_mass(cx, cy);
  // cell masses were normalized up to quadrature rounding; renormalize.
  double total = 0.0;
  for (double v : masses) total += v;
  for (double& v : masses) v /= total;
  return masses;
}

GridDensity2D grid_quadrature_2d(
    std::function<double(double, double)> log_density, double x_min,
    double x_max, double y_min, double y_max, std::size_t resolution) {
  return GridDensity2D(std::move(log_density), x_min, x_max, y_min, y_max,
                       resolution);
}

SampleStore reference_chain(const PosteriorSpec& spec, const ScoreModel& score,
                            double fine_gamma, std::size_t long_n,
                            std::uint64_t seed, double alpha, double tau) {
  require(long_n >= 1000000,
          "reference_chain: needs at least 1e6 iterations to count as ground "
          "truth");
  // Conservative-step precondition: a quarter of the theoretical cap, with
  // the Lipschitz constant probed empirically.
  RngStream probe_rng(seed, 0x70726f6265ULL);
  const double l_phi = estimate_lipschitz(spec, 32, 2.0, probe_rng);
  const double l_tau = score.lipschitz(tau);
  const double tr_a = trace_power(score.c(), alpha);
  const double tr_am2 = trace_power(score.c(), alpha - 2.0);
  const double l_g =
      std::sqrt(tr_am2 * l_tau * l_tau + tr_a * l_phi * l_phi);
  const double cap = max_step_size(tr_a, std::max(l_g, l_phi));
  require(fine_gamma > 0.0 && fine_gamma <= 0.25 * cap,
          "reference_chain: fine_gamma must be at most a quarter of the "
          "step-size cap");

  ChainConfig cfg;
  cfg.alpha = alpha;
  cfg.tau = tau;
  cfg.step = StepSchedule::constant(fine_gamma, long_n);
  cfg.n_iters = long_n;
  cfg.burn_in = long_n / 10;
  cfg.lag = 10;
  cfg.seed = seed;
  cfg.lipschitz_hint = std::max(l_g, l_phi);

  RngStream init_rng(seed, 0x696e6974ULL);
  const CoeffVec init = sample_gaussian(spec.prior, init_rng);
  SampleStore store = run_chain(cfg, score, spec, init);
  store.is_reference = true;
  return store;
}

}  // namespace fsl
