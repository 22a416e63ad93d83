#pragma once

#include <array>
#include <functional>
#include <vector>

#include "fsl/forward.hpp"
#include "fsl/sampler.hpp"

namespace fsl {

// Exact iid draws from p(x1, x2) proportional to exp(-x1^2/2 - (x2-x1^2)^2):
// x1 ~ N(0,1), x2 | x1 ~ N(x1^2, 1/2). Analytic moments: mean (0, 1),
// variances (1, 5/2), covariance 0.
std::vector<std::array<double, 2>> rosenbrock_direct_sample(std::size_t n,
                                                            RngStream& rng);

// Closed-form per-mode posterior for the linear mode read-out with iid
// Gaussian noise: observed modes are conjugate Gaussian, the rest keep the
// prior. Rejects any other problem.
struct ModePosterior {
  std::vector<double> mean;
  std::vector<double> variance;
};
ModePosterior linear_gaussian_posterior(const PosteriorSpec& spec);

// Normalized 2D density tabulated on a uniform cell grid, with trapezoid
// quadrature for the normalizer, moments and per-bin masses. Construction
// rejects grids whose perimeter cells carry more than 1e-4 of the mass.
class GridDensity2D {
 public:
  GridDensity2D(std::function<double(double, double)> log_density,
                double x_min, double x_max, double y_min, double y_max,
                std::size_t resolution);

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double y_min() const { return y_min_; }
  double y_max() const { return y_max_; }
  std::size_t resolution() const { return res_; }

  struct Moments {
    double mean_x, mean_y, var_x, var_y, cov;
  };
  Moments moments() const;

  // Probability masses of a bins x bins partition of the domain; bins must
  // divide the resolution.
  std::vector<double> bin_masses(std::size_t bins) const;

  // Normalized density at a node.
  double density_at(std::size_t ix, std::size_t iy) const;

 private:
  double node_x(std::size_t ix) const;
  double node_y(std::size_t iy) const;
  double cell_mass(std::size_t cx, std::size_t cy) const;

  double x_min_, x_max_, y_min_, y_max_;
  std::size_t res_;             // cells per axis; res_+1 nodes
  std::vector<double> values_;  // normalized density on nodes, row-major
};

GridDensity2D grid_quadrature_2d(std::function<double(double, double)> log_density,
                                 double x_min, double x_max, double y_min,
                                 double y_max, std::size_t resolution);

// Ground truth for nonlinear problems without closed forms: the sampler's
// own chain at conservative settings (fine step far below the theoretical
// cap, long run). Trust chain: validated against the conjugate oracle on
// linear problems before being used on nonlinear ones.
SampleStore reference_chain(const PosteriorSpec& spec, const ScoreModel& score,
                            double fine_gamma, std::size_t long_n,
                            std::uint64_t seed, double alpha = 1.0,
                            double tau = 1e-4);

}  // namespace fsl
