#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fsl/errors.hpp"
#include "fsl/rng.hpp"

namespace fsl {

// An element of the Hilbert space represented by its coefficients in the
// shared eigenbasis, truncated at dimension D. All computation in this
// library happens in coefficient space; basis functions are only ever
// materialized by the field renderer in the CLI.
class CoeffVec {
 public:
  CoeffVec() = default;
  explicit CoeffVec(std::size_t dim) : c_(dim, 0.0) {}
  explicit CoeffVec(std::vector<double> coeffs);

  std::size_t dim() const { return c_.size(); }
  double operator[](std::size_t j) const { return c_[j]; }
  double& operator[](std::size_t j) { return c_[j]; }
  const std::vector<double>& coeffs() const { return c_; }
  std::vector<double>& coeffs() { return c_; }

  double norm() const;  // H-norm, i.e. Euclidean norm of the coefficients
  bool all_finite() const;

  friend bool operator==(const CoeffVec&, const CoeffVec&) = default;

 private:
  std::vector<double> c_;
};

CoeffVec operator+(const CoeffVec& a, const CoeffVec& b);
CoeffVec operator-(const CoeffVec& a, const CoeffVec& b);
CoeffVec operator*(double s, const CoeffVec& a);

// Restriction to the first D coefficients, zero-padded when D exceeds the
// input dimension (refinement studies embed coarse samples in finer spaces).
CoeffVec project(const CoeffVec& x, std::size_t d);

// A diagonal trace-class operator given by its eigenvalue sequence. Values
// must be finite and nonnegative; zero eigenvalues are legal (degenerate
// Gaussian modes) but operations that need an inverse reject them.
class SpectralOperator {
 public:
  SpectralOperator() = default;
  explicit SpectralOperator(std::vector<double> eigenvalues,
                            std::string decay_tag = {});

  // Built-in laws: lambda_j = scale * j^(-s) and lambda_j = scale.
  static SpectralOperator power_law(double s, std::size_t dim,
                                    double scale = 1.0);
  static SpectralOperator constant(std::size_t dim, double value = 1.0);

  std::size_t dim() const { return lambda_.size(); }
  double operator[](std::size_t j) const { return lambda_[j]; }
  const std::vector<double>& eigenvalues() const { return lambda_; }
  const std::string& decay_tag() const { return tag_; }

  // Eigenvalues of the fractional power, lambda_j^alpha.
  std::vector<double> power_eigenvalues(double alpha) const;

  friend bool operator==(const SpectralOperator&,
                         const SpectralOperator&) = default;

 private:
  std::vector<double> lambda_;
  std::string tag_;
};

// Coefficient j of the result is lambda_j^alpha * x_j.
CoeffVec apply_power(const SpectralOperator& op, double alpha,
                     const CoeffVec& x);

// Sum_j lambda_j^alpha over the truncation.
double trace_power(const SpectralOperator& op, double alpha);

// Gaussian measure N(mean, diag(eigenvalues)).
struct GaussianMeasure {
  SpectralOperator covariance;
  CoeffVec mean;

  explicit GaussianMeasure(SpectralOperator cov);
  GaussianMeasure(SpectralOperator cov, CoeffVec mean_vec);
  std::size_t dim() const { return covariance.dim(); }
};

// Independent draw, coefficient j ~ N(mean_j, lambda_j).
CoeffVec sample_gaussian(const GaussianMeasure& measure, RngStream& rng);

// Per-mode ratios p0_j = lambda_j / mu0_j between a diffusion covariance C
// and a prior covariance C_mu0 sharing the eigenbasis. A zero prior mode
// violates the shared-basis ratio condition and is rejected.
struct RatioReport {
  std::vector<double> p0;
  double max_ratio;
};

RatioReport validate_ratio(const SpectralOperator& c,
                           const SpectralOperator& c_mu0);

}  // namespace fsl
