#include "fsl/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace fsl {

namespace {
void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument(msg);
}
}  // namespace

CoeffVec::CoeffVec(std::vector<double> coeffs) : c_(std::move(coeffs)) {
  for (double v : c_) {
    if (!std::isfinite(v))
      throw InvalidArgument("CoeffVec: coefficients must be finite");
  }
}

double CoeffVec::norm() const {
  double s = 0.0;
  for (double v : c_) s += v * v;
  return std::sqrt(s);
}

bool CoeffVec::all_finite() const {
  return std::all_of(c_.begin(), c_.end(),
                     [](double v) { return std::isfinite(v); });
}

CoeffVec operator+(const CoeffVec& a, const CoeffVec& b) {
  require(a.dim() == b.dim(), "CoeffVec: dimension mismatch in +");
  CoeffVec out(a.dim());
  for (std::size_t j = 0; j < a.dim(); ++j) out[j] = a[j] + b[j];
  return out;
}

CoeffVec operator-(const CoeffVec& a, const CoeffVec& b) {
  require(a.dim() == b.dim(), "CoeffVec: dimension mismatch in -");
  CoeffVec out(a.dim());
  for (std::size_t j = 0; j < a.dim(); ++j) out[j] = a[j] - b[j];
  return out;
}

CoeffVec operator*(double s, const CoeffVec& a) {
  CoeffVec out(a.dim());
  for (std::size_t j = 0; j < a.dim(); ++j) out[j] = s * a[j];
  return out;
}

CoeffVec project(const CoeffVec& x, std::size_t d) {
  require(d >= 1, "project: target dimension must be >= 1");
  CoeffVec out(d);
  const std::size_t keep = std::min(d, x.dim());
  for (std::size_t j = 0; j < keep; ++j) out[j] = x[j];
  return out;
}

SpectralOperator::SpectralOperator(std::vector<double> eigenvalues,
                                   std::string decay_tag)
    : lambda_(std::move(eigenvalues)), tag_(std::move(decay_tag)) {
  for (double v : lambda_) {
    if (!std::isfinite(v) || v < 0.0)
      throw InvalidArgument(
          "SpectralOperator: eigenvalues must be finite and nonnegative");
  }
}

SpectralOperator SpectralOperator::power_law(double s, std::size_t dim,
                                             double scale) {
  require(dim >= 1, "power_law: dimension must be >= 1");
  require(std::isfinite(s) && s > 0.0, "power_law: exponent must be positive");
  require(std::isfinite(scale) && scale > 0.0,
          "power_law: scale must be positive");
  std::vector<double> lam(dim);
  for (std::size_t j = 0; j < dim; ++j)
    lam[j] = scale * std::pow(static_cast<double>(j + 1), -s);
  return SpectralOperator(std::move(lam),
                          "power(s=" + std::to_string(s) + ")");
}

SpectralOperator SpectralOperator::constant(std::size_t dim, double value) {
  require(dim >= 1, "constant: dimension must be >= 1");
  require(std::isfinite(value) && value > 0.0,
          "constant: value must be positive");
  return SpectralOperator(std::vector<double>(dim, value), "constant");
}

std::vector<double> SpectralOperator::power_eigenvalues(double alpha) const {
  std::vector<double> out(lambda_.size());
  for (std::size_t j = 0; j < lambda_.size(); ++j)
    out[j] = std::pow(lambda_[j], alpha);
  return out;
}

CoeffVec apply_power(const SpectralOperator& op, double alpha,
                     const CoeffVec& x) {
  require(op.dim() == x.dim(), "apply_power: operator/vector dimension mismatch");
  if (alpha < 0.0) {
    for (std::size_t j = 0; j < op.dim(); ++j) {
      if (op[j] == 0.0)
        throw InvalidArgument(
            "apply_power: negative power of a singular operator");
    }
  }
  CoeffVec out(x.dim());
  for (std::size_t j = 0; j < x.dim(); ++j)
    out[j] = std::pow(op[j], alpha) * x[j];
  return out;
}

double trace_power(const SpectralOperator& op, double alpha) {
  double s = 0.0;
  for (std::size_t j = 0; j < op.dim(); ++j) s += std::pow(op[j], alpha);
  return s;
}

GaussianMeasure::GaussianMeasure(SpectralOperator cov)
    : covariance(std::move(cov)), mean(covariance.dim()) {}

GaussianMeasure::GaussianMeasure(SpectralOperator cov, CoeffVec mean_vec)
    : covariance(std::move(cov)), mean(std::move(mean_vec)) {
  require(mean.dim() == covariance.dim(),
          "GaussianMeasure: mean/covariance dimension mismatch");
}

CoeffVec sample_gaussian(const GaussianMeasure& measure, RngStream& rng) {
  CoeffVec out(measure.dim());
  for (std::size_t j = 0; j < measure.dim(); ++j)
    out[j] = measure.mean[j] + std::sqrt(measure.covariance[j]) * rng.normal();
  return out;
}

RatioReport validate_ratio(const SpectralOperator& c,
                           const SpectralOperator& c_mu0) {
  require(c.dim() == c_mu0.dim(), "validate_ratio: dimension mismatch");
  RatioReport report;
  report.p0.resize(c.dim());
  report.max_ratio = 0.0;
  for (std::size_t j = 0; j < c.dim(); ++j) {
    if (c_mu0[j] == 0.0)
      throw AssumptionViolation(
          "validate_ratio: degenerate prior mode " + std::to_string(j + 1) +
          " (zero eigenvalue), eigenvalue ratio is unbounded");
    report.p0[j] = c[j] / c_mu0[j];
    report.max_ratio = std::max(report.max_ratio, report.p0[j]);
  }
  return report;
}

}  // namespace fsl
