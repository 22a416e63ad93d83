#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fsl/spectral.hpp"

namespace fsl {

// Diffusion time of the forward noising process. Strictly positive; the
// denoising regression target is unstable at tau = 0, so that endpoint is
// only reachable through the denoiser, which has a well-defined limit there.
struct DiffusionTime {
  double value;
  explicit DiffusionTime(double v) : value(v) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw InvalidArgument("DiffusionTime: tau must be finite and > 0");
  }
};

// Per-mode multiplier of the exact score: the score of the tau-diffused
// Gaussian prior is diagonal, S_j = -(e^tau p0_j / (1 + (e^tau - 1) p0_j)) x_j.
// Written with expm1 so it is cancellation-free for tiny tau.
inline double exact_score_coefficient(double tau, double p0) {
  const double em = std::expm1(tau);
  return -(1.0 + em) * p0 / (1.0 + em * p0);
}

// Denoiser gain: E[X_0 | X_tau = x] = a_j x_j with
// a_j = e^{tau/2} / (1 + (e^tau - 1) p0_j). Well defined at tau = 0 (a = 1).
inline double denoiser_coefficient(double tau, double p0) {
  return std::exp(0.5 * tau) / (1.0 + std::expm1(tau) * p0);
}

// Exact score of the diffused Gaussian prior at time tau.
CoeffVec exact_score(DiffusionTime tau, const CoeffVec& x,
                     const SpectralOperator& c, const SpectralOperator& c_mu0);

// Conditional mean of the clean signal given the diffused one; tau >= 0.
CoeffVec denoiser(double tau, const CoeffVec& x, const SpectralOperator& c,
                  const SpectralOperator& c_mu0);

// One draw of the forward noising process:
// coefficient j ~ N(e^{-tau/2} x0_j, (1 - e^{-tau}) lambda_j).
CoeffVec diffuse(const CoeffVec& x0, DiffusionTime tau,
                 const SpectralOperator& c, RngStream& rng);

// Denoising-score-matching regression target,
// (1 - e^{-tau})^{-1} (x_tau - e^{-tau/2} x0).
// The exact score equals the conditional expectation of MINUS this target
// given x_tau; the binned-regression test pins that relationship.
CoeffVec dsm_target(DiffusionTime tau, const CoeffVec& x0,
                    const CoeffVec& x_tau);

// Gap between the tau-smoothed score and the prior's natural drift:
// C C_mu0^{-1} x + S(tau, x). Vanishes identically when C = C_mu0 and is
// O(tau) per mode otherwise.
CoeffVec score_mismatch(DiffusionTime tau, const CoeffVec& x,
                        const SpectralOperator& c,
                        const SpectralOperator& c_mu0);

// Lipschitz constant of the exact score at time tau: the largest per-mode
// multiplier magnitude.
double exact_score_lipschitz(double tau, const std::vector<double>& p0);

// Deterministic bounded perturbation applied on top of the exact score to
// realize a controllably imperfect score: eps * sin(omega * x_1) on the
// first coefficient direction. Sup-norm eps, Lipschitz constant eps*omega,
// both known analytically.
struct Perturbation {
  double eps_tau = 0.0;
  double omega = 1.0;
};

// Exact or perturbed prior score with declared Lipschitz constant and error
// bound. Immutable and shareable across chains.
class ScoreModel {
 public:
  enum class Kind { exact, perturbed };

  static ScoreModel exact(SpectralOperator c, SpectralOperator c_mu0);
  static ScoreModel perturbed(SpectralOperator c, SpectralOperator c_mu0,
                              Perturbation perturbation);

  // S_theta(tau, x).
  CoeffVec evaluate(DiffusionTime tau, const CoeffVec& x) const;
  void evaluate_into(double tau, const CoeffVec& x, CoeffVec& out) const;

  Kind kind() const { return kind_; }
  double error_bound(double tau) const;  // eps_tau; 0 for the exact score
  double lipschitz(double tau) const;    // declared L_tau
  const SpectralOperator& c() const { return c_; }
  const SpectralOperator& c_mu0() const { return c_mu0_; }
  const std::vector<double>& ratios() const { return p0_; }
  std::size_t dim() const { return c_.dim(); }
  const std::optional<Perturbation>& perturbation() const { return pert_; }

 private:
  ScoreModel(SpectralOperator c, SpectralOperator c_mu0, Kind kind,
             std::optional<Perturbation> pert);

  SpectralOperator c_;
  SpectralOperator c_mu0_;
  std::vector<double> p0_;
  Kind kind_;
  std::optional<Perturbation> pert_;
};

}  // namespace fsl
