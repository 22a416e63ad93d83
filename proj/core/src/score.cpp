#include "fsl/score.hpp"

#include <cmath>

namespace fsl {

namespace {
std::vector<double> checked_ratios(const SpectralOperator& c,
                                   const SpectralOperator& c_mu0) {
  return validate_ratio(c, c_mu0).p0;
}
}  // namespace

CoeffVec exact_score(DiffusionTime tau, const CoeffVec& x,
                     const SpectralOperator& c,
                     const SpectralOperator& c_mu0) {
  const auto p0 = checked_ratios(c, c_mu0);
  if (x.dim() != p0.size())
    throw InvalidArgument("exact_score: vector/operator dimension mismatch");
  CoeffVec out(x.dim());
  for (std::size_t j = 0; j < x.dim(); ++j)
    out[j] = exact_score_coefficient(tau.value, p0[j]) * x[j];
  return out;
}

CoeffVec denoiser(double tau, const CoeffVec& x, const SpectralOperator& c,
                  const SpectralOperator& c_mu0) {
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw InvalidArgument("denoiser: tau must be finite and >= 0");
  const auto p0 = checked_ratios(c, c_mu0);
  if (x.dim() != p0.size())
    throw InvalidArgument("denoiser: vector/operator dimension mismatch");
  CoeffVec out(x.dim());
  for (std::size_t j = 0; j < x.dim(); ++j)
    out[j] = denoiser_coefficient(tau, p0[j]) * x[j];
  return out;
}

CoeffVec diffuse(const CoeffVec& x0, DiffusionTime tau,
                 const SpectralOperator& c, RngStream& rng) {
  if (x0.dim() != c.dim())
    throw InvalidArgument("diffuse: vector/operator dimension mismatch");
  const double decay = std::exp(-0.5 * tau.value);
  const double one_minus = -std::expm1(-tau.value);  // 1 - e^{-tau}
  CoeffVec out(x0.dim());
  for (std::size_t j = 0; j < x0.dim(); ++j)
    out[j] = decay * x0[j] + std::sqrt(one_minus * c[j]) * rng.normal();
  return out;
}

CoeffVec dsm_target(DiffusionTime tau, const CoeffVec& x0,
                    const CoeffVec& x_tau) {
  if (x0.dim() != x_tau.dim())
    throw InvalidArgument("dsm_target: dimension mismatch");
  const double decay = std::exp(-0.5 * tau.value);
  const double inv = 1.0 / (-std::expm1(-tau.value));
  CoeffVec out(x0.dim());
  for (std::size_t j = 0; j < x0.dim(); ++j)
    out[j] = inv * (x_tau[j] - decay * x0[j]);
  return out;
}

CoeffVec score_mismatch(DiffusionTime tau, const CoeffVec& x,
                        const SpectralOperator& c,
                        const SpectralOperator& c_mu0) {
  const auto p0 = checked_ratios(c, c_mu0);
  if (x.dim() != p0.size())
    throw InvalidArgument("score_mismatch: dimension mismatch");
  const double em = std::expm1(tau.value);
  CoeffVec out(x.dim());
  for (std::size_t j = 0; j < x.dim(); ++j)
    out[j] = em * ((p0[j] - 1.0) / (1.0 + em * p0[j])) * p0[j] * x[j];
  return out;
}

double exact_score_lipschitz(double tau, const std::vector<double>& p0) {
  double best = 0.0;
  for (double r : p0)
    best = std::max(best, std::abs(exact_score_coefficient(tau, r)));
  return best;
}

ScoreModel::ScoreModel(SpectralOperator c, SpectralOperator c_mu0, Kind kind,
                       std::optional<Perturbation> pert)
    : c_(std::move(c)),
      c_mu0_(std::move(c_mu0)),
      p0_(checked_ratios(c_, c_mu0_)),
      kind_(kind),
      pert_(pert) {
  if (pert_) {
    if (!(pert_->eps_tau >= 0.0) || !std::isfinite(pert_->eps_tau))
      throw InvalidArgument("ScoreModel: eps_tau must be finite and >= 0");
    if (!(pert_->omega > 0.0) || !std::isfinite(pert_->omega))
      throw InvalidArgument("ScoreModel: omega must be finite and > 0");
    // Probe-grid check of the declared bound. The sine rule satisfies it by
    // construction; the probe guards any future perturbation rule.
    for (int i = 0; i < 100; ++i) {
      const double x1 = -5.0 + 0.1010101010101010 * i;
      const double e = pert_->eps_tau * std::sin(pert_->omega * x1);
      if (std::abs(e) > pert_->eps_tau * (1.0 + 1e-12))
        throw AssumptionViolation(
            "ScoreModel: perturbation exceeds its declared bound");
    }
  }
}

ScoreModel ScoreModel::exact(SpectralOperator c, SpectralOperator c_mu0) {
  return ScoreModel(std::move(c), std::move(c_mu0), Kind::exact, std::nullopt);
}

ScoreModel ScoreModel::perturbed(SpectralOperator c, SpectralOperator c_mu0,
                                 Perturbation perturbation) {
  return ScoreModel(std::move(c), std::move(c_mu0), Kind::perturbed,
                    perturbation);
}

void ScoreModel::evaluate_into(double tau, const CoeffVec& x,
                               CoeffVec& out) const {
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw InvalidArgument("ScoreModel: tau must be finite and > 0");
  if (x.dim() != p0_.size())
    throw InvalidArgument("ScoreModel: vector/operator dimension mismatch");
  if (out.dim() != x.dim()) out = CoeffVec(x.dim());
  for (std::size_t j = 0; j < x.dim(); ++j)
    out[j] = exact_score_coefficient(tau, p0_[j]) * x[j];
  if (kind_ == Kind::perturbed && pert_->eps_tau > 0.0)
    out[0] += pert_->eps_tau * std::sin(pert_->omega * x[0]);
}

CoeffVec ScoreModel::evaluate(DiffusionTime tau, const CoeffVec& x) const {
  CoeffVec out(x.dim());
  evaluate_into(tau.value, x, out);
  return out;
}

double ScoreModel::error_bound(double) const {
  return pert_ ? pert_->eps_tau : 0.0;
}

double ScoreModel::lipschitz(double tau) const {
  double l = exact_score_lipschitz(tau, p0_);
  if (pert_) l += pert_->eps_tau * pert_->omega;
  return l;
}

}  // namespace fsl
