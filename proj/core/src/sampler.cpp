#include "fsl/sampler.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace fsl {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument(msg);
}

// Uniform-slot block per iteration; mode j draws from the Box-Muller pair
// rooted at base + (j rounded down to even). Keeps per-(iteration, mode)
// noise independent of the truncation dimension.
constexpr std::uint64_t kIterShift = 25;

inline std::uint64_t noise_base(std::size_t k) {
  return static_cast<std::uint64_t>(k) << kIterShift;
}

struct PowCache {
  std::vector<double> alpha_minus_1;  // lambda^(alpha-1)
  std::vector<double> alpha_pow;      // lambda^alpha
  std::vector<double> noise_sd;       // lambda^(alpha/2)
};

PowCache make_pow_cache(const SpectralOperator& c, double alpha) {
  PowCache pc;
  pc.alpha_minus_1 = c.power_eigenvalues(alpha - 1.0);
  pc.alpha_pow = c.power_eigenvalues(alpha);
  pc.noise_sd = c.power_eigenvalues(0.5 * alpha);
  return pc;
}

// m distinct indices out of n via partial Fisher-Yates; draws are keyed by
// iteration so the subset sequence is reproducible and position-independent.
void sample_subset(std::uint64_t subset_key, std::size_t k, std::size_t m,
                   std::size_t n, std::vector<std::size_t>& idx,
                   std::vector<std::size_t>& out) {
  idx.resize(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  out.resize(m);
  const std::uint64_t base = static_cast<std::uint64_t>(k) << 16;
  for (std::size_t i = 0; i < m; ++i) {
    const double u = RngStream::uniform_at(subset_key, base + i);
    std::size_t r =
        i + std::min(n - i - 1, static_cast<std::size_t>(u * static_cast<double>(n - i)));
    std::swap(idx[i], idx[r]);
    out[i] = idx[i];
  }
}

struct StepWorkspace {
  CoeffVec score;
  CoeffVec grad;
  std::vector<std::size_t> idx;
  std::vector<std::size_t> subset;
};

// One in-place update. Both step() and run_chain() funnel through here, so
// their arithmetic is identical operation for operation.
void advance(CoeffVec& x, std::size_t k, const ChainConfig& cfg,
             const ScoreModel& score, const PosteriorSpec& spec,
             const PowCache& pc, std::uint64_t noise_key,
             std::uint64_t subset_key, StepWorkspace& ws) {
  const double gamma = cfg.step.at(k);
  const double eta = cfg.eta_at(k);
  const double tau = cfg.tau_at(k);
  const std::size_t dim = x.dim();

  score.evaluate_into(tau, x, ws.score);

  const std::size_t n_obs = spec.problem.op->n_obs();
  if (cfg.stochastic_batch > 0 && cfg.stochastic_batch < n_obs) {
    sample_subset(subset_key, k, cfg.stochastic_batch, n_obs, ws.idx,
                  ws.subset);
    stochastic_grad_log_likelihood_into(spec, x, ws.subset, ws.grad);
  } else {
    grad_log_likelihood_into(spec, x, ws.grad);
  }

  const double noise_scale = cfg.suppress_noise ? 0.0 : std::sqrt(2.0 * gamma);
  const std::uint64_t base = noise_base(k);
  double z0 = 0.0, z1 = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    if (noise_scale != 0.0) {
      if ((j & 1u) == 0)
        RngStream::normal_pair_at(noise_key, base + j, z0, z1);
    }
    const double z = (j & 1u) == 0 ? z0 : z1;
    x[j] += gamma * (pc.alpha_minus_1[j] * (eta * ws.score[j]) +
                     pc.alpha_pow[j] * ws.grad[j]) +
            noise_scale * pc.noise_sd[j] * z;
  }
}

bool state_ok(const CoeffVec& x, double ceiling) {
  double ss = 0.0;
  for (std::size_t j = 0; j < x.dim(); ++j) ss += x[j] * x[j];
  return std::isfinite(ss) && ss <= ceiling * ceiling;
}

std::string divergence_message(std::size_t k, double ceiling) {
  return "chain diverged at iteration " + std::to_string(k) +
         " (norm exceeded " + std::to_string(ceiling) + " or became "
         "non-finite)";
}

RunWarnings compute_warnings(const ChainConfig& cfg, const ScoreModel& score,
                             const PosteriorSpec& spec) {
  RunWarnings w;
  double l_phi = cfg.lipschitz_hint;
  if (l_phi <= 0.0) {
    RngStream probe_rng(cfg.seed, cfg.chain_index * 8 + 2);
    l_phi = estimate_lipschitz(spec, 16, 2.0, probe_rng);
  }
  const double tau_a = cfg.annealing ? cfg.annealing->tau_start() : cfg.tau;
  const double tau_b = cfg.annealing ? cfg.annealing->tau_end() : cfg.tau;
  const double l_tau = std::max(score.lipschitz(tau_a), score.lipschitz(tau_b));
  const double tr_a = trace_power(score.c(), cfg.alpha);
  const double tr_am2 = trace_power(score.c(), cfg.alpha - 2.0);
  const double l_g = std::sqrt(tr_am2 * l_tau * l_tau + tr_a * l_phi * l_phi);
  w.lipschitz_used = std::max(l_g, l_phi);
  w.step_cap = max_step_size(tr_a, w.lipschitz_used);
  w.max_gamma = cfg.step.max_value();
  w.step_cap_exceeded = w.max_gamma > w.step_cap;
  return w;
}

SampleStore run_range(const ChainConfig& cfg, const ScoreModel& score,
                      const PosteriorSpec& spec, const CoeffVec& init,
                      std::size_t k_start) {
  cfg.validate();
  require(init.dim() == score.dim(),
          "run_chain: init dimension does not match the score model");
  require(init.dim() == spec.prior.dim(),
          "run_chain: init dimension does not match the posterior spec");
  require(init.all_finite(), "run_chain: init must be finite");

  SampleStore store;
  store.dim = init.dim();
  store.config = cfg;
  store.init = init;
  store.warnings = compute_warnings(cfg, score, spec);
  store.chain_indices = {cfg.chain_index};

  const PowCache pc = make_pow_cache(score.c(), cfg.alpha);
  const std::uint64_t noise_key =
      derive_stream_key(cfg.seed, cfg.chain_index * 8 + 0);
  const std::uint64_t subset_key =
      derive_stream_key(cfg.seed, cfg.chain_index * 8 + 1);

  StepWorkspace ws;
  ws.score = CoeffVec(init.dim());
  ws.grad = CoeffVec(init.dim());

  CoeffVec x = init;
  for (std::size_t k = k_start; k < cfg.n_iters; ++k) {
    advance(x, k, cfg, score, spec, pc, noise_key, subset_key, ws);
    if (!state_ok(x, cfg.divergence_ceiling)) {
      store.chain_offsets = {0};
      throw ChainDivergence(k + 1,
                            divergence_message(k + 1, cfg.divergence_ceiling),
                            std::make_shared<SampleStore>(std::move(store)));
    }
    const std::size_t t = k + 1;
    if (t > cfg.burn_in && (t - cfg.burn_in) % cfg.lag == 0) {
      store.samples.push_back(x);
      store.iteration.push_back(t);
    }
  }
  store.chain_offsets = {0};
  return store;
}

}  // namespace

StepSchedule StepSchedule::constant(double gamma, std::size_t n) {
  // gamma = 0 is allowed as the degenerate no-op schedule.
  require(gamma >= 0.0 && std::isfinite(gamma),
          "StepSchedule: gamma must be finite and >= 0");
  require(n >= 1, "StepSchedule: length must be >= 1");
  StepSchedule s;
  s.kind_ = Kind::constant;
  s.start_ = s.end_ = gamma;
  s.n_ = n;
  return s;
}

StepSchedule StepSchedule::geometric(double start, double end, std::size_t n) {
  require(std::isfinite(start) && std::isfinite(end) && start >= end &&
              end > 0.0,
          "StepSchedule: need start >= end > 0");
  require(n >= 1, "StepSchedule: length must be >= 1");
  StepSchedule s;
  s.kind_ = Kind::geometric_decay;
  s.start_ = start;
  s.end_ = end;
  s.n_ = n;
  return s;
}

StepSchedule StepSchedule::polynomial(double start, double end,
                                      double exponent, std::size_t n) {
  require(std::isfinite(start) && std::isfinite(end) && start >= end &&
              end > 0.0,
          "StepSchedule: need start >= end > 0");
  require(exponent > 0.0 && std::isfinite(exponent),
          "StepSchedule: exponent must be positive");
  require(n >= 1, "StepSchedule: length must be >= 1");
  StepSchedule s;
  s.kind_ = Kind::polynomial_decay;
  s.start_ = start;
  s.end_ = end;
  s.exponent_ = exponent;
  s.n_ = n;
  if (n == 1 || start == end) {
    s.poly_a_ = start;
    s.poly_b_ = 0.0;  // degenerate: constant
  } else {
    const double r = std::pow(start / end, 1.0 / exponent);
    s.poly_b_ = static_cast<double>(n - 1) / (r - 1.0);
    s.poly_a_ = start * std::pow(s.poly_b_, exponent);
  }
  return s;
}

double StepSchedule::at(std::size_t k) const {
  switch (kind_) {
    case Kind::constant:
      return start_;
    case Kind::geometric_decay: {
      if (n_ <= 1 || start_ == end_) return start_;
      const double t =
          static_cast<double>(k) / static_cast<double>(n_ - 1);
      return start_ * std::pow(end_ / start_, t);
    }
    case Kind::polynomial_decay: {
      if (poly_b_ == 0.0) return poly_a_;
      return poly_a_ *
             std::pow(poly_b_ + static_cast<double>(k), -exponent_);
    }
  }
  return start_;
}

AnnealingSchedule AnnealingSchedule::make(double eta_start, double tau_start,
                                          double tau_end,
                                          std::size_t n_anneal) {
  if (!(tau_end > 0.0) || !std::isfinite(tau_end))
    throw InvalidArgument(
        "AnnealingSchedule: tau_end must be > 0 (the regression target is "
        "unstable at tau = 0)");
  require(std::isfinite(tau_start) && tau_start >= tau_end,
          "AnnealingSchedule: need tau_start >= tau_end");
  require(std::isfinite(eta_start) && eta_start >= 1.0,
          "AnnealingSchedule: eta_start must be >= 1");
  AnnealingSchedule a;
  a.eta_start_ = eta_start;
  a.tau_start_ = tau_start;
  a.tau_end_ = tau_end;
  a.n_anneal_ = n_anneal;
  return a;
}

double AnnealingSchedule::eta_at(std::size_t k) const {
  if (n_anneal_ == 0 || k >= n_anneal_ || eta_start_ == 1.0) return 1.0;
  const double t =
      static_cast<double>(k) / static_cast<double>(n_anneal_);
  return std::pow(eta_start_, 1.0 - t);
}

double AnnealingSchedule::tau_at(std::size_t k) const {
  if (n_anneal_ == 0 || k >= n_anneal_ || tau_start_ == tau_end_)
    return tau_end_;
  const double t =
      static_cast<double>(k) / static_cast<double>(n_anneal_);
  return tau_start_ * std::pow(tau_end_ / tau_start_, t);
}

void ChainConfig::validate() const {
  require(alpha > 0.0 && std::isfinite(alpha),
          "ChainConfig: alpha must be positive");
  require(n_iters >= 1, "ChainConfig: n_iters must be >= 1");
  require(burn_in < n_iters, "ChainConfig: burn_in must be < n_iters");
  require(lag >= 1, "ChainConfig: lag must be >= 1");
  require(tau > 0.0 && std::isfinite(tau),
          "ChainConfig: tau must be positive");
  require(divergence_ceiling > 0.0,
          "ChainConfig: divergence ceiling must be positive");
  require(n_iters < (std::size_t{1} << 39),
          "ChainConfig: n_iters too large for the noise slot layout");
}

double ChainConfig::eta_at(std::size_t k) const {
  return annealing ? annealing->eta_at(k) : 1.0;
}

double ChainConfig::tau_at(std::size_t k) const {
  return annealing ? annealing->tau_at(k) : tau;
}

ChainState step(const ChainState& state, const ChainConfig& cfg,
                const ScoreModel& score, const PosteriorSpec& spec) {
  cfg.validate();
  require(state.x.all_finite(), "step: state must be finite");
  const PowCache pc = make_pow_cache(score.c(), cfg.alpha);
  const std::uint64_t noise_key =
      derive_stream_key(cfg.seed, cfg.chain_index * 8 + 0);
  const std::uint64_t subset_key =
      derive_stream_key(cfg.seed, cfg.chain_index * 8 + 1);
  StepWorkspace ws;
  ws.score = CoeffVec(state.x.dim());
  ws.grad = CoeffVec(state.x.dim());
  ChainState next;
  next.x = state.x;
  advance(next.x, state.k, cfg, score, spec, pc, noise_key, subset_key, ws);
  next.k = state.k + 1;
  if (!state_ok(next.x, cfg.divergence_ceiling))
    throw ChainDivergence(next.k,
                          divergence_message(next.k, cfg.divergence_ceiling));
  return next;
}

SampleStore run_chain(const ChainConfig& cfg, const ScoreModel& score,
                      const PosteriorSpec& spec, const CoeffVec& init) {
  return run_range(cfg, score, spec, init, 0);
}

SampleStore run_chain_from(const Checkpoint& cp, const ChainConfig& cfg,
                           const ScoreModel& score, const PosteriorSpec& spec) {
  require(cp.iteration <= cfg.n_iters,
          "run_chain_from: checkpoint is beyond the configured run length");
  ChainConfig c = cfg;
  c.seed = cp.seed;
  c.chain_index = cp.chain_index;
  return run_range(c, score, spec, cp.x, cp.iteration);
}

double max_step_size(double trace_c_alpha, double lipschitz) {
  require(trace_c_alpha > 0.0 && std::isfinite(trace_c_alpha),
          "max_step_size: trace must be positive");
  require(lipschitz > 0.0, "max_step_size: Lipschitz constant must be positive");
  if (std::isinf(lipschitz)) return 0.0;
  return 1.0 / (std::sqrt(128.0) * trace_c_alpha * lipschitz);
}

SampleStore merge_stores(std::vector<SampleStore> stores) {
  require(!stores.empty(), "merge_stores: nothing to merge");
  SampleStore out = std::move(stores.front());
  for (std::size_t i = 1; i < stores.size(); ++i) {
    SampleStore& s = stores[i];
    require(s.dim == out.dim, "merge_stores: dimension mismatch");
    out.chain_offsets.push_back(out.samples.size());
    out.chain_indices.push_back(s.config.chain_index);
    out.samples.insert(out.samples.end(),
                       std::make_move_iterator(s.samples.begin()),
                       std::make_move_iterator(s.samples.end()));
    out.iteration.insert(out.iteration.end(), s.iteration.begin(),
                         s.iteration.end());
    out.warnings.step_cap_exceeded |= s.warnings.step_cap_exceeded;
  }
  return out;
}

void write_checkpoint(std::ostream& os, const Checkpoint& cp) {
  os << "# chain checkpoint\n";
  os << "version = 1\n";
  os << "iteration = " << cp.iteration << "\n";
  os << "seed = " << cp.seed << "\n";
  os << "chain_index = " << cp.chain_index << "\n";
  os << "dim = " << cp.x.dim() << "\n";
  os << "x =";
  char buf[64];
  for (std::size_t j = 0; j < cp.x.dim(); ++j) {
    // Hex floats round-trip bit-exactly.
    std::snprintf(buf, sizeof(buf), " %a", cp.x[j]);
    os << buf;
  }
  os << "\n";
}

Checkpoint read_checkpoint(std::istream& is) {
  Checkpoint cp;
  std::size_t dim = 0;
  bool have_x = false;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("checkpoint: malformed line: " + line);
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      s = (a == std::string::npos) ? "" : s.substr(a, b - a + 1);
    };
    trim(key);
    trim(value);
    if (key == "version") {
      if (value != "1")
        throw InvalidArgument("checkpoint: unsupported version " + value);
    } else if (key == "iteration") {
      cp.iteration = std::stoull(value);
    } else if (key == "seed") {
      cp.seed = std::stoull(value);
    } else if (key == "chain_index") {
      cp.chain_index = std::stoull(value);
    } else if (key == "dim") {
      dim = std::stoull(value);
    } else if (key == "x") {
      std::istringstream vs(value);
      std::vector<double> coeffs;
      std::string tok;
      while (vs >> tok) coeffs.push_back(std::strtod(tok.c_str(), nullptr));
      cp.x = CoeffVec(std::move(coeffs));
      have_x = true;
    } else {
      throw InvalidArgument("checkpoint: unknown key " + key);
    }
  }
  if (!have_x || cp.x.dim() != dim)
    throw InvalidArgument("checkpoint: missing or inconsistent state vector");
  return cp;
}

}  // namespace fsl
