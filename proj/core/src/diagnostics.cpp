#include "fsl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace fsl {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument(msg);
}

// Equal-size batches that never straddle a chain boundary. Returns
// (start, length) pairs.
std::vector<std::pair<std::size_t, std::size_t>> make_batches(
    const SampleStore& store) {
  const std::size_t n = store.size();
  std::size_t target = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  target = std::clamp<std::size_t>(target, 2, 64);
  const std::size_t batch = std::max<std::size_t>(1, n / target);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t c = 0; c < store.chain_offsets.size(); ++c) {
    const std::size_t begin = store.chain_offsets[c];
    const std::size_t end = (c + 1 < store.chain_offsets.size())
                                ? store.chain_offsets[c + 1]
                                : n;
    for (std::size_t s = begin; s + batch <= end; s += batch)
      out.emplace_back(s, batch);
  }
  if (out.size() < 2) {
    // Degenerate stores: fall back to one batch per sample.
    out.clear();
    for (std::size_t s = 0; s < n; ++s) out.emplace_back(s, 1);
  }
  return out;
}

struct BatchAccumulator {
  // Batch means of a set of functionals, one row per batch.
  std::vector<std::vector<double>> rows;

  std::size_t n_batches() const { return rows.size(); }

  std::vector<double> grand_mean() const {
    std::vector<double> m(rows.front().size(), 0.0);
    for (const auto& r : rows)
      for (std::size_t i = 0; i < m.size(); ++i) m[i] += r[i];
    for (double& v : m) v /= static_cast<double>(rows.size());
    return m;
  }

  // Covariance of the grand mean: sample covariance of batch means over B.
  double mean_cov(std::size_t a, std::size_t b,
                  const std::vector<double>& gm) const {
    const double nb = static_cast<double>(rows.size());
    if (nb < 2) return 0.0;
    double s = 0.0;
    for (const auto& r : rows) s += (r[a] - gm[a]) * (r[b] - gm[b]);
    return s / (nb - 1.0) / nb;
  }
};

}  // namespace

MomentSummary moments(const SampleStore& store) {
  require(store.size() >= 2, "moments: need at least 2 samples");
  const std::size_t dim = store.dim;
  const auto batches = make_batches(store);

  MomentSummary out;
  out.n_samples = store.size();
  out.n_batches = batches.size();
  out.modes.resize(dim);

  // Exact full-sample first and second moments (the batch structure is only
  // used for the standard errors).
  std::vector<double> m1(dim, 0.0), m2(dim, 0.0);
  double m12 = 0.0;
  for (const auto& s : store.samples) {
    for (std::size_t j = 0; j < dim; ++j) {
      m1[j] += s[j];
      m2[j] += s[j] * s[j];
    }
    if (dim >= 2) m12 += s[0] * s[1];
  }
  const double n = static_cast<double>(store.size());
  for (std::size_t j = 0; j < dim; ++j) {
    m1[j] /= n;
    m2[j] /= n;
  }
  m12 /= n;

  for (std::size_t j = 0; j < dim; ++j) {
    out.modes[j].mean = m1[j];
    out.modes[j].variance = (m2[j] - m1[j] * m1[j]) * n / (n - 1.0);
  }
  if (dim >= 2) out.cov12 = (m12 - m1[0] * m1[1]) * n / (n - 1.0);

  // Batch means per mode for (x, x^2); delta method for the variance SE.
  for (std::size_t j = 0; j < dim; ++j) {
    BatchAccumulator acc;
    acc.rows.reserve(batches.size());
    for (const auto& [start, len] : batches) {
      double a = 0.0, b = 0.0;
      for (std::size_t s = start; s < start + len; ++s) {
        const double v = store.samples[s][j];
        a += v;
        b += v * v;
      }
      acc.rows.push_back({a / static_cast<double>(len),
                          b / static_cast<double>(len)});
    }
    const auto gm = acc.grand_mean();
    const double v11 = acc.mean_cov(0, 0, gm);
    const double v22 = acc.mean_cov(1, 1, gm);
    const double v12 = acc.mean_cov(0, 1, gm);
    out.modes[j].se_mean = std::sqrt(std::max(0.0, v11));
    // var = m2 - m1^2, gradient (-2 m1, 1)
    const double g0 = -2.0 * gm[0];
    const double vv = g0 * g0 * v11 + 2.0 * g0 * v12 + v22;
    out.modes[j].se_variance = std::sqrt(std::max(0.0, vv));
  }

  if (dim >= 2) {
    BatchAccumulator acc;
    acc.rows.reserve(batches.size());
    for (const auto& [start, len] : batches) {
      double a = 0.0, b = 0.0, ab = 0.0;
      for (std::size_t s = start; s < start + len; ++s) {
        a += store.samples[s][0];
        b += store.samples[s][1];
        ab += store.samples[s][0] * store.samples[s][1];
      }
      const double dl = static_cast<double>(len);
      acc.rows.push_back({a / dl, b / dl, ab / dl});
    }
    const auto gm = acc.grand_mean();
    // cov = m12 - m1 m2, gradient (-m2, -m1, 1)
    const double g[3] = {-gm[1], -gm[0], 1.0};
    double vv = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        vv += g[a] * g[b] *
              acc.mean_cov(static_cast<std::size_t>(a),
                           static_cast<std::size_t>(b), gm);
    out.se_cov12 = std::sqrt(std::max(0.0, vv));
  }
  return out;
}

namespace {
std::vector<std::size_t> bin_assignments(const SampleStore& store,
                                         const GridDensity2D& truth,
                                         std::size_t bins) {
  std::vector<std::size_t> where(store.size());
  const double wx = (truth.x_max() - truth.x_min()) / static_cast<double>(bins);
  const double wy = (truth.y_max() - truth.y_min()) / static_cast<double>(bins);
  for (std::size_t s = 0; s < store.size(); ++s) {
    const double x = store.samples[s][0];
    const double y = store.samples[s][1];
    auto clampi = [&](double v, double lo, double w) {
      const auto i = static_cast<long long>(std::floor((v - lo) / w));
      return static_cast<std::size_t>(
          std::clamp<long long>(i, 0, static_cast<long long>(bins) - 1));
    };
    where[s] = clampi(y, truth.y_min(), wy) * bins + clampi(x, truth.x_min(), wx);
  }
  return where;
}

double kl_from_counts(const std::vector<double>& counts,
                      const std::vector<double>& truth_mass, double n) {
  const double b = static_cast<double>(counts.size());
  double kl = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double p = (counts[i] + 1.0) / (n + b);
    const double q = (n * truth_mass[i] + 1.0) / (n + b);
    kl += p * std::log(p / q);
  }
  return kl;
}
}  // namespace

KlEstimate grid_kl(const SampleStore& store, const GridDensity2D& truth,
                   std::size_t bins, std::size_t bootstrap_rounds,
                   std::uint64_t bootstrap_seed) {
  require(store.dim >= 2, "grid_kl: store must have at least two modes");
  require(store.size() >= 1, "grid_kl: empty store");
  require(bins >= 2, "grid_kl: need at least 2 bins per axis");

  const auto q = truth.bin_masses(bins);
  const auto where = bin_assignments(store, truth, bins);
  const double n = static_cast<double>(store.size());

  std::vector<double> counts(bins * bins, 0.0);
  for (std::size_t w : where) counts[w] += 1.0;

  KlEstimate est;
  est.bins = bins;
  est.value = kl_from_counts(counts, q, n);
  est.under_resolved = bins * bins > store.size() / 10;

  if (bootstrap_rounds > 0 && store.size() >= 2) {
    RngStream rng(bootstrap_seed, 0x626f6f74ULL);
    double sum = 0.0, sum2 = 0.0;
    std::vector<double> bc(bins * bins);
    for (std::size_t r = 0; r < bootstrap_rounds; ++r) {
      std::fill(bc.begin(), bc.end(), 0.0);
      for (std::size_t s = 0; s < store.size(); ++s) {
        const auto pick = static_cast<std::size_t>(
            std::min(n - 1.0, std::floor(rng.uniform() * n)));
        bc[where[pick]] += 1.0;
      }
      const double v = kl_from_counts(bc, q, n);
      sum += v;
      sum2 += v * v;
    }
    const double rb = static_cast<double>(bootstrap_rounds);
    est.bootstrap_se =
        std::sqrt(std::max(0.0, (sum2 / rb - (sum / rb) * (sum / rb)) * rb /
                                     (rb - 1.0)));
  }
  return est;
}

DiagonalGaussian fit_diagonal_gaussian(const SampleStore& store) {
  require(store.size() >= 2, "fit_diagonal_gaussian: need at least 2 samples");
  DiagonalGaussian g;
  g.mean.assign(store.dim, 0.0);
  g.variance.assign(store.dim, 0.0);
  const double n = static_cast<double>(store.size());
  for (const auto& s : store.samples)
    for (std::size_t j = 0; j < store.dim; ++j) g.mean[j] += s[j];
  for (double& v : g.mean) v /= n;
  for (const auto& s : store.samples)
    for (std::size_t j = 0; j < store.dim; ++j) {
      const double d = s[j] - g.mean[j];
      g.variance[j] += d * d;
    }
  for (double& v : g.variance) v /= (n - 1.0);
  return g;
}

double gaussian_relative_fisher(const DiagonalGaussian& nu,
                                const DiagonalGaussian& mu,
                                const SpectralOperator& c, double alpha) {
  const std::size_t dim = nu.mean.size();
  require(nu.variance.size() == dim && mu.mean.size() == dim &&
              mu.variance.size() == dim && c.dim() == dim,
          "gaussian_relative_fisher: dimension mismatch");
  double total = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    const double v1 = nu.variance[j];
    const double v2 = mu.variance[j];
    require(v1 > 0.0 && v2 > 0.0,
            "gaussian_relative_fisher: variances must be positive");
    const double dm = nu.mean[j] - mu.mean[j];
    const double term = dm * dm / (v2 * v2) +
                        (1.0 / v2 - 1.0 / v1) * (1.0 / v2 - 1.0 / v1) * v1;
    total += std::pow(c[j], alpha) * term;
  }
  return total;
}

BoundDecomposition theorem1_bound(const BoundParams& p) {
  require(p.gamma > 0.0, "theorem1_bound: gamma must be positive");
  require(p.n_iters > 0.0, "theorem1_bound: N must be positive");
  require(p.trace_c_alpha > 0.0, "theorem1_bound: trace must be positive");
  require(p.kl0 >= 0.0 && p.trace_c_alpha_minus_2 >= 0.0 &&
              p.lipschitz >= 0.0 && p.mismatch_k >= 0.0 && p.tau >= 0.0 &&
              p.eps_tau >= 0.0,
          "theorem1_bound: parameters must be nonnegative");

  const double tr = p.trace_c_alpha;
  BoundDecomposition d;
  d.kl_term = 4.0 * p.kl0 / (p.n_iters * p.gamma);
  d.discretization_term =
      (16.0 * std::sqrt(tr) + 64.0) * tr * p.lipschitz * p.lipschitz * p.gamma;
  const double a_factor = 4.0 / tr + 16.0;
  d.mismatch_term = a_factor * p.mismatch_k * p.mismatch_k * p.tau * p.tau;
  d.approximation_term =
      a_factor * p.trace_c_alpha_minus_2 * p.eps_tau * p.eps_tau;
  d.total = d.kl_term + d.discretization_term + d.mismatch_term +
            d.approximation_term;
  if (p.lipschitz > 0.0) {
    d.step_cap = max_step_size(tr, p.lipschitz);
    d.step_size_valid = p.gamma <= d.step_cap;
  }
  return d;
}

LogLogFit fit_loglog(std::span<const std::pair<double, double>> points) {
  require(points.size() >= 3, "fit_loglog: need at least 3 points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    require(x > 0.0 && y > 0.0, "fit_loglog: values must be positive");
    const double lx = std::log(x);
    const double ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(points.size());
  const double denom = sxx - sx * sx / n;
  require(denom > 0.0, "fit_loglog: degenerate abscissae");
  LogLogFit fit;
  fit.slope = (sxy - sx * sy / n) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double rss = 0.0;
  for (const auto& [x, y] : points) {
    const double r = std::log(y) - (fit.intercept + fit.slope * std::log(x));
    rss += r * r;
  }
  fit.se_slope =
      points.size() > 2 ? std::sqrt(rss / (n - 2.0) / denom) : 0.0;
  return fit;
}

double estimate_mismatch_constant(const SpectralOperator& c,
                                  const SpectralOperator& c_mu0,
                                  std::span<const CoeffVec> probes,
                                  double tau) {
  require(!probes.empty(), "estimate_mismatch_constant: no probes");
  double best = 0.0;
  for (const auto& x : probes) {
    const double m = score_mismatch(DiffusionTime(tau), x, c, c_mu0).norm();
    best = std::max(best, m / tau);
  }
  return best;
}

StabilityVerdict assess_dimension_stability(
    std::span<const DimensionPoint> points) {
  require(!points.empty(), "assess_dimension_stability: no points");
  StabilityVerdict v;
  v.points.assign(points.begin(), points.end());
  double lo = points[0].metric, hi = points[0].metric, se2 = 0.0;
  for (const auto& p : points) {
    lo = std::min(lo, p.metric);
    hi = std::max(hi, p.metric);
    se2 += p.se * p.se;
  }
  v.spread = hi - lo;
  v.pooled_error = std::sqrt(2.0 * se2 / static_cast<double>(points.size()));
  v.stable = v.spread <= 2.0 * v.pooled_error || v.spread == 0.0;
  return v;
}

StabilityVerdict dimension_sweep(
    const std::function<DimensionPoint(std::size_t)>& experiment,
    std::span<const std::size_t> dims) {
  require(!dims.empty(), "dimension_sweep: no dimensions");
  for (std::size_t i = 1; i < dims.size(); ++i)
    require(dims[i] > dims[i - 1], "dimension_sweep: dims must be increasing");
  std::vector<DimensionPoint> pts;
  pts.reserve(dims.size());
  for (std::size_t d : dims) pts.push_back(experiment(d));
  return assess_dimension_stability(pts);
}

Report& Report::section(const std::string& name) {
  for (auto& [k, s] : sections_)
    if (k == name) return s;
  sections_.emplace_back(name, Report{});
  return sections_.back().second;
}

void Report::set(const std::string& key, double v) {
  values_.emplace_back(key, Value{v});
}
void Report::set(const std::string& key, std::uint64_t v) {
  values_.emplace_back(key, Value{v});
}
void Report::set(const std::string& key, const std::string& v) {
  values_.emplace_back(key, Value{v});
}
void Report::set(const std::string& key, const char* v) {
  values_.emplace_back(key, Value{std::string(v)});
}

void Report::render(std::string& out, int depth) const {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  char buf[64];
  for (const auto& [k, v] : values_) {
    out += pad + k + " = ";
    if (std::holds_alternative<double>(v)) {
      std::snprintf(buf, sizeof(buf), "%.12g", std::get<double>(v));
      out += buf;
    } else if (std::holds_alternative<std::uint64_t>(v)) {
      out += std::to_string(std::get<std::uint64_t>(v));
    } else {
      out += std::get<std::string>(v);
    }
    out += "\n";
  }
  for (const auto& [k, s] : sections_) {
    out += pad + k + ":\n";
    s.render(out, depth + 1);
  }
}

std::string Report::to_text() const {
  std::string out;
  render(out, 0);
  return out;
}

}  // namespace fsl
