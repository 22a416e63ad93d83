#include "config.hpp"

#include <cctype>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fsl::cli {

namespace {
std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

ParsedConfig ParsedConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

ParsedConfig ParsedConfig::parse_string(const std::string& text,
                                        const std::string& name) {
  ParsedConfig cfg;
  cfg.name_ = name;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(name + ":" + std::to_string(line_no) +
                          ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError(name + ":" + std::to_string(line_no) +
                          ": empty section name");
      cfg.section_lines_.emplace(section, line_no);
      cfg.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(name + ":" + std::to_string(line_no) +
                        ": expected key = value");
    if (section.empty())
      throw ConfigError(name + ":" + std::to_string(line_no) +
                        ": key outside of any [section]");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(name + ":" + std::to_string(line_no) + ": empty key");
    auto& sec = cfg.sections_[section];
    if (sec.count(key))
      throw ConfigError(name + ":" + std::to_string(line_no) + ": [" +
                        section + "]." + key + ": duplicate key");
    sec.emplace(key, Value{value, line_no});
  }
  return cfg;
}

bool ParsedConfig::has(const std::string& section,
                       const std::string& key) const {
  const auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(key) > 0;
}

bool ParsedConfig::has_section(const std::string& section) const {
  return sections_.count(section) > 0;
}

void ParsedConfig::fail(const std::string& section, const std::string& key,
                        const std::string& msg) const {
  int line = 0;
  const auto it = sections_.find(section);
  if (it != sections_.end()) {
    const auto kt = it->second.find(key);
    if (kt != it->second.end()) line = kt->second.line;
  }
  throw ConfigError(name_ + ":" + std::to_string(line) + ": [" + section +
                    "]." + key + ": " + msg);
}

std::string ParsedConfig::get_string(const std::string& section,
                                     const std::string& key,
                                     std::optional<std::string> fallback) const {
  const auto it = sections_.find(section);
  if (it != sections_.end()) {
    const auto kt = it->second.find(key);
    if (kt != it->second.end()) return kt->second.text;
  }
  if (fallback) return *fallback;
  fail(section, key, "required key is missing");
}

double ParsedConfig::get_double(const std::string& section,
                                const std::string& key,
                                std::optional<double> fallback) const {
  if (!has(section, key)) {
    if (fallback) return *fallback;
    fail(section, key, "required key is missing");
  }
  const std::string text = get_string(section, key);
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || !std::isfinite(v))
    fail(section, key, "not a finite number: '" + text + "'");
  return v;
}

std::uint64_t ParsedConfig::get_u64(const std::string& section,
                                    const std::string& key,
                                    std::optional<std::uint64_t> fallback) const {
  if (!has(section, key)) {
    if (fallback) return *fallback;
    fail(section, key, "required key is missing");
  }
  const std::string text = get_string(section, key);
  char* end = nullptr;
  const std::uint64_t v = std::strtoull(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0')
    fail(section, key, "not a nonnegative integer: '" + text + "'");
  return v;
}

bool ParsedConfig::get_onoff(const std::string& section, const std::string& key,
                             bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get_string(section, key);
  if (v == "on" || v == "true" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "no") return false;
  fail(section, key, "expected on/off, got '" + v + "'");
}

std::vector<double> ParsedConfig::get_double_list(const std::string& section,
                                                  const std::string& key) const {
  const std::string text = get_string(section, key);
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(section, key, "empty list element");
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0' || !std::isfinite(v))
      fail(section, key, "not a finite number: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) fail(section, key, "empty list");
  return out;
}

void ParsedConfig::check_keys(const std::string& section,
                              const std::vector<std::string>& allowed) const {
  const auto it = sections_.find(section);
  if (it == sections_.end()) return;
  for (const auto& [key, value] : it->second) {
    bool ok = false;
    for (const auto& a : allowed) ok |= (a == key);
    if (!ok)
      throw ConfigError(name_ + ":" + std::to_string(value.line) + ": [" +
                        section + "]." + key + ": unknown key");
  }
}

void ParsedConfig::check_sections(const std::vector<std::string>& allowed) const {
  for (const auto& [name, keys] : sections_) {
    bool ok = false;
    for (const auto& a : allowed) ok |= (a == name);
    if (!ok) {
      const auto line_it = section_lines_.find(name);
      const int line = line_it == section_lines_.end() ? 0 : line_it->second;
      throw ConfigError(name_ + ":" + std::to_string(line) + ": [" + name +
                        "]: unknown section");
    }
  }
}

ExperimentConfig ExperimentConfig::load(const ParsedConfig& cfg) {
  cfg.check_sections(
      {"problem", "prior", "score", "sampler", "diagnostics", "output"});
  cfg.check_keys("problem",
                 {"name", "d0", "sigma2", "observation", "synthesize_seed"});
  cfg.check_keys("prior", {"law", "s", "scale", "dim"});
  cfg.check_keys("score",
                 {"kind", "law", "s", "scale", "tau", "epsilon", "omega"});
  cfg.check_keys("sampler",
                 {"alpha", "schedule", "gamma", "gamma_start", "gamma_end",
                  "exponent", "n_iters", "burn_in", "lag", "seed", "chains",
                  "init", "annealing", "eta_start", "tau_start", "tau_end",
                  "n_anneal", "stochastic_batch", "divergence_ceiling",
                  "lipschitz_hint"});
  cfg.check_keys("diagnostics",
                 {"oracle", "grid_kl", "grid_x", "grid_y", "grid_resolution",
                  "kl_bins", "bound", "mismatch_probes", "kl0"});
  cfg.check_keys("output", {"directory", "checkpoints", "threads"});

  ExperimentConfig e;

  // [problem]
  e.problem = cfg.get_string("problem", "name");
  if (e.problem != "mode_observation" && e.problem != "quadratic_map" &&
      e.problem != "rosenbrock" && e.problem != "none")
    cfg.fail("problem", "name",
             "unknown problem '" + e.problem +
                 "' (expected mode_observation, quadratic_map, rosenbrock or "
                 "none)");
  if (e.problem == "rosenbrock") {
    e.d0 = 2;
    e.sigma2 = 0.5;
  } else if (e.problem == "none") {
    e.d0 = 1;
    e.sigma2 = 1.0;
  } else {
    e.d0 = static_cast<std::size_t>(cfg.get_u64("problem", "d0"));
    if (e.d0 < 1) cfg.fail("problem", "d0", "must be >= 1");
    e.sigma2 = cfg.get_double("problem", "sigma2");
    if (!(e.sigma2 > 0.0)) cfg.fail("problem", "sigma2", "must be > 0");
  }
  const bool has_obs = cfg.has("problem", "observation");
  const bool has_synth = cfg.has("problem", "synthesize_seed");
  if (e.problem == "mode_observation" || e.problem == "quadratic_map") {
    if (has_obs == has_synth)
      cfg.fail("problem", "observation",
               "provide exactly one of observation / synthesize_seed");
    if (has_obs) {
      e.observation = cfg.get_double_list("problem", "observation");
      if (e.observation.size() != e.d0)
        cfg.fail("problem", "observation",
                 "expected " + std::to_string(e.d0) + " components");
    } else {
      e.synthesize_seed = cfg.get_u64("problem", "synthesize_seed");
    }
  } else if (has_obs || has_synth) {
    cfg.fail("problem", has_obs ? "observation" : "synthesize_seed",
             "not applicable to this problem");
  }

  // [prior]
  e.prior_law = cfg.get_string("prior", "law");
  if (e.prior_law != "power" && e.prior_law != "constant")
    cfg.fail("prior", "law",
             "unknown eigenvalue law '" + e.prior_law +
                 "' (expected power or constant)");
  if (e.prior_law == "power") {
    e.prior_s = cfg.get_double("prior", "s");
    if (e.prior_s != 1.1 && e.prior_s != 2.0 && e.prior_s != 4.0)
      cfg.fail("prior", "s", "registered exponents are 1.1, 2 and 4");
  } else if (cfg.has("prior", "s")) {
    cfg.fail("prior", "s", "only applicable to the power law");
  }
  e.prior_scale = cfg.get_double("prior", "scale", 1.0);
  if (!(e.prior_scale > 0.0)) cfg.fail("prior", "scale", "must be > 0");
  e.dim = static_cast<std::size_t>(cfg.get_u64("prior", "dim"));
  if (e.dim < 1) cfg.fail("prior", "dim", "must be >= 1");
  if (e.problem == "rosenbrock" && e.dim != 2)
    cfg.fail("prior", "dim", "the rosenbrock target is two-dimensional");
  if (e.dim < e.d0)
    cfg.fail("prior", "dim", "must be >= the operator's d0");

  // [score]
  e.score_kind = cfg.get_string("score", "kind", std::string("exact"));
  if (e.score_kind != "exact" && e.score_kind != "perturbed")
    cfg.fail("score", "kind", "expected exact or perturbed");
  e.score_law = cfg.get_string("score", "law", e.prior_law);
  if (e.score_law != "power" && e.score_law != "constant")
    cfg.fail("score", "law", "unknown eigenvalue law '" + e.score_law + "'");
  if (e.score_law == "power") {
    e.score_s = cfg.get_double("score", "s", e.prior_s);
    if (e.score_s != 1.1 && e.score_s != 2.0 && e.score_s != 4.0)
      cfg.fail("score", "s", "registered exponents are 1.1, 2 and 4");
  } else if (cfg.has("score", "s")) {
    cfg.fail("score", "s", "only applicable to the power law");
  }
  e.score_scale = cfg.get_double("score", "scale", 1.0);
  if (!(e.score_scale > 0.0)) cfg.fail("score", "scale", "must be > 0");
  e.tau = cfg.get_double("score", "tau", 1e-4);
  if (!(e.tau > 0.0)) cfg.fail("score", "tau", "must be > 0");
  e.epsilon = cfg.get_double("score", "epsilon", 0.0);
  if (e.epsilon < 0.0) cfg.fail("score", "epsilon", "must be >= 0");
  if (e.epsilon > 0.0 && e.score_kind != "perturbed")
    cfg.fail("score", "epsilon", "requires kind = perturbed");
  e.omega = cfg.get_double("score", "omega", 1.0);
  if (!(e.omega > 0.0)) cfg.fail("score", "omega", "must be > 0");

  // [sampler]
  e.alpha = cfg.get_double("sampler", "alpha", 1.0);
  if (!(e.alpha > 0.0)) cfg.fail("sampler", "alpha", "must be > 0");
  e.schedule = cfg.get_string("sampler", "schedule", std::string("constant"));
  if (e.schedule == "constant") {
    e.gamma = cfg.get_double("sampler", "gamma");
    if (!(e.gamma > 0.0)) cfg.fail("sampler", "gamma", "must be > 0");
  } else if (e.schedule == "geometric" || e.schedule == "polynomial") {
    e.gamma_start = cfg.get_double("sampler", "gamma_start");
    e.gamma_end = cfg.get_double("sampler", "gamma_end");
    if (!(e.gamma_start >= e.gamma_end && e.gamma_end > 0.0))
      cfg.fail("sampler", "gamma_start", "need gamma_start >= gamma_end > 0");
    if (e.schedule == "polynomial") {
      e.exponent = cfg.get_double("sampler", "exponent", 0.55);
      if (!(e.exponent > 0.0)) cfg.fail("sampler", "exponent", "must be > 0");
    }
  } else {
    cfg.fail("sampler", "schedule",
             "expected constant, geometric or polynomial");
  }
  e.n_iters = static_cast<std::size_t>(cfg.get_u64("sampler", "n_iters"));
  if (e.n_iters < 1) cfg.fail("sampler", "n_iters", "must be >= 1");
  e.burn_in = static_cast<std::size_t>(cfg.get_u64("sampler", "burn_in", 0));
  if (e.burn_in >= e.n_iters)
    cfg.fail("sampler", "burn_in", "must be < n_iters");
  e.lag = static_cast<std::size_t>(cfg.get_u64("sampler", "lag", 1));
  if (e.lag < 1) cfg.fail("sampler", "lag", "must be >= 1");
  e.seed = cfg.get_u64("sampler", "seed", 0);
  e.chains = static_cast<std::size_t>(cfg.get_u64("sampler", "chains", 1));
  if (e.chains < 1) cfg.fail("sampler", "chains", "must be >= 1");
  e.init = cfg.get_string("sampler", "init", std::string("prior"));
  if (e.init != "prior" && e.init != "zero")
    cfg.fail("sampler", "init", "expected prior or zero");
  e.annealing = cfg.get_onoff("sampler", "annealing", false);
  if (e.annealing) {
    e.eta_start = cfg.get_double("sampler", "eta_start");
    e.tau_start = cfg.get_double("sampler", "tau_start");
    e.tau_end = cfg.get_double("sampler", "tau_end");
    e.n_anneal =
        static_cast<std::size_t>(cfg.get_u64("sampler", "n_anneal"));
    if (!(e.eta_start >= 1.0)) cfg.fail("sampler", "eta_start", "must be >= 1");
    if (!(e.tau_end > 0.0))
      cfg.fail("sampler", "tau_end",
               "must be > 0 (the score target is unstable at tau = 0)");
    if (!(e.tau_start >= e.tau_end))
      cfg.fail("sampler", "tau_start", "need tau_start >= tau_end");
  }
  e.stochastic_batch =
      static_cast<std::size_t>(cfg.get_u64("sampler", "stochastic_batch", 0));
  e.divergence_ceiling =
      cfg.get_double("sampler", "divergence_ceiling", 1e8);
  if (!(e.divergence_ceiling > 0.0))
    cfg.fail("sampler", "divergence_ceiling", "must be > 0");
  e.lipschitz_hint = cfg.get_double("sampler", "lipschitz_hint", 0.0);

  // [diagnostics]
  const std::string oracle =
      cfg.get_string("diagnostics", "oracle", std::string("auto"));
  if (oracle != "auto" && oracle != "off")
    cfg.fail("diagnostics", "oracle", "expected auto or off");
  e.oracle_compare = oracle == "auto";
  e.grid_kl_on = cfg.get_onoff("diagnostics", "grid_kl", false);
  if (e.grid_kl_on) {
    auto parse_range = [&](const char* key, double& lo, double& hi) {
      const std::string text = cfg.get_string("diagnostics", key);
      const auto colon = text.find(':');
      if (colon == std::string::npos)
        cfg.fail("diagnostics", key, "expected low:high");
      char* end = nullptr;
      lo = std::strtod(text.substr(0, colon).c_str(), &end);
      hi = std::strtod(text.substr(colon + 1).c_str(), &end);
      if (!(hi > lo)) cfg.fail("diagnostics", key, "expected low < high");
    };
    parse_range("grid_x", e.grid_x_min, e.grid_x_max);
    parse_range("grid_y", e.grid_y_min, e.grid_y_max);
    e.grid_resolution = static_cast<std::size_t>(
        cfg.get_u64("diagnostics", "grid_resolution", 512));
    e.kl_bins =
        static_cast<std::size_t>(cfg.get_u64("diagnostics", "kl_bins", 32));
    if (e.grid_resolution < 64)
      cfg.fail("diagnostics", "grid_resolution", "must be >= 64");
    if (e.kl_bins < 2 || e.grid_resolution % e.kl_bins != 0)
      cfg.fail("diagnostics", "kl_bins",
               "must be >= 2 and divide grid_resolution");
    if (e.dim < 2)
      cfg.fail("diagnostics", "grid_kl", "needs a two-dimensional state");
  }
  e.bound_on = cfg.get_onoff("diagnostics", "bound", true);
  e.mismatch_probes = static_cast<std::size_t>(
      cfg.get_u64("diagnostics", "mismatch_probes", 16));
  if (cfg.has("diagnostics", "kl0"))
    e.kl0_override = cfg.get_double("diagnostics", "kl0");

  // [output]
  e.output_directory =
      cfg.get_string("output", "directory", std::string("out"));
  e.checkpoints = cfg.get_onoff("output", "checkpoints", false);

  return e;
}

std::string ExperimentConfig::to_manifest(std::size_t threads) const {
  std::ostringstream out;
  out << "# resolved run manifest; re-running this file reproduces the run\n";
  out << "[problem]\n";
  out << "name = " << problem << "\n";
  if (problem == "mode_observation" || problem == "quadratic_map") {
    out << "d0 = " << d0 << "\n";
    out << "sigma2 = " << fmt_double(sigma2) << "\n";
    out << "observation = ";
    for (std::size_t i = 0; i < observation.size(); ++i)
      out << (i ? ", " : "") << fmt_double(observation[i]);
    out << "\n";
    if (synthesize_seed)
      out << "# observation synthesized with seed " << *synthesize_seed
          << "\n";
  }
  out << "\n[prior]\n";
  out << "law = " << prior_law << "\n";
  if (prior_law == "power") out << "s = " << fmt_double(prior_s) << "\n";
  out << "scale = " << fmt_double(prior_scale) << "\n";
  out << "dim = " << dim << "\n";
  out << "\n[score]\n";
  out << "kind = " << score_kind << "\n";
  out << "law = " << score_law << "\n";
  if (score_law == "power") out << "s = " << fmt_double(score_s) << "\n";
  out << "scale = " << fmt_double(score_scale) << "\n";
  out << "tau = " << fmt_double(tau) << "\n";
  if (score_kind == "perturbed") {
    out << "epsilon = " << fmt_double(epsilon) << "\n";
    out << "omega = " << fmt_double(omega) << "\n";
  }
  out << "\n[sampler]\n";
  out << "alpha = " << fmt_double(alpha) << "\n";
  out << "schedule = " << schedule << "\n";
  if (schedule == "constant") {
    out << "gamma = " << fmt_double(gamma) << "\n";
  } else {
    out << "gamma_start = " << fmt_double(gamma_start) << "\n";
    out << "gamma_end = " << fmt_double(gamma_end) << "\n";
    if (schedule == "polynomial")
      out << "exponent = " << fmt_double(exponent) << "\n";
  }
  out << "n_iters = " << n_iters << "\n";
  out << "burn_in = " << burn_in << "\n";
  out << "lag = " << lag << "\n";
  out << "seed = " << seed << "\n";
  out << "chains = " << chains << "\n";
  out << "init = " << init << "\n";
  out << "annealing = " << (annealing ? "on" : "off") << "\n";
  if (annealing) {
    out << "eta_start = " << fmt_double(eta_start) << "\n";
    out << "tau_start = " << fmt_double(tau_start) << "\n";
    out << "tau_end = " << fmt_double(tau_end) << "\n";
    out << "n_anneal = " << n_anneal << "\n";
  }
  out << "stochastic_batch = " << stochastic_batch << "\n";
  out << "divergence_ceiling = " << fmt_double(divergence_ceiling) << "\n";
  if (lipschitz_hint > 0.0)
    out << "lipschitz_hint = " << fmt_double(lipschitz_hint) << "\n";
  out << "\n[diagnostics]\n";
  out << "oracle = " << (oracle_compare ? "auto" : "off") << "\n";
  out << "grid_kl = " << (grid_kl_on ? "on" : "off") << "\n";
  if (grid_kl_on) {
    out << "grid_x = " << fmt_double(grid_x_min) << ":"
        << fmt_double(grid_x_max) << "\n";
    out << "grid_y = " << fmt_double(grid_y_min) << ":"
        << fmt_double(grid_y_max) << "\n";
    out << "grid_resolution = " << grid_resolution << "\n";
    out << "kl_bins = " << kl_bins << "\n";
  }
  out << "bound = " << (bound_on ? "on" : "off") << "\n";
  out << "mismatch_probes = " << mismatch_probes << "\n";
  if (kl0_override) out << "kl0 = " << fmt_double(*kl0_override) << "\n";
  out << "\n[output]\n";
  out << "directory = " << output_directory << "\n";
  out << "checkpoints = " << (checkpoints ? "on" : "off") << "\n";
  out << "threads = " << threads << "\n";
  return out.str();
}

}  // namespace fsl::cli
