#pragma once

/// \file trials.hpp
/// Seeded verification campaigns: sample parameters, functions and weights,
/// run one checker per trial, aggregate, and emit JSON or CSV.
///
/// Needs nlohmann/json (json.hpp) on the include path.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kfrac/error.hpp"
#include "kfrac/functions.hpp"
#include "kfrac/inequalities.hpp"
#include "kfrac/operator.hpp"
#include "kfrac/random.hpp"

namespace kfrac {

struct Range {
  double lo;
  double hi;
};

struct TrialConfig {
  Theorem theorem = Theorem::lemma31;
  int trials = 200;
  std::uint64_t seed = 0;
  Range t_range{0.5, 2.0};
  Range beta_range{-2.0, 0.9};
  Range mu_range{-1.0, 2.0};
  Range k_range{0.0, 3.0};
  Range alpha_margin_range{0.0, 3.0};
  int quadrature_n = default_quadrature_n;
  double tol_rel = 1e-9;
  double tol_abs = 1e-12;
  Direction direction = Direction::standard;
  /// Only read when direction is reversed.
  ReversalCondition reversal_condition = ReversalCondition::asynchronous;
  /// A failing trial with conditioning flags and |margin| < flag_threshold * scale
  /// is counted as ill-conditioned instead of failed.
  double flag_threshold = 1e-6;
  /// 0 picks the hardware concurrency. Does not affect results.
  int threads = 0;
};

/// Throws ConfigError describing the first invalid field.
inline void validate(const TrialConfig& c) {
  const auto range = [](const Range& r, const char* name) {
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || !(r.lo < r.hi)) {
      throw ConfigError(std::string(name) + " must be [lo, hi] with lo < hi");
    }
  };
  if (c.trials < 1) throw ConfigError("trials must be >= 1");
  range(c.t_range, "t-range");
  range(c.beta_range, "beta-range");
  range(c.mu_range, "mu-range");
  range(c.k_range, "k-range");
  range(c.alpha_margin_range, "alpha-margin-range");
  if (!(c.t_range.lo > 0.0)) throw ConfigError("t-range must be positive");
  if (!(c.beta_range.hi < 1.0)) throw ConfigError("beta-range must lie below 1");
  if (!(c.mu_range.lo >= -1.0)) throw ConfigError("mu-range must lie above -1");
  if (!(c.k_range.lo >= 0.0)) throw ConfigError("k-range must be nonnegative");
  if (!(c.alpha_margin_range.lo >= 0.0)) throw ConfigError("alpha-margin-range must be nonnegative");
  if (c.quadrature_n < 1 || c.quadrature_n > 4096) throw ConfigError("quadrature-n must be in [1, 4096]");
  if (!(c.tol_rel >= 0.0) || !(c.tol_abs >= 0.0)) throw ConfigError("tolerances must be nonnegative");
  if (!(c.flag_threshold >= 0.0)) throw ConfigError("flag-threshold must be nonnegative");
  if (c.threads < 0) throw ConfigError("threads must be >= 0");
  if (c.direction == Direction::reversed && c.theorem != Theorem::thm32 &&
      c.theorem != Theorem::thm34) {
    throw ConfigError("direction reversed is only defined for thm32 and thm34");
  }
}

struct TrialResult {
  int index = 0;
  std::uint64_t seed = 0;
  InequalityCase inputs;
  /// Set unless the checker threw; `error` holds the message then.
  std::optional<InequalityReport> report;
  std::string error;
  bool ill_conditioned = false;
};

struct TrialSummary {
  TrialConfig config;
  std::vector<TrialResult> results;
  int hold = 0;
  int fail = 0;
  int ill_conditioned = 0;
  double min_margin_over_scale = std::numeric_limits<double>::quiet_NaN();
  double max_margin_over_scale = std::numeric_limits<double>::quiet_NaN();
  double wall_time = 0.0;
};

namespace detail {

/// Parameters in the admissible region: alpha = max{0, -beta-mu} + margin,
/// eta uniform in (beta - 1, 0). Draw order: beta, mu, k, margin, eta.
inline OperatorParams sample_params(SplitMix64& rng, const TrialConfig& c) {
  OperatorParams p;
  p.beta = rng.uniform(c.beta_range.lo, c.beta_range.hi);
  p.mu = rng.uniform(c.mu_range.lo, c.mu_range.hi);
  p.k = rng.uniform(c.k_range.lo, c.k_range.hi);
  const double margin = rng.uniform(c.alpha_margin_range.lo, c.alpha_margin_range.hi);
  p.alpha = std::max(0.0, -p.beta - p.mu) + margin;
  p.eta = rng.uniform(p.beta - 1.0, 0.0);
  return p;
}

inline Expr negated(const Expr& e) { return Expr::scale(-1.0, e); }

/// The full case of one trial, a pure function of (config, trial seed).
inline InequalityCase sample_case(const TrialConfig& c, std::uint64_t seed) {
  SplitMix64 rng(seed);
  InequalityCase out;
  out.theorem = c.theorem;
  out.direction = c.direction;
  out.t = rng.uniform(c.t_range.lo, c.t_range.hi);
  out.params1 = sample_params(rng, c);
  if (needs_two_operators(c.theorem)) {
    OperatorParams p2 = sample_params(rng, c);
    p2.k = out.params1.k;
    out.params2 = p2;
  }

  const bool opposite =
      c.direction == Direction::reversed && c.reversal_condition == ReversalCondition::asynchronous;
  const std::uint64_t pair_seed = rng.next();
  auto [f, g] =
      random_monotone_pair(pair_seed, opposite ? PairDirection::opposite : PairDirection::same);
  out.functions.emplace("f", std::move(f));
  out.functions.emplace("g", std::move(g));
  if (c.theorem == Theorem::thm41 || c.theorem == Theorem::thm42) {
    out.functions.emplace("h", random_weight(rng.next()));
  }

  const auto names = required_weights(c.theorem);
  for (const auto& name : names) out.weights.emplace(name, random_weight(rng.next()));
  if (c.direction == Direction::reversed) {
    if (c.reversal_condition == ReversalCondition::negative) {
      for (auto& [name, w] : out.weights) w = negated(w);
    } else if (c.reversal_condition == ReversalCondition::mixed) {
      const auto& name = names[static_cast<std::size_t>(rng.below(names.size()))];
      auto& w = out.weights.at(name);
      w = negated(w);
    }
  }
  return out;
}

inline TrialResult run_one(const TrialConfig& c, int index, std::uint64_t seed) {
  TrialResult r;
  r.index = index;
  r.seed = seed;
  CheckOptions opt;
  opt.n = c.quadrature_n;
  opt.tol_rel = c.tol_rel;
  opt.tol_abs = c.tol_abs;
  try {
    r.inputs = sample_case(c, seed);
    r.report = check(r.inputs, opt);
    const auto& rep = *r.report;
    r.ill_conditioned = !rep.holds && !rep.flags.empty() &&
                        std::abs(rep.margin) < c.flag_threshold * rep.scale;
  } catch (const Error& e) {
    r.report.reset();
    r.error = e.what();
  }
  return r;
}

}  // namespace detail

/// Trial seeds are drawn in order from SplitMix64(config.seed); trial i then
/// samples everything from SplitMix64(seed_i). Results are ordered by index
/// and independent of the thread count.
inline TrialSummary run_trials(const TrialConfig& config) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();

  SplitMix64 master(config.seed);
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(config.trials));
  for (auto& s : seeds) s = master.next();

  TrialSummary summary;
  summary.config = config;
  summary.results.resize(seeds.size());

  unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(seeds.size()));
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      summary.results[i] = detail::run_one(config, static_cast<int>(i), seeds[i]);
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }

  for (const auto& r : summary.results) {
    if (!r.report) {
      ++summary.fail;
      continue;
    }
    if (r.report->holds) {
      ++summary.hold;
    } else if (r.ill_conditioned) {
      ++summary.ill_conditioned;
    } else {
      ++summary.fail;
    }
    const double ratio = r.report->margin / r.report->scale;
    if (std::isnan(summary.min_margin_over_scale) || ratio < summary.min_margin_over_scale) {
      summary.min_margin_over_scale = ratio;
    }
    if (std::isnan(summary.max_margin_over_scale) || ratio > summary.max_margin_over_scale) {
      summary.max_margin_over_scale = ratio;
    }
  }
  summary.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

// JSON --------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const Range& r) { return {r.lo, r.hi}; }

inline nlohmann::ordered_json to_json(const TrialConfig& c) {
  nlohmann::ordered_json j;
  j["theorem"] = to_string(c.theorem);
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["t-range"] = to_json(c.t_range);
  j["beta-range"] = to_json(c.beta_range);
  j["mu-range"] = to_json(c.mu_range);
  j["k-range"] = to_json(c.k_range);
  j["alpha-margin-range"] = to_json(c.alpha_margin_range);
  j["quadrature-n"] = c.quadrature_n;
  j["tol-rel"] = c.tol_rel;
  j["tol-abs"] = c.tol_abs;
  j["direction"] = to_string(c.direction);
  j["reversal-condition"] = to_string(c.reversal_condition);
  j["flag-threshold"] = c.flag_threshold;
  j["threads"] = c.threads;
  return j;
}

namespace detail {

inline Range range_from_json(const nlohmann::json& j, const char* key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(std::string(key) + " must be an array of two numbers");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

/// Reads the keys present in `j` into `c`; unknown keys are rejected.
inline void apply_json(TrialConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "theorem") {
        const auto t = parse_theorem(value.get<std::string>());
        if (!t) throw ConfigError("unknown theorem '" + value.get<std::string>() + "'");
        c.theorem = *t;
      } else if (key == "trials") {
        c.trials = value.get<int>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else if (key == "t-range") {
        c.t_range = detail::range_from_json(value, "t-range");
      } else if (key == "beta-range") {
        c.beta_range = detail::range_from_json(value, "beta-range");
      } else if (key == "mu-range") {
        c.mu_range = detail::range_from_json(value, "mu-range");
      } else if (key == "k-range") {
        c.k_range = detail::range_from_json(value, "k-range");
      } else if (key == "alpha-margin-range") {
        c.alpha_margin_range = detail::range_from_json(value, "alpha-margin-range");
      } else if (key == "quadrature-n") {
        c.quadrature_n = value.get<int>();
      } else if (key == "tol-rel") {
        c.tol_rel = value.get<double>();
      } else if (key == "tol-abs") {
        c.tol_abs = value.get<double>();
      } else if (key == "direction") {
        const auto s = value.get<std::string>();
        if (s != "standard" && s != "reversed") throw ConfigError("unknown direction '" + s + "'");
        c.direction = s == "standard" ? Direction::standard : Direction::reversed;
      } else if (key == "reversal-condition") {
        const auto rc = parse_reversal_condition(value.get<std::string>());
        if (!rc) throw ConfigError("unknown reversal-condition '" + value.get<std::string>() + "'");
        c.reversal_condition = *rc;
      } else if (key == "flag-threshold") {
        c.flag_threshold = value.get<double>();
      } else if (key == "threads") {
        c.threads = value.get<int>();
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline nlohmann::ordered_json to_json(const OperatorParams& p, const ParamNames& names) {
  nlohmann::ordered_json j;
  j[names.alpha] = p.alpha;
  j[names.beta] = p.beta;
  j[names.eta] = p.eta;
  j[names.mu] = p.mu;
  j["k"] = p.k;
  return j;
}

inline nlohmann::ordered_json to_json(const InequalityCase& c) {
  nlohmann::ordered_json j;
  j["theorem"] = to_string(c.theorem);
  j["direction"] = to_string(c.direction);
  j["t"] = c.t;
  j["params1"] = to_json(c.params1, primary_names);
  j["params2"] = c.params2 ? to_json(*c.params2, secondary_names) : nlohmann::ordered_json();
  nlohmann::ordered_json functions = nlohmann::ordered_json::object();
  for (const auto& [name, e] : c.functions) functions[name] = e.to_string();
  j["functions"] = functions;
  nlohmann::ordered_json weights = nlohmann::ordered_json::object();
  for (const auto& [name, e] : c.weights) weights[name] = e.to_string();
  j["weights"] = weights;
  return j;
}

namespace detail {

inline OperatorParams params_from_json(const nlohmann::json& j, const ParamNames& names,
                                       double default_k) {
  if (!j.is_object()) throw ConfigError("parameter set must be a JSON object");
  OperatorParams p;
  for (const auto& [key, value] : j.items()) {
    const double v = value.get<double>();
    if (key == names.alpha) {
      p.alpha = v;
    } else if (key == names.beta) {
      p.beta = v;
    } else if (key == names.eta) {
      p.eta = v;
    } else if (key == names.mu) {
      p.mu = v;
    } else if (key == "k") {
      p.k = v;
    } else {
      throw ConfigError("unknown parameter '" + key + "'");
    }
  }
  if (!j.contains("k")) p.k = default_k;
  return p;
}

inline std::map<std::string, Expr> exprs_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
  std::map<std::string, Expr> out;
  for (const auto& [key, value] : j.items()) out.insert_or_assign(key, Expr::parse(value.get<std::string>()));
  return out;
}

}  // namespace detail

/// Inverse of to_json(InequalityCase). Missing fields keep the values in `c`;
/// a second parameter set without "k" inherits params1's k.
inline void apply_json(InequalityCase& c, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("case must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "theorem") {
        const auto t = parse_theorem(value.get<std::string>());
        if (!t) throw ConfigError("unknown theorem '" + value.get<std::string>() + "'");
        c.theorem = *t;
      } else if (key == "direction") {
        const auto s = value.get<std::string>();
        if (s != "standard" && s != "reversed") throw ConfigError("unknown direction '" + s + "'");
        c.direction = s == "standard" ? Direction::standard : Direction::reversed;
      } else if (key == "t") {
        c.t = value.get<double>();
      } else if (key == "params1") {
        c.params1 = detail::params_from_json(value, primary_names, 0.0);
      } else if (key == "functions") {
        for (auto& [name, e] : detail::exprs_from_json(value, "functions")) c.functions.insert_or_assign(name, e);
      } else if (key == "weights") {
        for (auto& [name, e] : detail::exprs_from_json(value, "weights")) c.weights.insert_or_assign(name, e);
      } else if (key != "params2") {
        throw ConfigError("unknown case key '" + key + "'");
      }
    }
    // after params1, so that k can be inherited
    if (j.contains("params2")) {
      const auto& p2 = j.at("params2");
      if (p2.is_null()) {
        c.params2.reset();
      } else {
        c.params2 = detail::params_from_json(p2, secondary_names, c.params1.k);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("case: ") + e.what());
  }
}

inline nlohmann::ordered_json to_json(const InequalityReport& r) {
  nlohmann::ordered_json j;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["margin"] = r.margin;
  j["scale"] = r.scale;
  j["holds"] = r.holds;
  j["flags"] = r.flags;
  j["refinement-delta"] = std::isnan(r.refinement_delta) ? nlohmann::ordered_json()
                                                         : nlohmann::ordered_json(r.refinement_delta);
  j["reversal-condition"] = r.reversal_condition ? nlohmann::ordered_json(to_string(*r.reversal_condition))
                                                 : nlohmann::ordered_json();
  j["inputs"] = to_json(r.inputs);
  return j;
}

inline nlohmann::ordered_json to_json(const TrialResult& r) {
  nlohmann::ordered_json j;
  j["trial-index"] = r.index;
  j["seed"] = r.seed;
  if (r.report) {
    j["report"] = to_json(*r.report);
    j["ill-conditioned"] = r.ill_conditioned;
  } else {
    j["error"] = r.error;
    j["inputs"] = to_json(r.inputs);
  }
  return j;
}

inline nlohmann::ordered_json to_json(const TrialSummary& s) {
  const auto nullable = [](double v) {
    return std::isnan(v) ? nlohmann::ordered_json() : nlohmann::ordered_json(v);
  };
  nlohmann::ordered_json j;
  j["config"] = to_json(s.config);
  j["counts"] = {{"hold", s.hold}, {"fail", s.fail}, {"ill-conditioned", s.ill_conditioned}};
  j["min-margin-over-scale"] = nullable(s.min_margin_over_scale);
  j["max-margin-over-scale"] = nullable(s.max_margin_over_scale);
  nlohmann::ordered_json trials = nlohmann::ordered_json::array();
  for (const auto& r : s.results) trials.push_back(to_json(r));
  j["trials"] = std::move(trials);
  j["wall-time"] = s.wall_time;
  return j;
}

// CSV ---------------------------------------------------------------------

namespace detail {

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

}  // namespace detail

inline constexpr const char* csv_header =
    "trial-index,theorem,t,alpha,beta,eta,mu,k,gamma,delta,zeta,upsilon,lhs,rhs,margin,scale,holds,"
    "flags";

/// One row per trial. Columns of a missing second parameter set are empty;
/// flags are joined with ';'. A trial whose checker threw has empty values
/// and the flag "error".
inline void write_csv(const TrialSummary& s, std::ostream& out) {
  using detail::csv_number;
  out << csv_header << '\n';
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : s.results) {
    const auto& c = r.inputs;
    out << r.index << ',' << to_string(s.config.theorem) << ',' << csv_number(c.t) << ','
        << csv_number(c.params1.alpha) << ',' << csv_number(c.params1.beta) << ','
        << csv_number(c.params1.eta) << ',' << csv_number(c.params1.mu) << ','
        << csv_number(c.params1.k) << ',';
    const OperatorParams p2 =
        c.params2.value_or(OperatorParams{nan, nan, nan, nan, nan});
    out << csv_number(p2.alpha) << ',' << csv_number(p2.beta) << ',' << csv_number(p2.eta) << ','
        << csv_number(p2.mu) << ',';
    if (r.report) {
      const auto& rep = *r.report;
      std::string flags;
      for (const auto& f : rep.flags) flags += (flags.empty() ? "" : ";") + f;
      out << csv_number(rep.lhs) << ',' << csv_number(rep.rhs) << ',' << csv_number(rep.margin)
          << ',' << csv_number(rep.scale) << ',' << (rep.holds ? "true" : "false") << ','
          << flags << '\n';
    } else {
      out << ",,,,false,error\n";
    }
  }
}

/// Plot data: trial-index and margin / scale.
inline void write_plot_csv(const TrialSummary& s, std::ostream& out) {
  out << "trial-index,margin-over-scale\n";
  for (const auto& r : s.results) {
    out << r.index << ','
        << (r.report ? detail::csv_number(r.report->margin / r.report->scale) : std::string())
        << '\n';
  }
}

}  // namespace kfrac
