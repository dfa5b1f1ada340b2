// kfrac: evaluate the generalized k-fractional integral and check the
// weighted Chebyshev-type inequalities from the command line.
//
// Exit codes: 0 success (all trials hold), 1 a check or trial failed,
// 2 bad flags, config, expression text or parameters.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kfrac/kfrac.hpp"
#include "kfrac/trials.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failed = 1;
constexpr int exit_usage = 2;

std::string format(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw kfrac::ConfigError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw kfrac::ConfigError("'" + path + "': " + e.what());
  }
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw kfrac::ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw kfrac::ConfigError("write to '" + path + "' failed");
}

struct ParamFlags {
  std::optional<double> alpha, beta, eta, mu, k;

  void add(CLI::App* app, const kfrac::ParamNames& names, bool with_k) {
    app->add_option(std::string("--") + names.alpha, alpha);
    app->add_option(std::string("--") + names.beta, beta);
    app->add_option(std::string("--") + names.eta, eta);
    app->add_option(std::string("--") + names.mu, mu);
    if (with_k) app->add_option("--k", k);
  }

  bool any() const { return alpha || beta || eta || mu || k; }

  void apply(kfrac::OperatorParams& p) const {
    if (alpha) p.alpha = *alpha;
    if (beta) p.beta = *beta;
    if (eta) p.eta = *eta;
    if (mu) p.mu = *mu;
    if (k) p.k = *k;
  }
};

// integrate ---------------------------------------------------------------

struct IntegrateArgs {
  std::string f;
  ParamFlags params;
  double t = 1.0;
  std::optional<int> n;
  bool json = false;
};

int run_integrate(const IntegrateArgs& a) {
  const kfrac::Expr f = kfrac::Expr::parse(a.f);
  kfrac::OperatorParams p;
  a.params.apply(p);
  const kfrac::OperatorInstance op(p, a.t, a.n.value_or(kfrac::default_node_count()));
  const auto result = kfrac::kfrac_integral(f, op);
  if (a.json) {
    nlohmann::ordered_json j;
    j["value"] = result.value;
    j["flags"] = result.flags;
    j["refinement-delta"] = std::isnan(result.refinement_delta)
                                ? nlohmann::ordered_json()
                                : nlohmann::ordered_json(result.refinement_delta);
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << format(result.value) << '\n';
    for (const auto& flag : result.flags) std::cout << "flag: " << flag << '\n';
    if (!std::isnan(result.refinement_delta)) {
      std::cout << "refinement-delta: " << format(result.refinement_delta) << '\n';
    }
  }
  return exit_ok;
}

// check -------------------------------------------------------------------

struct CheckArgs {
  std::string config;
  std::optional<std::string> theorem, direction;
  std::optional<std::string> f, g, h, x, y, r, p, q;
  ParamFlags params1;
  ParamFlags params2;
  std::optional<double> t;
  std::optional<int> n;
  double tol_rel = 1e-9;
  double tol_abs = 1e-12;
  bool json = false;
};

int run_check(const CheckArgs& a) {
  kfrac::InequalityCase c;
  if (!a.config.empty()) kfrac::apply_json(c, read_json_file(a.config));
  if (a.theorem) {
    const auto t = kfrac::parse_theorem(*a.theorem);
    if (!t) throw kfrac::ConfigError("unknown theorem '" + *a.theorem + "'");
    c.theorem = *t;
  }
  if (a.direction) {
    if (*a.direction != "standard" && *a.direction != "reversed") {
      throw kfrac::ConfigError("unknown direction '" + *a.direction + "'");
    }
    c.direction = *a.direction == "standard" ? kfrac::Direction::standard
                                             : kfrac::Direction::reversed;
  }
  const auto set = [](std::map<std::string, kfrac::Expr>& m, const char* name,
                      const std::optional<std::string>& text) {
    if (text) m.insert_or_assign(name, kfrac::Expr::parse(*text));
  };
  set(c.functions, "f", a.f);
  set(c.functions, "g", a.g);
  set(c.functions, "h", a.h);
  set(c.weights, "x", a.x);
  set(c.weights, "y", a.y);
  set(c.weights, "r", a.r);
  set(c.weights, "p", a.p);
  set(c.weights, "q", a.q);
  if (a.t) c.t = *a.t;
  a.params1.apply(c.params1);
  if (a.params2.any() || (kfrac::needs_two_operators(c.theorem) && !c.params2)) {
    kfrac::OperatorParams p2 = c.params2.value_or(c.params1);
    a.params2.apply(p2);
    p2.k = c.params1.k;
    c.params2 = p2;
  } else if (c.params2) {
    c.params2->k = c.params1.k;
  }
  // drop slots the theorem does not use so that the echo is exact
  if (!kfrac::needs_two_operators(c.theorem)) c.params2.reset();

  kfrac::CheckOptions opt;
  opt.n = a.n.value_or(kfrac::default_node_count());
  opt.tol_rel = a.tol_rel;
  opt.tol_abs = a.tol_abs;
  const auto report = kfrac::check(c, opt);
  if (a.json) {
    std::cout << kfrac::to_json(report).dump(2) << '\n';
  } else {
    std::cout << "theorem: " << kfrac::to_string(c.theorem) << " ("
              << kfrac::to_string(c.direction) << ")\n"
              << "lhs: " << format(report.lhs) << '\n'
              << "rhs: " << format(report.rhs) << '\n'
              << "margin: " << format(report.margin) << '\n'
              << "scale: " << format(report.scale) << '\n'
              << "holds: " << (report.holds ? "true" : "false") << '\n';
    if (report.reversal_condition) {
      std::cout << "reversal-condition: " << kfrac::to_string(*report.reversal_condition) << '\n';
    }
    for (const auto& flag : report.flags) std::cout << "flag: " << flag << '\n';
  }
  return report.holds ? exit_ok : exit_failed;
}

// verify ------------------------------------------------------------------

struct VerifyArgs {
  std::string config;
  std::optional<std::string> theorem, direction, reversal_condition;
  std::optional<int> trials, quadrature_n, threads;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_rel, tol_abs, flag_threshold;
  std::vector<double> t_range, beta_range, mu_range, k_range, alpha_margin_range;
  std::string format = "json";
  std::string out;
  bool quiet = false;
};

int run_verify(const VerifyArgs& a) {
  kfrac::TrialConfig c;
  if (!a.config.empty()) kfrac::apply_json(c, read_json_file(a.config));

  nlohmann::json overrides = nlohmann::json::object();
  if (a.theorem) overrides["theorem"] = *a.theorem;
  if (a.direction) overrides["direction"] = *a.direction;
  if (a.reversal_condition) overrides["reversal-condition"] = *a.reversal_condition;
  if (a.trials) overrides["trials"] = *a.trials;
  if (a.quadrature_n) overrides["quadrature-n"] = *a.quadrature_n;
  if (a.threads) overrides["threads"] = *a.threads;
  if (a.seed) overrides["seed"] = *a.seed;
  if (a.tol_rel) overrides["tol-rel"] = *a.tol_rel;
  if (a.tol_abs) overrides["tol-abs"] = *a.tol_abs;
  if (a.flag_threshold) overrides["flag-threshold"] = *a.flag_threshold;
  if (!a.t_range.empty()) overrides["t-range"] = a.t_range;
  if (!a.beta_range.empty()) overrides["beta-range"] = a.beta_range;
  if (!a.mu_range.empty()) overrides["mu-range"] = a.mu_range;
  if (!a.k_range.empty()) overrides["k-range"] = a.k_range;
  if (!a.alpha_margin_range.empty()) overrides["alpha-margin-range"] = a.alpha_margin_range;
  kfrac::apply_json(c, overrides);

  const auto summary = kfrac::run_trials(c);

  std::ostringstream text;
  if (a.format == "json") {
    text << kfrac::to_json(summary).dump(2) << '\n';
  } else if (a.format == "csv") {
    kfrac::write_csv(summary, text);
  } else {
    kfrac::write_plot_csv(summary, text);
  }
  write_output(a.out, text.str());
  if (!a.quiet) {
    std::cerr << kfrac::to_string(c.theorem) << " " << kfrac::to_string(c.direction) << ": "
              << summary.hold << " hold, " << summary.fail << " fail, "
              << summary.ill_conditioned << " ill-conditioned of " << c.trials << '\n';
  }
  return summary.fail == 0 ? exit_ok : exit_failed;
}

// table -------------------------------------------------------------------

struct TableArgs {
  ParamFlags params;
  double t = 1.0;
  std::vector<double> sigma{0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  std::vector<int> n{8, 16, 32, 64, 128};
  bool csv = false;
};

int run_table(const TableArgs& a) {
  kfrac::OperatorParams p;
  a.params.apply(p);
  kfrac::validate(p);
  std::vector<kfrac::OperatorInstance> ops;
  for (int n : a.n) ops.emplace_back(p, a.t, n);
  if (a.csv) {
    std::cout << "sigma,n,quadrature,closed-form,rel-error\n";
  } else {
    std::printf("%8s %6s %24s %24s %10s\n", "sigma", "n", "quadrature", "closed-form", "rel-error");
  }
  for (double sigma : a.sigma) {
    const double exact = kfrac::monomial_image(p, a.t, sigma);
    const kfrac::Expr f = kfrac::Expr::power(kfrac::Expr::identity(), (p.k + 1.0) * sigma);
    for (const auto& op : ops) {
      const double value = op.apply(f).value;
      const double rel = std::abs(value - exact) / std::abs(exact);
      if (a.csv) {
        std::cout << format(sigma) << ',' << op.node_count() << ',' << format(value) << ','
                  << format(exact) << ',' << format(rel) << '\n';
      } else {
        std::printf("%8.4g %6d %24.17g %24.17g %10.3e\n", sigma, op.node_count(), value, exact, rel);
      }
    }
  }
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized k-fractional integrals and weighted Chebyshev-type inequalities"};
  app.require_subcommand(1);

  IntegrateArgs ia;
  auto* integrate = app.add_subcommand("integrate", "Evaluate the operator applied to one function");
  integrate->add_option("--f", ia.f, "Function in s-expression syntax, x is tau")->required();
  ia.params.add(integrate, kfrac::primary_names, true);
  integrate->add_option("--t", ia.t, "Upper limit t > 0");
  integrate->add_option("--n", ia.n, "Quadrature node count (default 64 or KFRAC_QUAD_N)");
  integrate->add_flag("--json", ia.json, "Print JSON");

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "Check one inequality case");
  check->set_help_flag("--help", "Print this help message and exit");  // --h is the function h
  check->add_option("--config", ca.config, "JSON case file; flags override it");
  check->add_option("--theorem", ca.theorem, "lemma31, thm32, lemma33, thm34, thm41 or thm42");
  check->add_option("--direction", ca.direction, "standard or reversed");
  for (auto [name, slot] : {std::pair{"--f", &ca.f}, {"--g", &ca.g}, {"--h", &ca.h},
                            {"--x", &ca.x}, {"--y", &ca.y}, {"--r", &ca.r}, {"--p", &ca.p},
                            {"--q", &ca.q}}) {
    check->add_option(name, *slot);
  }
  ca.params1.add(check, kfrac::primary_names, true);
  ca.params2.add(check, kfrac::secondary_names, false);
  check->add_option("--t", ca.t, "Upper limit t > 0");
  check->add_option("--n", ca.n, "Quadrature node count");
  check->add_option("--tol-rel", ca.tol_rel);
  check->add_option("--tol-abs", ca.tol_abs);
  check->add_flag("--json", ca.json, "Print the report as JSON");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Run a seeded randomized campaign");
  verify->add_option("--config", va.config, "JSON TrialConfig file; flags override it");
  verify->add_option("--theorem", va.theorem);
  verify->add_option("--direction", va.direction);
  verify->add_option("--reversal-condition", va.reversal_condition,
                     "asynchronous, negative or mixed");
  verify->add_option("--trials", va.trials);
  verify->add_option("--seed", va.seed);
  verify->add_option("--quadrature-n", va.quadrature_n);
  verify->add_option("--tol-rel", va.tol_rel);
  verify->add_option("--tol-abs", va.tol_abs);
  verify->add_option("--flag-threshold", va.flag_threshold);
  verify->add_option("--threads", va.threads);
  verify->add_option("--t-range", va.t_range)->expected(2);
  verify->add_option("--beta-range", va.beta_range)->expected(2);
  verify->add_option("--mu-range", va.mu_range)->expected(2);
  verify->add_option("--k-range", va.k_range)->expected(2);
  verify->add_option("--alpha-margin-range", va.alpha_margin_range)->expected(2);
  verify->add_option("--format", va.format)->check(CLI::IsMember({"json", "csv", "plot"}));
  verify->add_option("--out", va.out, "Output path, '-' or empty for stdout");
  verify->add_flag("--quiet", va.quiet, "No summary line on stderr");

  TableArgs ta;
  auto* table = app.add_subcommand("table", "Closed-form monomial images against quadrature");
  ta.params.add(table, kfrac::primary_names, true);
  table->add_option("--t", ta.t);
  table->add_option("--sigma", ta.sigma, "Exponents sigma >= 0 of tau^((k+1) sigma)");
  table->add_option("--n", ta.n, "Node counts");
  table->add_flag("--csv", ta.csv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (*integrate) return run_integrate(ia);
    if (*check) return run_check(ca);
    if (*verify) return run_verify(va);
    if (*table) return run_table(ta);
  } catch (const kfrac::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const kfrac::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const kfrac::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const kfrac::HypothesisError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const kfrac::ConditionClassificationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const kfrac::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_failed;
  }
  return exit_usage;
}
