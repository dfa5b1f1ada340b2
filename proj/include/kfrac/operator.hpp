#pragma once

/// \file operator.hpp
/// The generalized k-fractional integral with Gauss hypergeometric kernel,
///
///   I[f](t) = (k+1)^(mu+beta+1) t^((k+1)(-alpha-beta-2mu)) / Gamma(alpha)
///             * int_0^t tau^((k+1)mu) (t^(k+1) - tau^(k+1))^(alpha-1)
///               2F1(alpha+beta+mu, -eta; alpha; 1 - (tau/t)^(k+1)) tau^k f(tau) dtau,
///
/// and the generalized Riemann-Liouville integral it reduces to when
/// beta = -alpha and mu = 0.
///
/// With s = (tau/t)^(k+1) the integral becomes
///
///   (k+1)^(mu+beta) t^((k+1)(-beta-mu)) / Gamma(alpha)
///     * int_0^1 s^mu (1-s)^(alpha-1) H(s) f(t s^(1/(k+1))) ds,   H(s) = 2F1(...; 1-s).
///
/// An OperatorInstance discretizes that integral once into a positive
/// measure {tau_i, W_i}; applying the operator to f is then sum W_i f(tau_i).

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "kfrac/error.hpp"
#include "kfrac/expr.hpp"
#include "kfrac/quadrature.hpp"
#include "kfrac/special_functions.hpp"

namespace kfrac {

/// (alpha, beta, eta, mu, k) of one operator instance. The second instance in
/// the two-operator results, (gamma, delta, zeta, upsilon, k), uses this type too.
struct OperatorParams {
  double alpha = 1.0;
  double beta = -1.0;
  double eta = -0.5;
  double mu = 0.0;
  double k = 0.0;

  bool operator==(const OperatorParams&) const = default;
};

/// Display names used in constraint messages.
struct ParamNames {
  const char* alpha;
  const char* beta;
  const char* eta;
  const char* mu;
};

inline constexpr ParamNames primary_names{"alpha", "beta", "eta", "mu"};
inline constexpr ParamNames secondary_names{"gamma", "delta", "zeta", "upsilon"};

/// Constraints of the admissible region that `p` violates, verbatim:
/// k >= 0, alpha > max{0,-beta-mu}, beta < 1, mu > -1, beta-1 < eta < 0.
/// The face alpha = -beta-mu > 0 is admitted: there the 2F1 factor is 1 and the
/// operator is the generalized Riemann-Liouville integral (beta = -alpha, mu = 0).
inline std::vector<std::string> violated_constraints(const OperatorParams& p,
                                                     const ParamNames& names = primary_names) {
  std::vector<std::string> out;
  const std::string al = names.alpha, be = names.beta, et = names.eta, mu = names.mu;
  for (double v : {p.alpha, p.beta, p.eta, p.mu, p.k}) {
    if (!std::isfinite(v)) {
      out.push_back("parameters must be finite");
      return out;
    }
  }
  if (!(p.k >= 0.0)) out.push_back("k >= 0");
  if (!(p.alpha > 0.0 && p.alpha >= -p.beta - p.mu)) {
    out.push_back(al + " > max{0,-" + be + "-" + mu + "}");
  }
  if (!(p.beta < 1.0)) out.push_back(be + " < 1");
  if (!(p.mu > -1.0)) out.push_back(mu + " > -1");
  if (!(p.beta - 1.0 < p.eta && p.eta < 0.0)) out.push_back(be + "-1 < " + et + " < 0");
  return out;
}

inline bool is_valid(const OperatorParams& p) { return violated_constraints(p).empty(); }

/// Throws ParameterDomainError naming every violated constraint.
inline void validate(const OperatorParams& p, const ParamNames& names = primary_names) {
  const auto violations = violated_constraints(p, names);
  if (violations.empty()) return;
  std::string message;
  for (const auto& v : violations) {
    if (!message.empty()) message += "; ";
    message += v + " violated";
  }
  throw ParameterDomainError(message);
}

/// Conditioning flags attached to operator evaluations.
namespace flags {
/// eta - beta - mu <= 0: the hypergeometric factor is unbounded as tau -> 0.
inline constexpr const char* endpoint_divergent = "2f1-endpoint-divergent";
/// eta - beta - mu within 1e-8 of an integer: the connection formula switched to
/// its logarithmic limit form. Informational, the accuracy is unchanged.
inline constexpr const char* degenerate_connection = "2f1-degenerate-connection";
/// Part of the measure sits at tau below the smallest normal double.
inline constexpr const char* tau_underflow = "tau-underflow";
/// n and 2n discretizations disagree by more than the refinement threshold.
inline constexpr const char* refinement_delta = "n-refinement-delta";
}  // namespace flags

inline constexpr int default_quadrature_n = 64;
inline constexpr double refinement_threshold = 1e-9;

/// Node count for operator evaluations: 64 unless KFRAC_QUAD_N is set.
inline int default_node_count() {
  if (const char* env = std::getenv("KFRAC_QUAD_N")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value >= 1 && value <= 4096) return static_cast<int>(value);
  }
  return default_quadrature_n;
}

struct KernelValue {
  double value = 0.0;
  /// tau within 1e-12 t of 0 or t, where the closed form is singular.
  bool near_endpoint = false;
};

/// Kernel F(t, tau) of the operator in closed form (prefactor, powers and the
/// 2F1 factor), so that I[f](t) = int_0^t F(t, tau) tau^k f(tau) dtau.
inline KernelValue kernel_F(double t, double tau, const OperatorParams& p) {
  validate(p);
  if (!(t > 0.0)) throw DomainError("kernel_F: t must be positive");
  if (!(tau > 0.0 && tau < t)) throw DomainError("kernel_F: tau must lie in (0, t)");
  const double kp1 = p.k + 1.0;
  const double s = std::pow(tau / t, kp1);
  const double a = p.alpha + p.beta + p.mu;
  const double hyper = gauss_2f1_complement(a, -p.eta, p.alpha, s);
  const double t_kp1 = std::pow(t, kp1);
  const double value = std::pow(kp1, p.mu + p.beta + 1.0) *
                       std::pow(t, kp1 * (-p.alpha - p.beta - 2.0 * p.mu)) / gamma(p.alpha) *
                       std::pow(tau, kp1 * p.mu) * std::pow(t_kp1 * (1.0 - s), p.alpha - 1.0) *
                       hyper;
  const bool near = tau <= 1e-12 * t || tau >= t * (1.0 - 1e-12);
  return {value, near};
}

/// Discretized operator: I[f] ~ sum weight[i] * f(tau[i]).
struct Measure {
  std::vector<double> tau;
  std::vector<double> weight;
  bool degenerate = false;
  /// Share of the total weight placed at nodes whose tau underflowed.
  double underflow_fraction = 0.0;
};

/// How the s-integral is discretized.
enum class Scheme {
  /// Composite rule: Gauss-Jacobi on [1/2, 1] with weight (1-s)^(alpha-1), and
  /// on [0, 1/2] the variable u = (2s)^nu with geometrically graded
  /// Gauss-Legendre panels. Absorbs every power-type singularity at s = 0.
  graded,
  /// Single Gauss-Jacobi rule with p = mu, q = alpha - 1 applied to H(s) f.
  jacobi,
};

namespace detail {

/// s-integrand int_0^1 s^mu (1-s)^(alpha-1) H(s) f(t s^(1/(k+1))) ds times exp(log_prefactor).
struct SubstitutedKernel {
  double mu;
  double alpha;
  double k;
  double t;
  double log_prefactor;
  bool hypergeometric;  // H = 1 when false
  double a;
  double b;
  double c;
};

/// Exponent of the u-substitution on [0, 1/2]: the smallest power of s seen at
/// s = 0, plus one, capped at 1.
inline double graded_nu(const SubstitutedKernel& kernel) {
  double nu = std::min(1.0, kernel.mu + 1.0);
  if (kernel.hypergeometric && kernel.a != 0.0 && kernel.b != 0.0 &&
      !is_nonpositive_integer(kernel.a) && !is_nonpositive_integer(kernel.b)) {
    const double g = kernel.c - kernel.a - kernel.b;
    if (g < 0.0) nu = std::min(nu, kernel.mu + 1.0 + g);
  }
  return nu;
}

inline constexpr int graded_u_levels = 30;
inline constexpr int graded_s_levels = 40;
inline constexpr int graded_s_levels_max = 1000;

// Panels geometric in u and in s. For small nu the s levels are extended until
// they reach u = 1/2, otherwise powers of s in f are under-resolved near u = 1.
inline std::vector<double> graded_breakpoints(double nu) {
  std::vector<double> points{0.0, 1.0};
  for (int i = 1; i <= graded_u_levels; ++i) points.push_back(std::ldexp(1.0, -i));
  const int s_levels = static_cast<int>(
      std::clamp(std::ceil(1.0 / nu) + 1.0, double{graded_s_levels}, double{graded_s_levels_max}));
  for (int j = 1; j <= s_levels; ++j) points.push_back(std::exp2(-j * nu));
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

class MeasureBuilder {
 public:
  explicit MeasureBuilder(const SubstitutedKernel& kernel) : kernel_(kernel) {}

  void add(double tau, double weight) {
    if (weight == 0.0) return;
    total_ += std::abs(weight);
    if (!(tau >= DBL_MIN)) {
      tau = DBL_MIN;
      underflow_ += std::abs(weight);
    }
    measure_.tau.push_back(tau);
    measure_.weight.push_back(weight);
  }

  /// Weight at a node given log of the non-hypergeometric factors and log s.
  double hyper_weight(double log_base, double s, double log_s) {
    if (!kernel_.hypergeometric) return std::exp(log_base);
    const auto expansion = connection_expansion(kernel_.a, kernel_.b, kernel_.c, s, log_s);
    measure_.degenerate = measure_.degenerate || expansion.degenerate;
    double w = 0.0;
    for (int i = 0; i < expansion.count; ++i) {
      const auto& term = expansion.terms[static_cast<std::size_t>(i)];
      w += term.coefficient * std::exp(log_base + term.exponent * log_s);
    }
    return w;
  }

  double direct_hyper(double z) {
    if (!kernel_.hypergeometric) return 1.0;
    const auto r = gauss_2f1_with_info({kernel_.a, kernel_.b, kernel_.c, z});
    measure_.degenerate = measure_.degenerate || r.degenerate;
    return r.value;
  }

  double complement_hyper(double s) {
    const auto expansion = connection_expansion(kernel_.a, kernel_.b, kernel_.c, s);
    measure_.degenerate = measure_.degenerate || expansion.degenerate;
    return expansion.evaluate(s);
  }

  Measure finish() {
    measure_.underflow_fraction = total_ > 0.0 ? underflow_ / total_ : 0.0;
    return std::move(measure_);
  }

 private:
  const SubstitutedKernel& kernel_;
  Measure measure_;
  double total_ = 0.0;
  double underflow_ = 0.0;
};

inline Measure graded_measure(const SubstitutedKernel& kernel, int n) {
  MeasureBuilder builder(kernel);
  const double kp1 = kernel.k + 1.0;
  const double log_t = std::log(kernel.t);
  const double prefactor = std::exp(kernel.log_prefactor);

  // s in [1/2, 1]: s = 1 - v/2, (1-s)^(alpha-1) ds = 2^(-alpha) v^(alpha-1) dv.
  const auto right = cached_jacobi_rule(n, kernel.alpha - 1.0, 0.0);
  const double right_scale = prefactor * std::exp2(-kernel.alpha);
  for (std::size_t i = 0; i < right->nodes.size(); ++i) {
    const double v = right->nodes[i];
    const double s = 1.0 - 0.5 * v;
    const double w = right_scale * right->weights[i] * std::pow(s, kernel.mu) *
                     builder.direct_hyper(0.5 * v);
    builder.add(kernel.t * std::pow(s, 1.0 / kp1), w);
  }

  // s in [0, 1/2]: u = (2s)^nu, ds = u^(1/nu - 1) / (2 nu) du. All factors are
  // combined in log space because s can be far below the double range.
  const double nu = graded_nu(kernel);
  const int panel_nodes = std::max(8, n / 4);
  const auto legendre = cached_jacobi_rule(panel_nodes, 0.0, 0.0);
  const auto breakpoints = graded_breakpoints(nu);
  const double log_jacobian = -std::log(2.0 * nu);
  for (std::size_t p = 0; p + 1 < breakpoints.size(); ++p) {
    const double lo = breakpoints[p];
    const double width = breakpoints[p + 1] - lo;
    for (std::size_t j = 0; j < legendre->nodes.size(); ++j) {
      const double u = lo + width * legendre->nodes[j];
      const double log_u = std::log(u);
      const double log_s = log_u / nu - std::numbers::ln2;
      const double s = std::exp(log_s);
      const double log_base = kernel.log_prefactor + std::log(width * legendre->weights[j]) +
                              (1.0 / nu - 1.0) * log_u + log_jacobian + kernel.mu * log_s +
                              (kernel.alpha - 1.0) * std::log1p(-s);
      const double w = builder.hyper_weight(log_base, s, log_s);
      builder.add(std::exp(log_t + log_s / kp1), w);
    }
  }
  return builder.finish();
}

inline Measure jacobi_measure(const SubstitutedKernel& kernel, int n) {
  MeasureBuilder builder(kernel);
  const double kp1 = kernel.k + 1.0;
  const double prefactor = std::exp(kernel.log_prefactor);
  const auto rule = cached_jacobi_rule(n, kernel.mu, kernel.alpha - 1.0);
  for (std::size_t i = 0; i < rule->nodes.size(); ++i) {
    const double s = rule->nodes[i];
    double h = 1.0;
    if (kernel.hypergeometric) {
      h = s >= 0.5 ? builder.direct_hyper(1.0 - s) : builder.complement_hyper(s);
    }
    builder.add(kernel.t * std::pow(s, 1.0 / kp1), prefactor * rule->weights[i] * h);
  }
  return builder.finish();
}

inline Measure build_measure(const SubstitutedKernel& kernel, int n, Scheme scheme) {
  if (n < 1) throw DomainError("operator: node count must be positive");
  return scheme == Scheme::graded ? graded_measure(kernel, n) : jacobi_measure(kernel, n);
}

/// Compensated sum of weight[i] * f(tau[i]).
inline double apply_measure(const Measure& measure, const Expr& f) {
  double sum = 0.0;
  double compensation = 0.0;
  for (std::size_t i = 0; i < measure.tau.size(); ++i) {
    const double term = measure.weight[i] * f(measure.tau[i]);
    const double next = sum + term;
    compensation += std::abs(sum) >= std::abs(term) ? (sum - next) + term : (term - next) + sum;
    sum = next;
  }
  const double value = sum + compensation;
  if (!std::isfinite(value)) throw NonFiniteError("operator: integral is not finite");
  return value;
}

inline SubstitutedKernel kfrac_kernel(const OperatorParams& p, double t) {
  const double kp1 = p.k + 1.0;
  const double log_prefactor = (p.mu + p.beta) * std::log(kp1) +
                               kp1 * (-p.beta - p.mu) * std::log(t) - std::log(gamma(p.alpha));
  return {p.mu, p.alpha, p.k, t, log_prefactor, true, p.alpha + p.beta + p.mu, -p.eta, p.alpha};
}

}  // namespace detail

/// Result of applying an operator to one function.
struct IntegralResult {
  double value = 0.0;
  /// |I_2n - I_n| / |I_2n| when the refinement check ran, NaN otherwise.
  double refinement_delta = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> flags;
};

/// One operator (parameters, upper limit t, node count) discretized once and
/// applied to any number of functions.
class OperatorInstance {
 public:
  OperatorInstance(const OperatorParams& params, double t, int n = default_node_count(),
                   Scheme scheme = Scheme::graded, const ParamNames& names = primary_names)
      : params_(params), t_(t), n_(n), scheme_(scheme) {
    validate(params, names);
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("operator: t must be positive");
    const auto kernel = detail::kfrac_kernel(params, t);
    measure_ = std::make_shared<const Measure>(detail::build_measure(kernel, n, scheme));
    endpoint_divergent_ = params.eta - params.beta - params.mu <= 0.0 &&
                          params.alpha + params.beta + params.mu != 0.0;
    if (endpoint_divergent_) {
      // accuracy has to be demonstrated in this regime: keep a 2n discretization
      refined_ = std::make_shared<const Measure>(detail::build_measure(kernel, 2 * n, scheme));
    }
    if (endpoint_divergent_) flags_.push_back(flags::endpoint_divergent);
    if (measure_->degenerate) flags_.push_back(flags::degenerate_connection);
    if (measure_->underflow_fraction > 1e-12) flags_.push_back(flags::tau_underflow);
  }

  const OperatorParams& params() const { return params_; }
  double t() const { return t_; }
  int node_count() const { return n_; }
  Scheme scheme() const { return scheme_; }
  const Measure& measure() const { return *measure_; }
  bool endpoint_divergent() const { return endpoint_divergent_; }
  const std::vector<std::string>& flags() const { return flags_; }

  IntegralResult apply(const Expr& f) const {
    IntegralResult result;
    result.value = detail::apply_measure(*measure_, f);
    result.flags = flags_;
    if (refined_) {
      const double fine = detail::apply_measure(*refined_, f);
      result.refinement_delta =
          std::abs(fine - result.value) / std::max(std::abs(fine), std::numeric_limits<double>::min());
      if (result.refinement_delta > refinement_threshold) {
        result.flags.push_back(flags::refinement_delta);
      }
    }
    return result;
  }

 private:
  OperatorParams params_;
  double t_;
  int n_;
  Scheme scheme_;
  std::shared_ptr<const Measure> measure_;
  std::shared_ptr<const Measure> refined_;
  bool endpoint_divergent_ = false;
  std::vector<std::string> flags_;
};

/// I^{alpha,beta,eta,mu}_{t,k}[f](t).
inline IntegralResult kfrac_integral(const Expr& f, const OperatorInstance& instance) {
  return instance.apply(f);
}

/// Generalized Riemann-Liouville integral
///   I^{alpha,k} f(x) = (k+1)^(1-alpha) / Gamma(alpha) int_0^x (x^(k+1) - tau^(k+1))^(alpha-1) tau^k f(tau) dtau.
inline double rl_generalized_integral(const Expr& f, double x, double alpha, double k,
                                      int n = default_node_count(),
                                      Scheme scheme = Scheme::graded) {
  if (!(alpha > 0.0)) throw ParameterDomainError("alpha > 0 violated");
  if (!(k >= 0.0)) throw ParameterDomainError("k >= 0 violated");
  if (!(x > 0.0)) throw DomainError("rl_generalized_integral: x must be positive");
  const double kp1 = k + 1.0;
  const double log_prefactor =
      -alpha * std::log(kp1) + kp1 * alpha * std::log(x) - std::log(gamma(alpha));
  const detail::SubstitutedKernel kernel{0.0, alpha, k, x, log_prefactor, false, 0.0, 0.0, 1.0};
  return detail::apply_measure(detail::build_measure(kernel, n, scheme), f);
}

/// Closed-form image of f(tau) = tau^((k+1) sigma), sigma >= 0:
///   (k+1)^(mu+beta) Gamma(mu+sigma+1) Gamma(sigma+1-beta+eta)
///     / (Gamma(sigma+1-beta) Gamma(alpha+mu+sigma+1+eta)) * t^((k+1)(sigma-beta-mu)).
/// Term-wise Beta integrals of the 2F1 series summed by Gauss's theorem.
inline double monomial_image(const OperatorParams& p, double t, double sigma) {
  validate(p);
  if (!(sigma >= 0.0)) throw DomainError("monomial_image: sigma must be nonnegative");
  if (!(t > 0.0)) throw DomainError("monomial_image: t must be positive");
  const double kp1 = p.k + 1.0;
  return std::pow(kp1, p.mu + p.beta) * gamma(p.mu + sigma + 1.0) *
         gamma(sigma + 1.0 - p.beta + p.eta) * rgamma(sigma + 1.0 - p.beta) *
         rgamma(p.alpha + p.mu + sigma + 1.0 + p.eta) *
         std::pow(t, kp1 * (sigma - p.beta - p.mu));
}

}  // namespace kfrac
