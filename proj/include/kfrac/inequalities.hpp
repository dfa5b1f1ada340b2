#pragma once

/// \file inequalities.hpp
/// Weighted Chebyshev-type inequalities for one or two generalized
/// k-fractional operators. Each checker evaluates both sides by quadrature and
/// reports LHS, RHS, margin = LHS - RHS and a verdict.
///
/// With D(x, y) = I[x]I[yfg] + I[y]I[xfg] - I[xf]I[yg] - I[yf]I[xg] the checks are
///
///   lemma31:  D(x, y) >= 0
///   thm32:    I[r]D(p,q) + I[p]D(r,q) + I[q]D(r,p) >= 0
///   lemma33:  D12(x, y) >= 0, D with the x factors under I1 and y factors under I2
///   thm34:    I1[r]D12(p,q) + I1[p]D12(r,q) + I1[q]D12(r,p) >= 0
///   thm41:    sum over the four (h-weighted) Chebyshev pairs of x under I1, x under I2
///   thm42:    thm41 with y under I2
///
/// for synchronous f, g and nonnegative weights. The reversed forms of thm32
/// and thm34 hold for an asynchronous pair, for all-negative weights, or for
/// exactly one negative weight.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "kfrac/error.hpp"
#include "kfrac/expr.hpp"
#include "kfrac/functions.hpp"
#include "kfrac/operator.hpp"

namespace kfrac {

enum class Theorem { lemma31, thm32, lemma33, thm34, thm41, thm42 };

inline constexpr Theorem all_theorems[] = {Theorem::lemma31, Theorem::thm32, Theorem::lemma33,
                                           Theorem::thm34,   Theorem::thm41, Theorem::thm42};

inline const char* to_string(Theorem t) {
  switch (t) {
    case Theorem::lemma31:
      return "lemma31";
    case Theorem::thm32:
      return "thm32";
    case Theorem::lemma33:
      return "lemma33";
    case Theorem::thm34:
      return "thm34";
    case Theorem::thm41:
      return "thm41";
    case Theorem::thm42:
      return "thm42";
  }
  return "?";
}

inline std::optional<Theorem> parse_theorem(std::string_view s) {
  for (Theorem t : all_theorems) {
    if (s == to_string(t)) return t;
  }
  return std::nullopt;
}

inline bool needs_two_operators(Theorem t) {
  return t == Theorem::lemma33 || t == Theorem::thm34 || t == Theorem::thm41 ||
         t == Theorem::thm42;
}

inline std::vector<std::string> required_functions(Theorem t) {
  if (t == Theorem::thm41 || t == Theorem::thm42) return {"f", "g", "h"};
  return {"f", "g"};
}

inline std::vector<std::string> required_weights(Theorem t) {
  switch (t) {
    case Theorem::lemma31:
    case Theorem::lemma33:
    case Theorem::thm42:
      return {"x", "y"};
    case Theorem::thm32:
    case Theorem::thm34:
      return {"r", "p", "q"};
    case Theorem::thm41:
      return {"x"};
  }
  return {};
}

enum class Direction { standard, reversed };

inline const char* to_string(Direction d) {
  return d == Direction::standard ? "standard" : "reversed";
}

/// The three situations in which the three-weight inequalities reverse.
enum class ReversalCondition {
  /// f, g asynchronous; r, p, q nonnegative.
  asynchronous,
  /// f, g synchronous; r, p, q all negative.
  negative,
  /// f, g synchronous; two of r, p, q nonnegative and one negative.
  mixed,
};

inline const char* to_string(ReversalCondition c) {
  switch (c) {
    case ReversalCondition::asynchronous:
      return "asynchronous";
    case ReversalCondition::negative:
      return "negative";
    case ReversalCondition::mixed:
      return "mixed";
  }
  return "?";
}

inline std::optional<ReversalCondition> parse_reversal_condition(std::string_view s) {
  for (auto c : {ReversalCondition::asynchronous, ReversalCondition::negative,
                 ReversalCondition::mixed}) {
    if (s == to_string(c)) return c;
  }
  return std::nullopt;
}

struct InequalityCase {
  Theorem theorem = Theorem::lemma31;
  std::map<std::string, Expr> functions;
  std::map<std::string, Expr> weights;
  double t = 1.0;
  OperatorParams params1;
  std::optional<OperatorParams> params2;
  Direction direction = Direction::standard;
};

struct CheckOptions {
  int n = default_node_count();
  double tol_rel = 1e-9;
  double tol_abs = 1e-12;
  int sync_grid = default_sync_grid;
};

struct InequalityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double scale = 0.0;
  bool holds = false;
  /// Sorted, without duplicates.
  std::vector<std::string> flags;
  /// Largest n versus 2n relative change over the integrals used, NaN if not run.
  double refinement_delta = std::numeric_limits<double>::quiet_NaN();
  std::optional<ReversalCondition> reversal_condition;
  InequalityCase inputs;
};

/// holds <=> margin >= -(tol_rel scale + tol_abs), or <= for the reversed direction.
inline bool verdict(double margin, double scale, Direction direction, const CheckOptions& opt) {
  const double tol = opt.tol_rel * scale + opt.tol_abs;
  return direction == Direction::standard ? margin >= -tol : margin <= tol;
}

namespace detail {

inline const Expr& slot(const std::map<std::string, Expr>& m, const std::string& name,
                        const char* kind) {
  const auto it = m.find(name);
  if (it == m.end()) throw ConfigError(std::string("missing ") + kind + " '" + name + "'");
  return it->second;
}

inline void check_shape(const InequalityCase& c) {
  for (const auto& name : required_functions(c.theorem)) slot(c.functions, name, "function");
  for (const auto& name : required_weights(c.theorem)) slot(c.weights, name, "weight");
  if (needs_two_operators(c.theorem) != c.params2.has_value()) {
    throw ConfigError(std::string(to_string(c.theorem)) +
                      (c.params2 ? " takes a single parameter set"
                                 : " needs a second parameter set"));
  }
  if (c.params2 && c.params2->k != c.params1.k) {
    throw ConfigError("both operators must share the same k");
  }
  if (!(c.t > 0.0) || !std::isfinite(c.t)) throw DomainError("t must be positive");
}

/// Evaluates I[e] under one operator and records flags and refinement deltas.
class Evaluator {
 public:
  Evaluator(const OperatorInstance& op, std::set<std::string>& flags, double& delta)
      : op_(op), flags_(flags), delta_(delta) {}

  double operator()(const Expr& e) const {
    const auto result = op_.apply(e);
    flags_.insert(result.flags.begin(), result.flags.end());
    if (!std::isnan(result.refinement_delta)) {
      delta_ = std::isnan(delta_) ? result.refinement_delta : std::max(delta_, result.refinement_delta);
    }
    return result.value;
  }

 private:
  const OperatorInstance& op_;
  std::set<std::string>& flags_;
  double& delta_;
};

inline void require_nonnegative_weights(const InequalityCase& c, const CheckOptions& opt) {
  for (const auto& name : required_weights(c.theorem)) {
    const Expr& w = slot(c.weights, name, "weight");
    if (w.certified_nonnegative()) continue;
    const auto sign = classify_sign(w, c.t, opt.sync_grid);
    if (sign != SignClass::positive && sign != SignClass::nonnegative) {
      throw HypothesisError("weight '" + name + "' is not nonnegative on (0, t]");
    }
  }
}

inline void require_synchronous(const InequalityCase& c, const CheckOptions& opt) {
  const auto cert = check_synchronous(slot(c.functions, "f", "function"),
                                      slot(c.functions, "g", "function"), c.t, opt.sync_grid);
  if (!cert.synchronous()) {
    throw HypothesisError("f and g are not synchronous on (0, t]: product " +
                          std::to_string(cert.worst_product) + " at (" +
                          std::to_string(cert.worst_u) + ", " + std::to_string(cert.worst_v) +
                          ")");
  }
}

inline void require_triple_condition(const InequalityCase& c, const CheckOptions& opt) {
  const auto r = check_triple_condition(slot(c.functions, "f", "function"),
                                        slot(c.functions, "g", "function"),
                                        slot(c.functions, "h", "function"), c.t, opt.sync_grid);
  if (!r.positive) throw HypothesisError("f, g and h must be positive on (0, t]");
  if (!r.holds) {
    throw HypothesisError("(f(u)-f(v))(g(u)-g(v))(h(u)+h(v)) >= 0 fails: minimum " +
                          std::to_string(r.min_product));
  }
}

struct Sides {
  double lhs;
  double rhs;
};

inline Sides lemma_sides(const Evaluator& I1, const Evaluator& I2, const Expr& x, const Expr& y,
                         const Expr& f, const Expr& g) {
  const Expr fg = f * g;
  const double lhs = I1(x) * I2(y * fg) + I2(y) * I1(x * fg);
  const double rhs = I1(x * f) * I2(y * g) + I2(y * f) * I1(x * g);
  return {lhs, rhs};
}

inline Sides three_weight_sides(const Evaluator& I1, const Evaluator& I2, const Expr& r,
                                const Expr& p, const Expr& q, const Expr& f, const Expr& g) {
  const Expr fg = f * g;
  const double Ir = I1(r), Ip1 = I1(p), Iq1 = I1(q), Ip2 = I2(p), Iq2 = I2(q);
  const double lhs = Ir * (Iq1 * I2(p * fg) + 2.0 * Ip1 * I2(q * fg) + Iq2 * I1(p * fg)) +
                     (Ip1 * Iq2 + Ip2 * Iq1) * I1(r * fg);
  const double Irf = I1(r * f), Irg = I1(r * g);
  const double Ipf1 = I1(p * f), Ipg1 = I1(p * g);
  const double Iqf2 = I2(q * f), Iqg2 = I2(q * g), Ipf2 = I2(p * f), Ipg2 = I2(p * g);
  const double rhs = Ir * (Ipf1 * Iqg2 + Iqf2 * Ipg1) + Ip1 * (Irf * Iqg2 + Iqf2 * Irg) +
                     Iq1 * (Irf * Ipg2 + Ipf2 * Irg);
  return {lhs, rhs};
}

inline Sides three_function_sides(const Evaluator& I1, const Evaluator& I2, const Expr& x,
                                  const Expr& y, const Expr& f, const Expr& g, const Expr& h) {
  const Expr fg = f * g, fh = f * h, gh = g * h, fgh = f * g * h;
  const double lhs = I1(x) * I2(y * fgh) + I1(x * h) * I2(y * fg) + I1(x * fg) * I2(y * h) +
                     I1(x * fgh) * I2(y);
  const double rhs = I1(x * f) * I2(y * gh) + I1(x * g) * I2(y * fh) + I1(x * gh) * I2(y * f) +
                     I1(x * fh) * I2(y * g);
  return {lhs, rhs};
}

inline Sides evaluate_sides(const InequalityCase& c, const Evaluator& I1, const Evaluator& I2) {
  const Expr& f = slot(c.functions, "f", "function");
  const Expr& g = slot(c.functions, "g", "function");
  const auto w = [&](const char* name) -> const Expr& { return slot(c.weights, name, "weight"); };
  switch (c.theorem) {
    case Theorem::lemma31:
    case Theorem::lemma33:
      return lemma_sides(I1, I2, w("x"), w("y"), f, g);
    case Theorem::thm32:
    case Theorem::thm34:
      return three_weight_sides(I1, I2, w("r"), w("p"), w("q"), f, g);
    case Theorem::thm41:
      return three_function_sides(I1, I2, w("x"), w("x"), f, g, slot(c.functions, "h", "function"));
    case Theorem::thm42:
      return three_function_sides(I1, I2, w("x"), w("y"), f, g, slot(c.functions, "h", "function"));
  }
  throw ConfigError("unknown theorem");
}

inline InequalityReport evaluate(const InequalityCase& c, const CheckOptions& opt) {
  InequalityReport report;
  report.inputs = c;
  std::set<std::string> flags;
  double delta = std::numeric_limits<double>::quiet_NaN();

  const OperatorInstance op1(c.params1, c.t, opt.n);
  std::optional<OperatorInstance> op2;
  if (c.params2) op2.emplace(*c.params2, c.t, opt.n, Scheme::graded, secondary_names);
  const Evaluator I1(op1, flags, delta);
  const Evaluator I2(op2 ? *op2 : op1, flags, delta);

  const Sides sides = evaluate_sides(c, I1, I2);
  report.lhs = sides.lhs;
  report.rhs = sides.rhs;
  report.margin = sides.lhs - sides.rhs;
  report.scale = std::max({std::abs(sides.lhs), std::abs(sides.rhs), 1e-300});
  report.holds = verdict(report.margin, report.scale, c.direction, opt);
  report.flags.assign(flags.begin(), flags.end());
  report.refinement_delta = delta;
  return report;
}

inline InequalityReport check_standard(const InequalityCase& c, Theorem expected,
                                       const CheckOptions& opt) {
  if (c.theorem != expected) {
    throw ConfigError(std::string("case is for ") + to_string(c.theorem) + ", not " +
                      to_string(expected));
  }
  check_shape(c);
  if (c.direction == Direction::standard) {
    require_nonnegative_weights(c, opt);
    if (c.theorem == Theorem::thm41 || c.theorem == Theorem::thm42) {
      require_triple_condition(c, opt);
    } else {
      require_synchronous(c, opt);
    }
  }
  return evaluate(c, opt);
}

}  // namespace detail

inline InequalityReport check_lemma31(const InequalityCase& c, const CheckOptions& opt = {}) {
  return detail::check_standard(c, Theorem::lemma31, opt);
}
inline InequalityReport check_thm32(const InequalityCase& c, const CheckOptions& opt = {}) {
  return detail::check_standard(c, Theorem::thm32, opt);
}
inline InequalityReport check_lemma33(const InequalityCase& c, const CheckOptions& opt = {}) {
  return detail::check_standard(c, Theorem::lemma33, opt);
}
inline InequalityReport check_thm34(const InequalityCase& c, const CheckOptions& opt = {}) {
  return detail::check_standard(c, Theorem::thm34, opt);
}
inline InequalityReport check_thm41(const InequalityCase& c, const CheckOptions& opt = {}) {
  return detail::check_standard(c, Theorem::thm41, opt);
}
inline InequalityReport check_thm42(const InequalityCase& c, const CheckOptions& opt = {}) {
  return detail::check_standard(c, Theorem::thm42, opt);
}

/// Which reversal condition a thm32/thm34 case satisfies, by sampling f, g and
/// the weight signs on (0, t]. Throws ConditionClassificationError if none.
inline ReversalCondition classify_reversal(const InequalityCase& c, const CheckOptions& opt = {}) {
  if (c.theorem != Theorem::thm32 && c.theorem != Theorem::thm34) {
    throw ConditionClassificationError(std::string("reversal applies to thm32 and thm34, not ") +
                                       to_string(c.theorem));
  }
  detail::check_shape(c);
  const auto cert = check_synchronous(detail::slot(c.functions, "f", "function"),
                                      detail::slot(c.functions, "g", "function"), c.t,
                                      opt.sync_grid);
  int nonnegative = 0, negative = 0;
  for (const auto& name : required_weights(c.theorem)) {
    const Expr& w = detail::slot(c.weights, name, "weight");
    const auto sign = w.certified_nonnegative() ? SignClass::nonnegative
                                                : classify_sign(w, c.t, opt.sync_grid);
    if (sign == SignClass::positive || sign == SignClass::nonnegative) {
      ++nonnegative;
    } else if (sign == SignClass::negative || sign == SignClass::nonpositive) {
      ++negative;
    }
  }
  if (cert.asynchronous() && nonnegative == 3) return ReversalCondition::asynchronous;
  if (cert.synchronous() && negative == 3) return ReversalCondition::negative;
  if (cert.synchronous() && nonnegative == 2 && negative == 1) return ReversalCondition::mixed;
  throw ConditionClassificationError(
      "case matches no reversal condition: need an asynchronous pair with nonnegative weights, "
      "or a synchronous pair with all weights negative or exactly one negative");
}

/// Runs thm32 or thm34 with the reversed direction, after classifying the case.
/// Nonnegativity of the weights is deliberately not required here.
inline InequalityReport check_reversal(InequalityCase c, const CheckOptions& opt = {}) {
  const auto condition = classify_reversal(c, opt);
  c.direction = Direction::reversed;
  auto report = detail::evaluate(c, opt);
  report.reversal_condition = condition;
  return report;
}

/// Dispatches on theorem and direction.
inline InequalityReport check(const InequalityCase& c, const CheckOptions& opt = {}) {
  if (c.direction == Direction::reversed) return check_reversal(c, opt);
  return detail::check_standard(c, c.theorem, opt);
}

}  // namespace kfrac
