#pragma once

/// \file special_functions.hpp
/// Gamma, Pochhammer and the Gauss hypergeometric function 2F1 on [0, 1].

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "kfrac/error.hpp"

namespace kfrac {

/// Parameters and argument of 2F1(a, b; c; z).
struct HypParams {
  double a = 0.0;
  double b = 0.0;
  double c = 1.0;
  double z = 0.0;
};

namespace detail {

inline constexpr double pole_tolerance = 1e-12;
inline constexpr double degenerate_tolerance = 1e-8;
inline constexpr double series_rel_tolerance = 1e-16;
inline constexpr int series_max_terms = 20000;
inline constexpr double z_switch = 0.5;

inline bool near_integer(double x, double tol) { return std::abs(x - std::round(x)) <= tol; }

inline bool near_nonpositive_integer(double x, double tol = pole_tolerance) {
  return x <= tol && near_integer(x, tol);
}

/// Exact test used to detect terminating series and vanishing reciprocal Gammas.
inline bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

/// sin(pi x) with argument reduction so that integers give exact zeros.
inline double sin_pi(double x) {
  const double r = x - 2.0 * std::round(0.5 * x);  // r in [-1, 1]
  if (r == 0.0 || std::abs(r) == 1.0) return 0.0;
  return std::sin(std::numbers::pi * r);
}

// Lanczos approximation, g = 7, n = 9. Coefficients from P. Godfrey's table
// (the set reproduced in Numerical Recipes 3rd ed. commentary and on the
// Wikipedia "Lanczos approximation" page).
inline constexpr double lanczos_g = 7.0;
inline constexpr std::array<double, 9> lanczos_coefficients = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

inline double lanczos_gamma(double x) {
  // valid for x >= 0.5
  const double xm1 = x - 1.0;
  double series = lanczos_coefficients[0];
  for (std::size_t i = 1; i < lanczos_coefficients.size(); ++i) {
    series += lanczos_coefficients[i] / (xm1 + static_cast<double>(i));
  }
  const double base = xm1 + lanczos_g + 0.5;
  // split the power so that large arguments do not overflow early
  const double half_power = std::pow(base, 0.5 * (xm1 + 0.5));
  return std::sqrt(2.0 * std::numbers::pi) * (half_power * std::exp(-base)) * half_power * series;
}

}  // namespace detail

/// Gamma function. Throws PoleError at (or within 1e-12 of) nonpositive integers.
inline double gamma(double x) {
  if (std::isnan(x)) throw DomainError("gamma: NaN argument");
  if (detail::near_nonpositive_integer(x)) {
    throw PoleError("gamma: pole at nonpositive integer x = " + std::to_string(x));
  }
  if (x < 0.5) {
    return std::numbers::pi / (detail::sin_pi(x) * detail::lanczos_gamma(1.0 - x));
  }
  return detail::lanczos_gamma(x);
}

/// 1/Gamma(x), which is entire: returns 0 at nonpositive integers.
inline double rgamma(double x) {
  if (detail::near_nonpositive_integer(x)) return 0.0;
  return 1.0 / gamma(x);
}

inline double beta_function(double p, double q) { return gamma(p) * gamma(q) * rgamma(p + q); }

/// Rising factorial a(a+1)...(a+n-1), by direct product.
inline double pochhammer(double a, unsigned n) {
  double result = 1.0;
  for (unsigned i = 0; i < n; ++i) result *= a + static_cast<double>(i);
  return result;
}

namespace detail {

/// Direct power series for 2F1 with term-ratio stopping. When `abs_sum` is
/// given it receives the sum of |terms|, a bound on the rounding amplification.
inline double hyp2f1_series(double a, double b, double c, double z, double* abs_sum = nullptr) {
  if (near_nonpositive_integer(c)) throw PoleError("2F1: c is a nonpositive integer");
  double term = 1.0;
  double sum = 1.0;
  double magnitude = 1.0;
  const auto done = [&] {
    if (abs_sum) *abs_sum = magnitude;
    return sum;
  };
  // Past this index the factors (a+n), (b+n) no longer change sign, so a small
  // term cannot be followed by larger ones.
  const double settle = std::max({0.0, -a, -b, -c});
  for (int n = 0; n < series_max_terms; ++n) {
    const double dn = static_cast<double>(n);
    term *= (a + dn) * (b + dn) / ((c + dn) * (dn + 1.0)) * z;
    sum += term;
    magnitude += std::abs(term);
    if (term == 0.0) return done();
    if (dn >= settle && std::abs(term) <= series_rel_tolerance * std::abs(sum)) return done();
  }
  throw NonConvergenceError("2F1: series did not converge within " +
                            std::to_string(series_max_terms) + " terms");
}

/// One term coefficient * s^exponent of a connection expansion.
struct PowerTerm {
  double coefficient = 0.0;
  double exponent = 0.0;
};

/// 2F1(a, b; c; 1 - s) written as sum of coefficient * s^exponent, where the
/// coefficients already include the regular series evaluated at s. Used for
/// 0 <= s <= 1/2. `degenerate` is set when c - a - b is within 1e-8 of an integer.
/// `magnitude` bounds the sum of |contributions| at s, so magnitude / |value|
/// estimates the cancellation.
struct ConnectionExpansion {
  std::array<PowerTerm, 4> terms{};
  int count = 0;
  bool degenerate = false;
  double magnitude = 0.0;

  void push(double coefficient, double exponent) {
    terms[static_cast<std::size_t>(count++)] = {coefficient, exponent};
  }

  double evaluate(double s) const {
    double sum = 0.0;
    for (int i = 0; i < count; ++i) {
      const auto& t = terms[static_cast<std::size_t>(i)];
      sum += t.exponent == 0.0 ? t.coefficient : t.coefficient * std::pow(s, t.exponent);
    }
    return sum;
  }
};

/// expm1(y) / y, continuous at 0.
inline double expm1_ratio(double y) { return y == 0.0 ? 1.0 : std::expm1(y) / y; }

/// log(1 + e/x) / e, continuous at e = 0.
inline double log1p_ratio(double e, double x) { return e == 0.0 ? 1.0 / x : std::log1p(e / x) / e; }

/// Divided difference (log|Gamma(x + e)| - log|Gamma(x)|) / e, which is psi(x)
/// at e = 0. Needs |e| < |x + j| for every shift j used below.
inline double lgamma_difference(double x, double e) {
  // Stirling coefficients B_2j / (2j (2j - 1))
  static constexpr std::array<double, 7> stirling = {
      1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0, 1.0 / 1188.0,
      -691.0 / 360360.0, 1.0 / 156.0};
  double shift = 0.0;
  while (x < 10.0) {
    shift += log1p_ratio(e, x);
    x += 1.0;
  }
  const double l = log1p_ratio(e, x);
  double result = (x - 0.5) * l + std::log(x + e) - 1.0;
  // [(x + e)^-r - x^-r] / e = -r l x^-r expm1_ratio(-r e l)
  double x_power = 1.0 / x;
  const double x_inv2 = x_power * x_power;
  for (std::size_t j = 0; j < stirling.size(); ++j) {
    const double r = static_cast<double>(2 * j + 1);
    result -= stirling[j] * r * l * x_power * expm1_ratio(-r * e * l);
    x_power *= x_inv2;
  }
  return result - shift;
}

inline void append_connection_terms(double a, double b, double c, double s, ConnectionExpansion& out) {
  const double g = c - a - b;
  const double gc = gamma(c);
  const double regular_coef = gc * gamma(g) * rgamma(c - a) * rgamma(c - b);
  const double singular_coef = gc * gamma(-g) * rgamma(a) * rgamma(b);
  double abs_sum = 0.0;
  if (regular_coef != 0.0) {
    out.push(regular_coef * hyp2f1_series(a, b, 1.0 - g, s, &abs_sum), 0.0);
    out.magnitude += std::abs(regular_coef) * abs_sum;
  }
  if (singular_coef != 0.0) {
    out.push(singular_coef * hyp2f1_series(c - a, c - b, 1.0 + g, s, &abs_sum), g);
    out.magnitude += std::abs(singular_coef) * abs_sum * std::pow(s, g);
  }
}

inline constexpr double logarithmic_window = 0.1;
inline constexpr double logarithmic_log_limit = 600.0;

/// Connection formula for c - a - b = m + e with integer m >= 0 and small |e|.
/// The two Gamma(+-e) terms are merged so that their 1/e parts cancel
/// analytically: each tail term is a difference of expm1 of log-Gamma
/// differences. At e = 0 this is the logarithmic (digamma) limit formula.
inline void append_logarithmic_terms(double a, double b, double c, double s, double log_s, int m,
                                     double e, ConnectionExpansion& out) {
  const double gc = gamma(c);
  if (m > 0) {
    // finite part, n < m, from the regular term
    const double d = c - a - b;
    double term = gc * gamma(d) * rgamma(c - a) * rgamma(c - b);
    double sum = term;
    out.magnitude += std::abs(term);
    for (int n = 0; n + 1 < m; ++n) {
      const double dn = static_cast<double>(n);
      term *= (a + dn) * (b + dn) / ((1.0 - d + dn) * (dn + 1.0)) * s;
      sum += term;
      out.magnitude += std::abs(term);
    }
    if (sum != 0.0) out.push(sum, 0.0);
  }
  const double dm = static_cast<double>(m);
  const double pe = std::numbers::pi * e;
  // Gamma(a+m)/Gamma(c-b) and Gamma(b+m)/Gamma(c-a), since c-b = a+m+e, c-a = b+m+e
  const double ratio_a = std::exp(-e * lgamma_difference(a + dm, e));
  const double ratio_b = std::exp(-e * lgamma_difference(b + dm, e));
  const double front = gc * rgamma(a) * rgamma(b) * (m % 2 ? -1.0 : 1.0) *
                       (e == 0.0 ? 1.0 : pe / std::sin(pe)) * ratio_a * ratio_b / gamma(dm + 1.0);
  if (front == 0.0) return;

  double qa = lgamma_difference(a + dm, e);
  double qb = lgamma_difference(b + dm, e);
  double qc = lgamma_difference(dm + 1.0, e);
  double qd = lgamma_difference(1.0, -e);
  double g = 1.0;
  double sum = 0.0;
  double magnitude = 0.0;
  const double settle = std::max({0.0, -(a + dm), -(b + dm)});
  for (int k = 0; k < series_max_terms; ++k) {
    const double dk = static_cast<double>(k);
    const double q1 = qd;
    const double q2 = log_s + qa + qb - qc;
    const double p1 = q1 * expm1_ratio(e * q1), p2 = q2 * expm1_ratio(e * q2);
    const double term = g * (p1 - p2);
    sum += term;
    magnitude += std::abs(g) * (std::abs(p1) + std::abs(p2));
    if (dk >= settle && std::abs(term) <= series_rel_tolerance * std::abs(sum)) break;
    const double A = a + dm + dk, B = b + dm + dk, C = dm + 1.0 + dk, D = 1.0 + dk;
    g *= A * B / (C * D) * s;
    if (g == 0.0) break;
    qa += log1p_ratio(e, A);
    qb += log1p_ratio(e, B);
    qc += log1p_ratio(e, C);
    qd += log1p_ratio(-e, D);
    if (k + 1 == series_max_terms) {
      throw NonConvergenceError("2F1: logarithmic connection series did not converge");
    }
  }
  out.push(front * sum, dm);
  out.magnitude += std::abs(front) * magnitude * std::pow(s, dm);
}

inline ConnectionExpansion connection_expansion_raw(double a, double b, double c, double s,
                                                   double log_s) {
  ConnectionExpansion out;
  if (a == 0.0 || b == 0.0) {
    out.push(1.0, 0.0);
    out.magnitude = 1.0;
    return out;
  }
  if (is_nonpositive_integer(a) || is_nonpositive_integer(b)) {
    // terminating series: a polynomial in z, exact at any z
    out.push(hyp2f1_series(a, b, c, 1.0 - s, &out.magnitude), 0.0);
    return out;
  }
  const double d = c - a - b;
  const double m = std::round(d);
  const double e = d - m;
  out.degenerate = std::abs(e) <= degenerate_tolerance;
  // Away from the window the plain formula loses at most ~ eps / |e| relative,
  // and for |e log s| large the two terms no longer cancel.
  const auto pole_clear = [&](double x) {
    return x > 2.0 * std::abs(e) || std::abs(x - std::round(x)) > 2.0 * std::abs(e);
  };
  if (std::abs(e) > logarithmic_window || !(std::abs(e * log_s) <= logarithmic_log_limit) ||
      (m >= 0.0 && !(pole_clear(a + m) && pole_clear(b + m)))) {
    append_connection_terms(a, b, c, s, out);
    return out;
  }
  if (m >= 0.0) {
    append_logarithmic_terms(a, b, c, s, log_s, static_cast<int>(m), e, out);
    return out;
  }
  // Euler: F(a, b; c; 1-s) = s^(c-a-b) F(c-a, c-b; c; 1-s), whose c-a-b is -d
  const bool degenerate = out.degenerate;
  out = connection_expansion_raw(c - a, c - b, c, s, log_s);
  out.degenerate = degenerate;
  out.magnitude *= std::exp(d * log_s);
  for (int i = 0; i < out.count; ++i) out.terms[static_cast<std::size_t>(i)].exponent += d;
  return out;
}

inline constexpr double direct_fallback_s = 0.1;

/// Connection expansion of 2F1(a, b; c; 1 - s) for 0 <= s <= 1/2. For
/// s >= 0.1 the direct series in 1 - s still converges geometrically, and it
/// replaces the expansion when that cancels worse (large a, b with s near 1/2).
inline ConnectionExpansion connection_expansion(double a, double b, double c, double s, double log_s) {
  auto out = connection_expansion_raw(a, b, c, s, log_s);
  if (s < direct_fallback_s || (out.count == 1 && out.terms[0].exponent == 0.0)) return out;
  const double value = out.evaluate(s);
  double abs_sum = 0.0;
  const double direct = hyp2f1_series(a, b, c, 1.0 - s, &abs_sum);
  if (abs_sum / std::abs(direct) < out.magnitude / std::abs(value)) {
    ConnectionExpansion replaced;
    replaced.degenerate = out.degenerate;
    replaced.magnitude = abs_sum;
    replaced.push(direct, 0.0);
    return replaced;
  }
  return out;
}

inline ConnectionExpansion connection_expansion(double a, double b, double c, double s) {
  return connection_expansion(a, b, c, s, std::log(s));
}

/// 2F1 via the z -> 1 - z connection formula.
inline double hyp2f1_transformed(double a, double b, double c, double z) {
  const double s = 1.0 - z;
  return connection_expansion(a, b, c, s).evaluate(s);
}

}  // namespace detail

/// Value of 2F1 together with whether the connection formula met integer c - a - b.
struct Hyp2F1Result {
  double value = 0.0;
  bool degenerate = false;
};

/// Gauss sum 2F1(a, b; c; 1) = Gamma(c) Gamma(c-a-b) / (Gamma(c-a) Gamma(c-b)).
inline double gauss_2f1_at_one(double a, double b, double c) {
  if (detail::near_nonpositive_integer(c)) throw PoleError("2F1: c is a nonpositive integer");
  if (c - a - b <= 0.0) {
    throw DivergenceError("2F1: series diverges at z = 1 since c - a - b <= 0");
  }
  return gamma(c) * gamma(c - a - b) * rgamma(c - a) * rgamma(c - b);
}

inline Hyp2F1Result gauss_2f1_with_info(const HypParams& p) {
  const auto [a, b, c, z] = p;
  if (std::isnan(a) || std::isnan(b) || std::isnan(c) || std::isnan(z)) {
    throw DomainError("2F1: NaN argument");
  }
  if (detail::near_nonpositive_integer(c)) throw PoleError("2F1: c is a nonpositive integer");
  if (z < 0.0 || z > 1.0) throw DomainError("2F1: argument must lie in [0, 1]");
  if (a == 0.0 || b == 0.0 || z == 0.0) return {1.0, false};
  if (detail::is_nonpositive_integer(a) || detail::is_nonpositive_integer(b)) {
    return {detail::hyp2f1_series(a, b, c, z), false};
  }
  if (z == 1.0) return {gauss_2f1_at_one(a, b, c), false};
  if (z <= detail::z_switch) return {detail::hyp2f1_series(a, b, c, z), false};
  const double s = 1.0 - z;
  const auto expansion = detail::connection_expansion(a, b, c, s);
  return {expansion.evaluate(s), expansion.degenerate};
}

/// Gauss hypergeometric function 2F1(a, b; c; z) for z in [0, 1].
///
/// Direct series for z <= 0.5; for z > 0.5 the two-series connection formula
/// in 1 - z. At z = 1 the Gauss sum is used and requires c - a - b > 0.
inline double gauss_2f1(const HypParams& p) { return gauss_2f1_with_info(p).value; }

inline double gauss_2f1(double a, double b, double c, double z) {
  return gauss_2f1({a, b, c, z});
}

/// 2F1(a, b; c; 1 - s), accurate for small s where 1 - s would round to 1.
inline double gauss_2f1_complement(double a, double b, double c, double s) {
  if (s < 0.0 || s > 1.0) throw DomainError("2F1: complement argument must lie in [0, 1]");
  if (s >= 1.0 - detail::z_switch) return gauss_2f1(a, b, c, 1.0 - s);
  if (s == 0.0) return gauss_2f1_at_one(a, b, c);
  if (detail::near_nonpositive_integer(c)) throw PoleError("2F1: c is a nonpositive integer");
  return detail::connection_expansion(a, b, c, s).evaluate(s);
}

}  // namespace kfrac
