#pragma once

/// \file quadrature.hpp
/// Gauss-Jacobi rules on [0, 1] for the weight s^p (1-s)^q, a thread-safe
/// rule cache, and an adaptive Gauss-Kronrod reference integrator.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "kfrac/error.hpp"
#include "kfrac/special_functions.hpp"

namespace kfrac {

/// n-point Gaussian rule for integral_0^1 s^p (1-s)^q g(s) ds. The weight
/// function is folded into `weights`.
struct QuadratureRule {
  double p = 0.0;
  double q = 0.0;
  int n = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

/// Implicit QL on a symmetric tridiagonal matrix. `diag` is overwritten with
/// the eigenvalues; `offdiag[i]` couples rows i and i+1 (last entry unused);
/// `first` receives the first component of each normalized eigenvector.
inline void tridiagonal_eigen(std::vector<double>& diag, std::vector<double>& offdiag,
                              std::vector<double>& first) {
  const int n = static_cast<int>(diag.size());
  first.assign(diag.size(), 0.0);
  first[0] = 1.0;
  offdiag.resize(diag.size());
  offdiag[static_cast<std::size_t>(n - 1)] = 0.0;
  auto d = [&](int i) -> double& { return diag[static_cast<std::size_t>(i)]; };
  auto e = [&](int i) -> double& { return offdiag[static_cast<std::size_t>(i)]; };
  auto z = [&](int i) -> double& { return first[static_cast<std::size_t>(i)]; };
  constexpr double eps = std::numeric_limits<double>::epsilon();

  for (int l = 0; l < n; ++l) {
    int iterations = 0;
    int m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d(m)) + std::abs(d(m + 1));
        if (std::abs(e(m)) <= eps * dd) break;
      }
      if (m == l) break;
      if (++iterations > 60) throw NonConvergenceError("tridiagonal QL: too many iterations");

      double g = (d(l + 1) - d(l)) / (2.0 * e(l));
      double r = std::hypot(g, 1.0);
      g = d(m) - d(l) + e(l) / (g + std::copysign(r, g));
      double s = 1.0;
      double c = 1.0;
      double p = 0.0;
      int i = m - 1;
      bool deflated = false;
      for (; i >= l; --i) {
        const double f = s * e(i);
        const double b = c * e(i);
        r = std::hypot(f, g);
        e(i + 1) = r;
        if (r == 0.0) {
          d(i + 1) -= p;
          e(m) = 0.0;
          deflated = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d(i + 1) - p;
        r = (d(i) - g) * s + 2.0 * c * b;
        p = s * r;
        d(i + 1) = g + p;
        g = c * r - b;
        const double fz = z(i + 1);
        z(i + 1) = s * z(i) + c * fz;
        z(i) = c * z(i) - s * fz;
      }
      if (deflated) continue;
      d(l) -= p;
      e(l) = g;
      e(m) = 0.0;
    } while (true);
  }
}

/// Cache key: exponents rounded to 1e-12 so that the rule is a pure function of the key.
struct RuleKey {
  int n;
  std::int64_t p_scaled;
  std::int64_t q_scaled;
  auto operator<=>(const RuleKey&) const = default;
};

inline RuleKey make_rule_key(int n, double p, double q) {
  return {n, std::llround(p * 1e12), std::llround(q * 1e12)};
}

}  // namespace detail

/// Gauss-Jacobi rule on [0, 1] built with the Golub-Welsch algorithm.
///
/// Exact for integral_0^1 s^p (1-s)^q P(s) ds whenever deg P <= 2n - 1.
inline QuadratureRule jacobi_rule(int n, double p, double q) {
  if (n < 1) throw DomainError("jacobi_rule: n must be positive");
  if (!(p > -1.0) || !(q > -1.0)) {
    throw DomainError("jacobi_rule: invalid exponent, need p > -1 and q > -1");
  }
  // Recurrence of the monic Jacobi polynomials for (1-x)^a (1+x)^b on [-1, 1],
  // with x = 2s - 1, so the exponent on (1+x) is p and on (1-x) is q.
  const double a = q;
  const double b = p;
  const double ab = a + b;
  const auto count = static_cast<std::size_t>(n);
  std::vector<double> diag(count);
  std::vector<double> offdiag(count, 0.0);
  diag[0] = (b - a) / (ab + 2.0);
  for (std::size_t k = 1; k < count; ++k) {
    const double dk = static_cast<double>(k);
    const double two_k_ab = 2.0 * dk + ab;
    diag[k] = (b * b - a * a) / (two_k_ab * (two_k_ab + 2.0));
    double beta;
    if (k == 1) {
      beta = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    } else {
      beta = 4.0 * dk * (dk + a) * (dk + b) * (dk + ab) /
             (two_k_ab * two_k_ab * (two_k_ab + 1.0) * (two_k_ab - 1.0));
    }
    offdiag[k - 1] = std::sqrt(beta);
  }
  // Map the Jacobi matrix to [0, 1].
  for (auto& v : diag) v = 0.5 * (1.0 + v);
  for (auto& v : offdiag) v *= 0.5;

  std::vector<double> first;
  detail::tridiagonal_eigen(diag, offdiag, first);

  const double mass = beta_function(p + 1.0, q + 1.0);
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return diag[i] < diag[j]; });

  QuadratureRule rule{p, q, n, {}, {}};
  rule.nodes.reserve(count);
  rule.weights.reserve(count);
  for (auto i : order) {
    rule.nodes.push_back(diag[i]);
    rule.weights.push_back(mass * first[i] * first[i]);
  }
  return rule;
}

/// Process-wide immutable-after-insert cache of Gauss-Jacobi rules.
class RuleCache {
 public:
  static RuleCache& instance() {
    static RuleCache cache;
    return cache;
  }

  std::shared_ptr<const QuadratureRule> get(int n, double p, double q) {
    const auto key = detail::make_rule_key(n, p, q);
    {
      std::shared_lock lock(mutex_);
      if (auto it = rules_.find(key); it != rules_.end()) return it->second;
    }
    // Build from the rounded key so every thread produces the same rule.
    auto rule = std::make_shared<const QuadratureRule>(
        jacobi_rule(n, static_cast<double>(key.p_scaled) * 1e-12,
                    static_cast<double>(key.q_scaled) * 1e-12));
    std::unique_lock lock(mutex_);
    auto [it, inserted] = rules_.emplace(key, std::move(rule));
    return it->second;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return rules_.size();
  }

 private:
  RuleCache() = default;
  mutable std::shared_mutex mutex_;
  std::map<detail::RuleKey, std::shared_ptr<const QuadratureRule>> rules_;
};

inline std::shared_ptr<const QuadratureRule> cached_jacobi_rule(int n, double p, double q) {
  return RuleCache::instance().get(n, p, q);
}

/// Sum of w_i g(s_i). The weight s^p (1-s)^q is implicit in the rule, so `g`
/// must be the integrand with those factors removed.
template <class Function>
double integrate(const QuadratureRule& rule, Function&& g) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double value = g(rule.nodes[i]);
    if (!std::isfinite(value)) {
      throw NonFiniteError("integrate: integrand is not finite at s = " +
                           std::to_string(rule.nodes[i]));
    }
    sum += rule.weights[i] * value;
  }
  return sum;
}

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss7_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo;
  double hi;
  double value;
  double error;
  int depth;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <class Function>
Panel gauss_kronrod_15(Function& f, double lo, double hi, int depth) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = kronrod_weights[7] * fc;
  double gauss = gauss7_weights[3] * fc;
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kronrod_nodes[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kronrod_weights[j] * pair;
    if (j % 2 == 1) gauss += gauss7_weights[j / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  if (!std::isfinite(kronrod)) throw NonFiniteError("adaptive_oracle: integrand is not finite");
  return {lo, hi, kronrod, std::abs(kronrod - gauss), depth};
}

inline constexpr int oracle_max_depth = 60;
inline constexpr int oracle_max_panels = 200000;

/// Global adaptive bisection on [lo, hi] until the summed error estimate is
/// below tol times the magnitude of the running total.
template <class Function>
double adaptive_gauss_kronrod(Function& f, double lo, double hi, double tol) {
  if (hi <= lo) return 0.0;
  std::vector<Panel> heap{gauss_kronrod_15(f, lo, hi, 0)};
  double total = heap.front().value;
  double error = heap.front().error;
  const auto converged = [&] {
    return !(error > tol * std::abs(total) && error > std::numeric_limits<double>::min());
  };
  while (true) {
    if (converged()) {
      // The running sums can cancel to nothing after a huge panel is split;
      // only stop if the exact sums agree.
      total = 0.0;
      error = 0.0;
      for (const auto& panel : heap) {
        total += panel.value;
        error += panel.error;
      }
      if (converged()) break;
    }
    std::pop_heap(heap.begin(), heap.end());
    const Panel worst = heap.back();
    heap.pop_back();
    if (worst.depth >= oracle_max_depth) {
      throw MaxDepthError("adaptive_oracle: maximum bisection depth reached");
    }
    if (heap.size() + 2 > static_cast<std::size_t>(oracle_max_panels)) {
      throw NonConvergenceError("adaptive_oracle: panel budget exhausted");
    }
    const double mid = 0.5 * (worst.lo + worst.hi);
    // below one ulp the halves stop shrinking and their error estimates collapse to zero
    if (!(mid > worst.lo && mid < worst.hi)) {
      throw MaxDepthError("adaptive_oracle: panel width below double resolution");
    }
    for (const Panel& half : {gauss_kronrod_15(f, worst.lo, mid, worst.depth + 1),
                              gauss_kronrod_15(f, mid, worst.hi, worst.depth + 1)}) {
      total += half.value;
      error += half.error;
      heap.push_back(half);
      std::push_heap(heap.begin(), heap.end());
    }
    total -= worst.value;
    error -= worst.error;
  }
  return total;
}

}  // namespace detail

/// Reference value of integral_0^1 s^p (1-s)^q g(s) ds.
///
/// The interval is split at 1/2; the substitutions u = s^(p+1) on the left and
/// v = (1-s)^(q+1) on the right absorb the endpoint singularities, and each
/// half is integrated by adaptive Gauss-Kronrod bisection. Slow; meant for
/// cross-checking the Gaussian rules.
template <class Function>
double adaptive_oracle(Function&& g, double p, double q, double tol) {
  if (!(tol > 0.0)) throw DomainError("adaptive_oracle: tol must be positive");
  if (!(p > -1.0) || !(q > -1.0)) {
    throw DomainError("adaptive_oracle: invalid exponent, need p > -1 and q > -1");
  }
  const double p1 = p + 1.0;
  const double q1 = q + 1.0;
  auto left = [&](double u) {
    const double s = std::pow(u, 1.0 / p1);
    return std::pow(1.0 - s, q) * g(s) / p1;
  };
  auto right = [&](double v) {
    const double one_minus_s = std::pow(v, 1.0 / q1);
    return std::pow(1.0 - one_minus_s, p) * g(1.0 - one_minus_s) / q1;
  };
  const double left_value = detail::adaptive_gauss_kronrod(left, 0.0, std::pow(0.5, p1), tol);
  const double right_value = detail::adaptive_gauss_kronrod(right, 0.0, std::pow(0.5, q1), tol);
  return left_value + right_value;
}

}  // namespace kfrac
