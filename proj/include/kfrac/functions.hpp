#pragma once

/// \file functions.hpp
/// Synchronicity certificates and seeded generators of monotone function
/// pairs and nonnegative weights.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "kfrac/error.hpp"
#include "kfrac/expr.hpp"
#include "kfrac/random.hpp"

namespace kfrac {

inline constexpr double sync_tolerance = 1e-12;
inline constexpr int default_sync_grid = 200;

enum class SyncVerdict { synchronous, asynchronous, indeterminate };

inline const char* to_string(SyncVerdict v) {
  switch (v) {
    case SyncVerdict::synchronous:
      return "synchronous";
    case SyncVerdict::asynchronous:
      return "asynchronous";
    case SyncVerdict::indeterminate:
      return "indeterminate";
  }
  return "?";
}

/// Outcome of sampling (f(u)-f(v))(g(u)-g(v)) over all grid pairs.
struct SyncCertificate {
  SyncVerdict verdict = SyncVerdict::indeterminate;
  int grid_size = 0;
  /// Pair that came closest to violating the reported verdict.
  double worst_u = 0.0;
  double worst_v = 0.0;
  double worst_product = 0.0;
  double min_product = 0.0;
  double max_product = 0.0;

  /// Both bounds can hold at once, e.g. when one function is constant.
  bool synchronous() const { return min_product >= -sync_tolerance; }
  bool asynchronous() const { return max_product <= sync_tolerance; }
};

namespace detail {

inline std::vector<double> uniform_grid(double t, int m) {
  std::vector<double> grid(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) grid[static_cast<std::size_t>(i)] = t * (i + 1) / m;
  return grid;
}

inline std::vector<double> sample(const Expr& e, const std::vector<double>& grid) {
  std::vector<double> values;
  values.reserve(grid.size());
  for (double tau : grid) values.push_back(e(tau));
  return values;
}

}  // namespace detail

/// Sign pattern of (f(u)-f(v))(g(u)-g(v)) over all pairs of an m-point
/// uniform grid on (0, t]. A product identically zero counts as synchronous.
inline SyncCertificate check_synchronous(const Expr& f, const Expr& g, double t, int m) {
  if (m < 2) throw DomainError("check_synchronous: grid size must be at least 2");
  if (!(t > 0.0)) throw DomainError("check_synchronous: t must be positive");
  const auto grid = detail::uniform_grid(t, m);
  const auto fv = detail::sample(f, grid);
  const auto gv = detail::sample(g, grid);

  SyncCertificate cert;
  cert.grid_size = m;
  cert.min_product = std::numeric_limits<double>::infinity();
  cert.max_product = -std::numeric_limits<double>::infinity();
  std::size_t min_i = 0, min_j = 1, max_i = 0, max_j = 1;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      const double product = (fv[i] - fv[j]) * (gv[i] - gv[j]);
      if (product < cert.min_product) {
        cert.min_product = product;
        min_i = i;
        min_j = j;
      }
      if (product > cert.max_product) {
        cert.max_product = product;
        max_i = i;
        max_j = j;
      }
    }
  }
  if (cert.synchronous()) {
    cert.verdict = SyncVerdict::synchronous;
  } else if (cert.asynchronous()) {
    cert.verdict = SyncVerdict::asynchronous;
  } else {
    cert.verdict = SyncVerdict::indeterminate;
  }
  const bool use_max = cert.verdict == SyncVerdict::asynchronous;
  const std::size_t wi = use_max ? max_i : min_i;
  const std::size_t wj = use_max ? max_j : min_j;
  cert.worst_u = grid[wi];
  cert.worst_v = grid[wj];
  cert.worst_product = use_max ? cert.max_product : cert.min_product;
  return cert;
}

/// Sampled version of the three-function condition
/// (f(u)-f(v)) (g(u)-g(v)) (h(u)+h(v)) >= 0 together with positivity of f, g, h.
struct TripleConditionResult {
  bool holds = false;
  bool positive = false;
  double min_product = 0.0;
};

inline TripleConditionResult check_triple_condition(const Expr& f, const Expr& g, const Expr& h,
                                                    double t, int m) {
  if (m < 2) throw DomainError("check_triple_condition: grid size must be at least 2");
  const auto grid = detail::uniform_grid(t, m);
  const auto fv = detail::sample(f, grid);
  const auto gv = detail::sample(g, grid);
  const auto hv = detail::sample(h, grid);
  TripleConditionResult out;
  out.positive = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.positive = out.positive && fv[i] > 0.0 && gv[i] > 0.0 && hv[i] > 0.0;
  }
  out.min_product = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      const double product = (fv[i] - fv[j]) * (gv[i] - gv[j]) * (hv[i] + hv[j]);
      out.min_product = std::min(out.min_product, product);
    }
  }
  out.holds = out.min_product >= -sync_tolerance;
  return out;
}

/// Sign classification of a function sampled on (0, t].
enum class SignClass { positive, negative, nonnegative, nonpositive, mixed };

inline SignClass classify_sign(const Expr& e, double t, int m) {
  bool all_pos = true, all_neg = true, all_nonneg = true, all_nonpos = true;
  for (double tau : detail::uniform_grid(t, m)) {
    const double v = e(tau);
    all_pos = all_pos && v > 0.0;
    all_neg = all_neg && v < 0.0;
    all_nonneg = all_nonneg && v >= 0.0;
    all_nonpos = all_nonpos && v <= 0.0;
  }
  if (all_pos) return SignClass::positive;
  if (all_neg) return SignClass::negative;
  if (all_nonneg) return SignClass::nonnegative;
  if (all_nonpos) return SignClass::nonpositive;
  return SignClass::mixed;
}

enum class PairDirection { same, opposite };

namespace detail {

// Increasing atoms on [0, inf): x, x^p (p >= 1), exp(a x), log1p(a x).
inline Expr increasing_atom(SplitMix64& rng) {
  switch (rng.below(4)) {
    case 0:
      return Expr::identity();
    case 1:
      return Expr::power(Expr::identity(), rng.uniform(1.0, 3.0));
    case 2:
      return Expr::exp(Expr::scale(rng.uniform(0.2, 1.0), Expr::identity()));
    default:
      return Expr::log1p(Expr::scale(rng.uniform(0.5, 3.0), Expr::identity()));
  }
}

// Decreasing atoms that stay positive on [0, inf): exp(-a x), (1 + a x)^(-p).
inline Expr decreasing_atom(SplitMix64& rng) {
  if (rng.below(2) == 0) {
    return Expr::exp(Expr::scale(-rng.uniform(0.2, 1.5), Expr::identity()));
  }
  const double slope = rng.uniform(0.5, 2.0);
  const double exponent = rng.uniform(0.5, 2.0);
  return Expr::power(Expr::affine(slope, 1.0, Expr::identity()), -exponent);
}

/// c0 + sum c_i atom_i with c0 in [lo0, hi0], c_i in [0.1, 2], 1 to 3 atoms.
template <class AtomFn>
Expr monotone_combination(SplitMix64& rng, AtomFn atom, double lo0, double hi0) {
  const auto atoms = 1 + static_cast<int>(rng.below(3));
  std::vector<Expr> terms;
  terms.push_back(Expr::constant(rng.uniform(lo0, hi0)));
  for (int i = 0; i < atoms; ++i) {
    // draws are sequenced explicitly: argument evaluation order is unspecified
    const double c = rng.uniform(0.1, 2.0);
    terms.push_back(Expr::scale(c, atom(rng)));
  }
  return Expr::sum(std::move(terms));
}

}  // namespace detail

/// Two seeded monotone functions, strictly positive and certified nonnegative.
/// The first is increasing; the second is increasing for `same` and
/// decreasing for `opposite`, so the pair is synchronous or asynchronous
/// respectively on all of [0, inf).
inline std::pair<Expr, Expr> random_monotone_pair(std::uint64_t seed, PairDirection direction) {
  SplitMix64 rng(seed);
  Expr f = detail::monotone_combination(rng, detail::increasing_atom, 0.1, 1.0);
  Expr g = direction == PairDirection::same
               ? detail::monotone_combination(rng, detail::increasing_atom, 0.1, 1.0)
               : detail::monotone_combination(rng, detail::decreasing_atom, 0.1, 1.0);
  return {std::move(f), std::move(g)};
}

/// Seeded certified-nonnegative weight. The constant 1 is one of the outcomes.
inline Expr random_weight(std::uint64_t seed) {
  SplitMix64 rng(seed);
  switch (rng.below(5)) {
    case 0:
      return Expr::constant(1.0);
    case 1:
      return Expr::constant(rng.uniform(0.1, 3.0));
    case 2:
      return detail::monotone_combination(rng, detail::increasing_atom, 0.0, 1.0);
    case 3:
      return detail::monotone_combination(rng, detail::decreasing_atom, 0.0, 1.0);
    default: {
      // hump c0 + c x^a exp(-b x)
      const double power = rng.uniform(0.5, 2.0);
      const double decay = rng.uniform(0.3, 2.0);
      const double offset = rng.uniform(0.0, 0.5);
      const double height = rng.uniform(0.5, 3.0);
      Expr hump = Expr::product({Expr::power(Expr::identity(), power),
                                 Expr::exp(Expr::scale(-decay, Expr::identity()))});
      return Expr::sum({Expr::constant(offset), Expr::scale(height, std::move(hump))});
    }
  }
}

}  // namespace kfrac
