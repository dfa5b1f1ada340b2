#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "kfrac/functions.hpp"
#include "kfrac/inequalities.hpp"
#include "kfrac/random.hpp"

using namespace kfrac;

namespace {

// alpha = 1, beta = -1, mu = 0, k = 0: the plain integral over (0, t)
const OperatorParams plain{1.0, -1.0, -0.5, 0.0, 0.0};

OperatorParams random_params(SplitMix64& rng, double k) {
  OperatorParams p;
  p.beta = rng.uniform(-2.0, 0.9);
  p.mu = rng.uniform(-1.0, 2.0);
  p.k = k;
  p.alpha = std::max(0.0, -p.beta - p.mu) + rng.uniform(0.0, 3.0);
  p.eta = rng.uniform(p.beta - 1.0, 0.0);
  return p;
}

InequalityCase make_case(Theorem theorem, const Expr& f, const Expr& g, double t,
                         const OperatorParams& p1) {
  InequalityCase c;
  c.theorem = theorem;
  c.functions = {{"f", f}, {"g", g}};
  c.t = t;
  c.params1 = p1;
  return c;
}

InequalityCase random_case(Theorem theorem, SplitMix64& rng) {
  const double t = rng.uniform(0.5, 2.0);
  const OperatorParams p1 = random_params(rng, rng.uniform(0.0, 3.0));
  auto [f, g] = random_monotone_pair(rng.next(), PairDirection::same);
  InequalityCase c = make_case(theorem, f, g, t, p1);
  if (needs_two_operators(theorem)) c.params2 = random_params(rng, p1.k);
  if (theorem == Theorem::thm41 || theorem == Theorem::thm42) {
    c.functions.emplace("h", random_weight(rng.next()) + Expr::constant(0.1));
  }
  for (const auto& name : required_weights(theorem)) c.weights.emplace(name, random_weight(rng.next()));
  return c;
}

}  // namespace

TEST(Theorems, NamesRoundTrip) {
  for (Theorem t : all_theorems) EXPECT_EQ(parse_theorem(to_string(t)), t);
  EXPECT_FALSE(parse_theorem("thm99").has_value());
  EXPECT_EQ(parse_reversal_condition("mixed"), ReversalCondition::mixed);
  EXPECT_FALSE(parse_reversal_condition("sideways").has_value());
}

TEST(Lemma31, PlainIntegralExample) {
  // f = g = x, unit weights, t = 1: 2 (1/3) - 2 (1/2)(1/2) = 1/6
  auto c = make_case(Theorem::lemma31, Expr::identity(), Expr::identity(), 1.0, plain);
  c.weights = {{"x", Expr::constant(1.0)}, {"y", Expr::constant(1.0)}};
  const auto r = check_lemma31(c);
  EXPECT_NEAR(r.margin, 1.0 / 6.0, 1e-13);
  EXPECT_NEAR(r.lhs, 2.0 / 3.0, 1e-13);
  EXPECT_NEAR(r.rhs, 0.5, 1e-13);
  EXPECT_TRUE(r.holds);
  EXPECT_TRUE(r.flags.empty());
}

TEST(AllTheorems, ConstantFunctionGivesZeroMargin) {
  SplitMix64 rng(91);
  for (Theorem theorem : all_theorems) {
    for (int i = 0; i < 10; ++i) {
      InequalityCase c = random_case(theorem, rng);
      c.functions.at("f") = Expr::constant(rng.uniform(0.5, 2.0));
      const auto r = check(c);
      EXPECT_LE(std::abs(r.margin), 1e-12 * r.scale) << to_string(theorem);
      EXPECT_TRUE(r.holds);
    }
  }
}

TEST(Thm32, EqualWeightsReduceToLemma) {
  SplitMix64 rng(92);
  for (int i = 0; i < 30; ++i) {
    const InequalityCase base = random_case(Theorem::lemma31, rng);
    const Expr w = random_weight(rng.next());
    InequalityCase c31 = base;
    c31.weights = {{"x", w}, {"y", w}};
    InequalityCase c32 = base;
    c32.theorem = Theorem::thm32;
    c32.weights = {{"r", w}, {"p", w}, {"q", w}};
    const double Iw = OperatorInstance(base.params1, base.t).apply(w).value;
    const auto r31 = check_lemma31(c31);
    const auto r32 = check_thm32(c32);
    EXPECT_LE(std::abs(r32.margin - 3.0 * Iw * r31.margin), 1e-10 * r32.scale);
  }
}

TEST(Thm34, SharedOperatorEqualsThm32) {
  SplitMix64 rng(93);
  for (int i = 0; i < 20; ++i) {
    InequalityCase c = random_case(Theorem::thm32, rng);
    const auto r32 = check_thm32(c);
    c.theorem = Theorem::thm34;
    c.params2 = c.params1;
    const auto r34 = check_thm34(c);
    EXPECT_LE(std::abs(r32.margin - r34.margin), 1e-12 * r32.scale);
  }
}

TEST(Thm41, UnitHAndEqualOperatorsIsTwiceLemma) {
  SplitMix64 rng(94);
  for (int i = 0; i < 30; ++i) {
    InequalityCase c31 = random_case(Theorem::lemma31, rng);
    const Expr x = c31.weights.at("x");
    c31.weights.at("y") = x;
    InequalityCase c41 = c31;
    c41.theorem = Theorem::thm41;
    c41.params2 = c41.params1;
    c41.functions.emplace("h", Expr::constant(1.0));
    c41.weights = {{"x", x}};
    const auto r31 = check_lemma31(c31);
    const auto r41 = check_thm41(c41);
    EXPECT_LE(std::abs(r41.margin - 2.0 * r31.margin), 1e-10 * r41.scale);
  }
}

TEST(Thm42, EqualWeightsMatchThm41) {
  SplitMix64 rng(95);
  for (int i = 0; i < 20; ++i) {
    InequalityCase c42 = random_case(Theorem::thm42, rng);
    c42.weights.at("y") = c42.weights.at("x");
    InequalityCase c41 = c42;
    c41.theorem = Theorem::thm41;
    c41.weights.erase("y");
    EXPECT_LE(std::abs(check_thm42(c42).margin - check_thm41(c41).margin),
              1e-12 * check_thm42(c42).scale);
  }
}

TEST(Lemma33, SwappingOperatorsAndWeightsIsSymmetric) {
  // D12(x, y) with I1, I2 equals D21(y, x) with I2, I1
  SplitMix64 rng(96);
  for (int i = 0; i < 20; ++i) {
    InequalityCase c = random_case(Theorem::lemma33, rng);
    InequalityCase swapped = c;
    std::swap(swapped.params1, *swapped.params2);
    swapped.weights = {{"x", c.weights.at("y")}, {"y", c.weights.at("x")}};
    const auto a = check_lemma33(c), b = check_lemma33(swapped);
    EXPECT_LE(std::abs(a.margin - b.margin), 1e-12 * a.scale);
  }
}

TEST(AllTheorems, WeightScalingIsQuadratic) {
  SplitMix64 rng(97);
  const double lambda = 2.5;
  for (Theorem theorem : all_theorems) {
    for (int i = 0; i < 5; ++i) {
      InequalityCase c = random_case(theorem, rng);
      const auto base = check(c);
      InequalityCase scaled = c;
      for (auto& [name, w] : scaled.weights) w = Expr::scale(lambda, w);
      const auto r = check(scaled);
      // two-weight forms scale by lambda^2, three-weight forms by lambda^3
      const double factor = std::pow(lambda, theorem == Theorem::thm32 || theorem == Theorem::thm34 ? 3 : 2);
      EXPECT_LE(std::abs(r.margin - factor * base.margin), 1e-10 * r.scale) << to_string(theorem);
    }
  }
}

TEST(AllTheorems, RandomSynchronousCasesHold) {
  SplitMix64 rng(98);
  for (Theorem theorem : all_theorems) {
    for (int i = 0; i < 40; ++i) {
      const auto r = check(random_case(theorem, rng));
      EXPECT_TRUE(r.holds) << to_string(theorem) << " margin " << r.margin << " scale " << r.scale;
    }
  }
}

TEST(Reversal, NegativeWeights) {
  auto c = make_case(Theorem::thm32, Expr::identity(), Expr::identity(), 1.0, plain);
  c.weights = {{"r", Expr::constant(-1.0)}, {"p", Expr::constant(-1.0)}, {"q", Expr::constant(-1.0)}};
  EXPECT_EQ(classify_reversal(c), ReversalCondition::negative);
  const auto r = check_reversal(c);
  // 3 I[-1] D(-1,-1) = -3 (1/6)
  EXPECT_NEAR(r.margin, -0.5, 1e-13);
  EXPECT_TRUE(r.holds);
  EXPECT_EQ(r.reversal_condition, ReversalCondition::negative);
}

TEST(Reversal, AsynchronousPair) {
  const auto g = Expr::power(Expr::affine(1.0, 1.0, Expr::identity()), -1.0);
  auto c = make_case(Theorem::thm32, Expr::identity(), g, 1.0, plain);
  c.weights = {{"r", Expr::constant(1.0)}, {"p", Expr::constant(1.0)}, {"q", Expr::constant(1.0)}};
  c.direction = Direction::reversed;
  const auto r = check(c);
  EXPECT_EQ(r.reversal_condition, ReversalCondition::asynchronous);
  EXPECT_LT(r.margin, 0.0);
  EXPECT_TRUE(r.holds);
}

TEST(Reversal, MixedSigns) {
  auto c = make_case(Theorem::thm32, Expr::identity(), Expr::identity(), 1.0, plain);
  c.weights = {{"r", Expr::constant(1.0)}, {"p", Expr::constant(-1.0)}, {"q", Expr::constant(1.0)}};
  EXPECT_EQ(classify_reversal(c), ReversalCondition::mixed);
  EXPECT_TRUE(check_reversal(c).holds);
}

TEST(Reversal, RandomCasesHold) {
  SplitMix64 rng(99);
  for (Theorem theorem : {Theorem::thm32, Theorem::thm34}) {
    for (auto condition : {ReversalCondition::asynchronous, ReversalCondition::negative,
                           ReversalCondition::mixed}) {
      for (int i = 0; i < 15; ++i) {
        InequalityCase c = random_case(theorem, rng);
        if (condition == ReversalCondition::asynchronous) {
          auto [f, g] = random_monotone_pair(rng.next(), PairDirection::opposite);
          c.functions = {{"f", f}, {"g", g}};
        } else if (condition == ReversalCondition::negative) {
          for (auto& [name, w] : c.weights) w = Expr::scale(-1.0, w + Expr::constant(0.01));
        } else {
          Expr& w = c.weights.at("q");
          w = Expr::scale(-1.0, w + Expr::constant(0.01));
        }
        c.direction = Direction::reversed;
        const auto r = check(c);
        EXPECT_EQ(r.reversal_condition, condition);
        EXPECT_TRUE(r.holds) << to_string(theorem) << " " << to_string(condition) << " " << r.margin;
      }
    }
  }
}

TEST(Reversal, UnclassifiableCase) {
  auto c = make_case(Theorem::thm32, Expr::identity(), Expr::identity(), 1.0, plain);
  c.weights = {{"r", Expr::constant(1.0)}, {"p", Expr::constant(1.0)}, {"q", Expr::constant(1.0)}};
  EXPECT_THROW(classify_reversal(c), ConditionClassificationError);
  auto lemma = make_case(Theorem::lemma31, Expr::identity(), Expr::identity(), 1.0, plain);
  lemma.weights = {{"x", Expr::constant(1.0)}, {"y", Expr::constant(1.0)}};
  EXPECT_THROW(classify_reversal(lemma), ConditionClassificationError);
}

TEST(Hypotheses, Enforced) {
  const auto g = Expr::power(Expr::affine(1.0, 1.0, Expr::identity()), -1.0);
  auto c = make_case(Theorem::lemma31, Expr::identity(), g, 1.0, plain);
  c.weights = {{"x", Expr::constant(1.0)}, {"y", Expr::constant(1.0)}};
  EXPECT_THROW(check(c), HypothesisError);

  auto negative = make_case(Theorem::lemma31, Expr::identity(), Expr::identity(), 1.0, plain);
  negative.weights = {{"x", Expr::constant(1.0)}, {"y", Expr::parse("(+ -0.5 x)")}};
  EXPECT_THROW(check(negative), HypothesisError);

  // an uncertified weight that samples nonnegative is accepted
  negative.weights.at("y") = Expr::parse("(+ -0.5 (scale 2 (max x 0.25)))");
  EXPECT_NO_THROW(check(negative));

  auto triple = make_case(Theorem::thm41, Expr::identity(), g, 1.0, plain);
  triple.params2 = plain;
  triple.functions.emplace("h", Expr::constant(1.0));
  triple.weights = {{"x", Expr::constant(1.0)}};
  EXPECT_THROW(check(triple), HypothesisError);
}

TEST(Shape, ConfigErrors) {
  auto c = make_case(Theorem::lemma31, Expr::identity(), Expr::identity(), 1.0, plain);
  c.weights = {{"x", Expr::constant(1.0)}};
  EXPECT_THROW(check(c), ConfigError);

  auto two = make_case(Theorem::lemma33, Expr::identity(), Expr::identity(), 1.0, plain);
  two.weights = {{"x", Expr::constant(1.0)}, {"y", Expr::constant(1.0)}};
  EXPECT_THROW(check(two), ConfigError);
  OperatorParams other = plain;
  other.k = 1.0;
  two.params2 = other;
  EXPECT_THROW(check(two), ConfigError);
  two.params2 = plain;
  EXPECT_NO_THROW(check(two));

  auto no_h = make_case(Theorem::thm42, Expr::identity(), Expr::identity(), 1.0, plain);
  no_h.params2 = plain;
  no_h.weights = {{"x", Expr::constant(1.0)}, {"y", Expr::constant(1.0)}};
  EXPECT_THROW(check(no_h), ConfigError);

  EXPECT_THROW(check_thm32(c), ConfigError);
}

TEST(Verdict, Tolerances) {
  const CheckOptions opt;
  EXPECT_TRUE(verdict(-1e-13, 1.0, Direction::standard, opt));
  EXPECT_FALSE(verdict(-1e-6, 1.0, Direction::standard, opt));
  EXPECT_TRUE(verdict(1e-13, 1.0, Direction::reversed, opt));
  EXPECT_FALSE(verdict(1e-6, 1.0, Direction::reversed, opt));
}

TEST(Flags, PropagateFromOperator) {
  // eta - beta - mu < 0 makes the kernel divergent at tau = t
  auto c = make_case(Theorem::lemma31, Expr::identity(), Expr::identity(), 1.0, {2.0, -1.5, -2.0, 0.5, 2.5});
  c.weights = {{"x", Expr::constant(1.0)}, {"y", Expr::constant(1.0)}};
  const auto r = check(c);
  EXPECT_TRUE(std::find(r.flags.begin(), r.flags.end(), std::string(flags::endpoint_divergent)) != r.flags.end());
  EXPECT_FALSE(std::isnan(r.refinement_delta));
  EXPECT_TRUE(std::is_sorted(r.flags.begin(), r.flags.end()));
}
