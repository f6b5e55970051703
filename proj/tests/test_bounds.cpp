#include <cmath>

#include <gtest/gtest.h>

#include "chacha/bounds.hpp"
#include "chacha/random.hpp"

namespace chacha {
namespace {

LabelRange range_of(double lo, double hi) {
  LabelRange r;
  r.observe(lo);
  r.observe(hi);
  return r;
}

LossAccumulator acc_of(double mean, std::uint64_t count) {
  LossAccumulator a;
  for (std::uint64_t i = 0; i < count; ++i) a.add(mean);
  return a;
}

// Independent long-double evaluation of the bound radius.
long double epsilon_oracle(long double width, long double scale, long double d, long double n, long double pool,
                           long double delta) {
  return scale * width * std::sqrt(d * std::log(n * pool / delta) / n);
}

TEST(LabelRangeTest, ClipsToObservedRange) {
  LabelRange r;
  EXPECT_FALSE(r.initialized());
  EXPECT_EQ(r.width(), 0.0);
  r.observe(2.0);
  r.observe(-1.0);
  EXPECT_EQ(r.clip(5.0), 2.0);
  EXPECT_EQ(r.clip(-5.0), -1.0);
  EXPECT_EQ(r.clip(0.5), 0.5);
  EXPECT_EQ(clipped_abs_error(10.0, 0.0, r), 2.0);
}

TEST(Epsilon, MatchesOracle) {
  // width 20 with scale 0.05 gives a = 1
  const LabelRange r = range_of(0.0, 20.0);
  const BoundParams p;
  const double eps = epsilon(acc_of(0.3, 100), 10, 10, p, r);
  const long double want = epsilon_oracle(20.0L, 0.05L, 10.0L, 100.0L, 10.0L, 0.1L);
  EXPECT_NEAR(eps, static_cast<double>(want), 1e-12);
  EXPECT_NEAR(eps, 0.95971, 1e-4);

  const double other = epsilon(acc_of(0.3, 37), 3, 5, p, range_of(-2.0, 7.0));
  EXPECT_NEAR(other, static_cast<double>(epsilon_oracle(9.0L, 0.05L, 3.0L, 37.0L, 5.0L, 0.1L)), 1e-12);
}

TEST(Epsilon, QuadruplingCountHalvesRadiusAtFixedLogArgument) {
  const LabelRange r = range_of(0.0, 20.0);
  const BoundParams p;
  // count * pool fixed at 4000
  const double e1 = epsilon(acc_of(0.1, 100), 10, 40, p, r);
  const double e4 = epsilon(acc_of(0.1, 400), 10, 10, p, r);
  EXPECT_NEAR(e4, e1 / 2, 1e-12);
}

TEST(Epsilon, EdgeCases) {
  const BoundParams p;
  EXPECT_EQ(epsilon(LossAccumulator{}, 5, 3, p, range_of(0, 1)), kInf);
  LabelRange flat;
  flat.observe(3.0);
  EXPECT_EQ(epsilon(acc_of(0.0, 10), 5, 3, p, flat), 0.0);
}

TEST(Epsilon, ShrinksWithCountGrowsWithDimension) {
  const LabelRange r = range_of(0.0, 1.0);
  const BoundParams p;
  double prev = kInf;
  for (std::uint64_t n = 1; n <= 5000; n *= 2) {
    const double e = epsilon(acc_of(0.1, n), 10, 4, p, r);
    EXPECT_LT(e, prev);
    prev = e;
  }
  double prev_d = 0.0;
  for (std::uint64_t d = 1; d <= 1024; d *= 2) {
    const double e = epsilon(acc_of(0.1, 100), d, 4, p, r);
    EXPECT_GT(e, prev_d);
    prev_d = e;
  }
}

TEST(Bounds, UpperLowerAroundMean) {
  const LabelRange r = range_of(0.0, 10.0);
  const BoundParams p;
  const auto acc = acc_of(0.25, 100);
  const Bounds b = compute_bounds(acc, 20, 4, p, r);
  EXPECT_EQ(b.mean, 0.25);
  EXPECT_EQ(b.upper, 0.25 + b.eps);
  EXPECT_EQ(b.lower, 0.25 - b.eps);
  EXPECT_EQ(upper_bound(acc, 20, 4, p, r), b.upper);
  EXPECT_EQ(lower_bound(acc, 20, 4, p, r), b.lower);
  const Bounds empty = compute_bounds(LossAccumulator{}, 20, 4, p, r);
  EXPECT_EQ(empty.upper, kInf);
  EXPECT_EQ(empty.lower, -kInf);
}

Bounds make(double mean, double eps, std::uint64_t count = 10) {
  return Bounds{mean, eps, mean - eps, mean + eps, count};
}

TEST(Tests, Examples) {
  // dyadic values keep the boundary comparisons exact
  const Bounds champ = make(1.0, 0.25);  // lower 0.75, lower - eps 0.5, upper 1.25
  EXPECT_TRUE(better_than(make(0.125, 0.25), champ));
  EXPECT_FALSE(better_than(make(0.25, 0.25), champ));  // upper 0.5 is not < 0.5
  EXPECT_TRUE(worse_than(make(1.75, 0.25), champ));
  EXPECT_FALSE(worse_than(make(1.5, 0.25), champ));  // lower 1.25 is not > 1.25
  EXPECT_FALSE(better_than(champ, champ));
  EXPECT_FALSE(better_than(make(0.0, 0.0, 0), champ));
  EXPECT_FALSE(worse_than(make(9.0, 0.0), make(0.0, 0.0, 0)));
}

TEST(Tests, BetterAndWorseAreExclusive) {
  Rng rng = derive_rng(2, "bounds-exclusive");
  for (int i = 0; i < 20000; ++i) {
    const Bounds c = make(uniform(rng, 0, 2), uniform(rng, 0, 1));
    const Bounds C = make(uniform(rng, 0, 2), uniform(rng, 0, 1));
    ASSERT_FALSE(better_than(c, C) && worse_than(c, C));
    // the promotion margin is strictly stricter than plain interval separation
    if (better_than(c, C)) ASSERT_LT(c.upper, C.lower);
  }
}

TEST(Tests, LossOrderDoesNotMatter) {
  Rng rng = derive_rng(4, "bounds-order");
  std::vector<double> losses(200);
  for (auto& l : losses) l = uniform(rng, 0, 1);
  const LabelRange r = range_of(0, 1);
  LossAccumulator fwd, rev;
  for (double l : losses) fwd.add(l);
  for (auto it = losses.rbegin(); it != losses.rend(); ++it) rev.add(*it);
  const Bounds a = compute_bounds(fwd, 7, 3, BoundParams{}, r);
  const Bounds b = compute_bounds(rev, 7, 3, BoundParams{}, r);
  EXPECT_NEAR(a.upper, b.upper, 1e-12);
  EXPECT_NEAR(a.lower, b.lower, 1e-12);
}

TEST(BoundParamsTest, Validation) {
  EXPECT_THROW((BoundParams{0.0, 0.05}.validate()), std::invalid_argument);
  EXPECT_THROW((BoundParams{1.0, 0.05}.validate()), std::invalid_argument);
  EXPECT_THROW((BoundParams{0.1, 0.0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW(BoundParams{}.validate());
}

}  // namespace
}  // namespace chacha
