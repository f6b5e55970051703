#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "chacha/engine.hpp"
#include "chacha/synth.hpp"

namespace chacha {
namespace {

std::vector<Example> stream(SynthKind kind, std::size_t n, std::uint64_t seed = 1, std::size_t namespaces = 3) {
  SynthOptions so;
  so.kind = kind;
  so.n_examples = n;
  so.seed = seed;
  so.namespaces = namespaces;
  return synth_stream(so);
}

Config base_config(std::size_t namespaces = 3) {
  std::set<std::string> ids;
  for (std::size_t i = 0; i < namespaces; ++i) ids.insert(std::string(1, static_cast<char>('a' + i)));
  return Config(ids);
}

EngineOptions options(std::size_t budget, std::uint64_t n_min = 45, std::uint64_t seed = 0) {
  EngineOptions o;
  o.budget = budget;
  o.n_min = n_min;
  o.seed = seed;
  return o;
}

TEST(EngineInit, PoolComesFromTheOracle) {
  Engine e(base_config(), options(5));
  EXPECT_EQ(e.pool_ids(), (std::vector<std::string>{"a*b;lr=0.5", "a*c;lr=0.5", "b*c;lr=0.5"}));
  EXPECT_EQ(e.champion_id(), "none;lr=0.5");
  EXPECT_TRUE(e.champion().live());
  EXPECT_EQ(e.live_size(), 1u);
}

TEST(EngineInit, RejectsZeroBudget) {
  EXPECT_THROW(Engine(base_config(), options(0)), InvalidBudget);
}

TEST(EngineInit, LargeBudgetRunsEveryChallenger) {
  Engine e(base_config(), options(1000));
  const auto data = stream(SynthKind::Interaction, 1);
  const auto rec = e.step(data[0]);
  EXPECT_EQ(rec.live_size, 4u);
  EXPECT_EQ(e.scheduled_ids().size(), 3u);
}

TEST(EngineInit, BudgetOneNeverSchedulesChallengers) {
  Engine e(base_config(), options(1));
  for (const auto& ex : stream(SynthKind::Interaction, 2000)) {
    const auto rec = e.step(ex);
    ASSERT_EQ(rec.live_size, 1u);
    ASSERT_EQ(rec.incumbent, "none;lr=0.5");
  }
  EXPECT_TRUE(e.promotions().empty());
}

TEST(SelectIncumbent, Examples) {
  const IncumbentCandidate a[] = {{"none", 0.4, true}, {"c1", 0.3, false}, {"c2", 0.5, false}};
  EXPECT_EQ(select_incumbent(a), 1u);
  const IncumbentCandidate b[] = {{"z", kInf, false}, {"none", kInf, true}, {"a", kInf, false}};
  EXPECT_EQ(select_incumbent(b), 1u);
  const IncumbentCandidate c[] = {{"c1", 0.3, false}, {"none", 0.3, true}};
  EXPECT_EQ(select_incumbent(c), 1u);
  const IncumbentCandidate d[] = {{"none", 0.9, true}, {"c2", 0.3, false}, {"c1", 0.3, false}};
  EXPECT_EQ(select_incumbent(d), 2u);
  EXPECT_THROW(select_incumbent({}), std::logic_error);
}

TEST(EngineStep, FirstStepIsQuiescent) {
  Engine e(base_config(), options(5));
  const auto pool = e.pool_ids();
  const auto rec = e.step(stream(SynthKind::Interaction, 1)[0]);
  EXPECT_EQ(rec.t, 1u);
  EXPECT_EQ(rec.incumbent, "none;lr=0.5");
  EXPECT_EQ(rec.champion, "none;lr=0.5");
  EXPECT_EQ(e.pool_ids(), pool);
  EXPECT_TRUE(e.promotions().empty());
  EXPECT_TRUE(e.eliminations().empty());
}

TEST(EngineStep, PromotionSwapsChampionAndGrowsPool) {
  Engine e(base_config(), options(5));
  std::size_t pool_before = e.pool_size();
  for (const auto& ex : stream(SynthKind::Interaction, 5000)) {
    const auto rec = e.step(ex);
    if (!e.promotions().empty()) {
      const auto& p = e.promotions().front();
      ASSERT_EQ(p.t, rec.t);
      EXPECT_EQ(p.new_champion, "a*b;lr=0.5");
      EXPECT_EQ(rec.champion, "a*b;lr=0.5");
      std::size_t eliminated_now = 0;
      for (const auto& el : e.eliminations()) eliminated_now += el.t == rec.t;
      // the promoted challenger and the demoted champion swap places; the
      // oracle adds a*b+a*c and a*b+b*c
      EXPECT_EQ(e.pool_size(), pool_before - eliminated_now + 2);
      const auto pool = e.pool_ids();
      EXPECT_TRUE(std::count(pool.begin(), pool.end(), "none;lr=0.5"));
      EXPECT_TRUE(std::count(pool.begin(), pool.end(), "a*b+a*c;lr=0.5"));
      EXPECT_TRUE(std::count(pool.begin(), pool.end(), "a*b+b*c;lr=0.5"));
      EXPECT_FALSE(std::count(pool.begin(), pool.end(), "a*b;lr=0.5"));
      // the old champion keeps its model and is scheduled as a challenger
      EXPECT_TRUE(e.find("none;lr=0.5")->live());
      const auto sched = e.scheduled_ids();
      EXPECT_TRUE(std::count(sched.begin(), sched.end(), "none;lr=0.5"));
      EXPECT_TRUE(e.champion().live());
      return;
    }
    pool_before = e.pool_size();
  }
  FAIL() << "no promotion within 5000 steps";
}

TEST(EngineStep, SlowLearnerIsEliminated) {
  EngineOptions o = options(5);
  o.initial_pool = std::vector<Config>{base_config().with_learning_rate(1.0 / 1024)};
  Engine e(base_config(), o);
  for (const auto& ex : stream(SynthKind::Linear, 20000)) {
    const std::size_t before = e.pool_size();
    const auto rec = e.step(ex);
    if (!e.eliminations().empty()) {
      EXPECT_EQ(e.eliminations().front().t, rec.t);
      EXPECT_EQ(e.eliminations().front().id, "none;lr=0.0009765625");
      EXPECT_EQ(rec.pool_size, before - 1);
      EXPECT_TRUE(e.find("none;lr=0.0009765625")->eliminated);
      // released at the next schedule call
      e.step(ex);
      EXPECT_FALSE(e.find("none;lr=0.0009765625")->live());
      return;
    }
  }
  FAIL() << "slow learner was never eliminated";
}

TEST(EngineStep, PredictionDoesNotDependOnTheLabel) {
  const auto data = stream(SynthKind::Interaction, 800);
  Engine a(base_config(), options(5));
  Engine b(base_config(), options(5));
  for (std::size_t i = 0; i + 1 < data.size(); ++i) {
    a.step(data[i]);
    b.step(data[i]);
  }
  Example x = data.back();
  Example y = x;
  y.label = 1e6;
  EXPECT_EQ(a.predict(x), b.predict(y));
}

TEST(EngineStep, PredictObserveProtocol) {
  Engine e(base_config(), options(5));
  EXPECT_THROW(e.observe(1.0), std::logic_error);
  const auto ex = stream(SynthKind::Interaction, 1)[0];
  e.predict(ex);
  EXPECT_THROW(e.predict(ex), std::logic_error);
  EXPECT_THROW(e.observe(std::nan("")), std::invalid_argument);
}

TEST(EngineStep, BudgetOneMatchesBareLearner) {
  const auto data = stream(SynthKind::Interaction, 3000, 5);
  Engine e(base_config(), options(1));
  LinearModel bare(base_config());
  for (const auto& ex : data) {
    const auto x = featurize(ex, bare.config(), 18);
    const double want = bare.predict(x);
    bare.update(x, ex.label);
    const auto rec = e.step(ex);
    ASSERT_EQ(rec.prediction, want);
    ASSERT_EQ(rec.squared_error, (want - ex.label) * (want - ex.label));
  }
}

TEST(EngineStep, SameSeedSameTrace) {
  const auto data = stream(SynthKind::Interaction, 3000, 2, 5);
  Engine a(base_config(5), options(4, 75, 9));
  Engine b(base_config(5), options(4, 75, 9));
  for (const auto& ex : data) {
    const auto ra = a.step(ex);
    const auto rb = b.step(ex);
    ASSERT_EQ(ra.incumbent, rb.incumbent);
    ASSERT_EQ(ra.prediction, rb.prediction);
    ASSERT_EQ(ra.champion, rb.champion);
    ASSERT_EQ(ra.live_size, rb.live_size);
  }
}

TEST(EngineStep, InvariantsOverALongRun) {
  const auto data = stream(SynthKind::Drift, 20000, 3, 5);
  for (auto variant : {EngineVariant::Standard, EngineVariant::AggressiveScheduling, EngineVariant::NoChampion}) {
    EngineOptions o = options(4, 75, 1);
    o.variant = variant;
    Engine e(base_config(5), o);
    std::set<std::string> eliminated;
    for (const auto& ex : data) {
      e.predict(ex);
      // eliminated records leave the scheduled set at the next schedule call
      for (const auto& id : e.scheduled_ids()) ASSERT_FALSE(eliminated.count(id)) << id;
      const auto rec = e.observe(ex.label);
      for (const auto& el : e.eliminations()) eliminated.insert(el.id);
      // the no-champion ablation lets the scheduler release the champion
      if (variant != EngineVariant::NoChampion) ASSERT_TRUE(e.champion().live());
      ASSERT_LE(rec.live_size, o.budget);
      const auto pool = e.pool_ids();
      ASSERT_EQ(rec.pool_size, pool.size());
      for (const auto& id : pool) {
        ASSERT_FALSE(eliminated.count(id)) << id;
        ASSERT_NE(id, e.champion_id());
      }
      const auto live = e.live_ids();
      ASSERT_TRUE(std::count(live.begin(), live.end(), rec.incumbent)) << rec.incumbent;
    }
  }
}

TEST(EngineStep, NoChampionVariantSchedulesTheChampion) {
  EngineOptions o = options(3);
  o.variant = EngineVariant::NoChampion;
  Engine e(base_config(), o);
  const auto sched = e.scheduled_ids();
  EXPECT_EQ(sched, std::vector<std::string>{"none;lr=0.5"});
  e.step(stream(SynthKind::Interaction, 1)[0]);
  EXPECT_EQ(e.scheduled_ids().size(), 3u);
  EXPECT_EQ(e.live_size(), 3u);
}

TEST(EngineStep, TestLogRecordsEveryComparison) {
  EngineOptions o = options(5);
  o.log_tests = true;
  Engine e(base_config(), o);
  const auto data = stream(SynthKind::Interaction, 200);
  std::size_t expected = 0;
  for (const auto& ex : data) {
    expected += e.pool_size();
    e.step(ex);
  }
  EXPECT_EQ(e.test_log().size(), expected);
}

}  // namespace
}  // namespace chacha
