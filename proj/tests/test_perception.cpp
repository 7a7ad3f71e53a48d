#include <gtest/gtest.h>

#include "navsim/perception.hpp"
#include "oracles.hpp"

using namespace navsim;

namespace {

Observation empty_obs() {
  Observation o;
  o.depth.fov = 1.5;
  o.depth.max_range = 3.0;
  return o;
}

Observation obs_with(const std::string& label, double bearing) {
  Observation o = empty_obs();
  o.visible.push_back({label, bearing, 1.2});
  return o;
}

PromptSet prompts(const std::string& goal) { return PromptSet{{goal}, "Is there a " + goal + "?"}; }

Detection false_detection() { return {"remote", {0.1, 0.4, 0.04, 0.12}, 0.6}; }

/// Goal-absent false-goal frequency of the verification loop over n
/// observations drawn from one seeded generator.
double false_goal_rate(double fpr, double catch_rate, int max_reassessments, int n, std::uint64_t seed,
                       bool validator_on = true) {
  auto rng = std::make_shared<EpisodeRng>(seed);
  MockInitiator init({1.0, fpr}, rng);
  MockValidator mock({catch_rate, 1.0}, rng);
  FixedValidator agree(Decision::agree);
  Validator& val = validator_on ? static_cast<Validator&>(mock) : agree;
  int goals = 0;
  for (int i = 0; i < n; ++i)
    goals += doubly_right(empty_obs(), prompts("remote"), init, val, {max_reassessments, false}).goal;
  return static_cast<double>(goals) / n;
}

}  // namespace

TEST(Initiate, PerfectMockSeesVisibleGoal) {
  MockInitiator init({1.0, 0.0}, std::make_shared<EpisodeRng>(1));
  const Observation o = obs_with("remote", 0.2);
  const auto dets = initiate(o, prompts("remote"), init);
  ASSERT_EQ(dets.size(), 1u);
  EXPECT_EQ(dets[0].label, "remote");
  EXPECT_TRUE(dets[0].bbox.within_unit_square());
  EXPECT_GE(dets[0].confidence, 0.0);
  EXPECT_LE(dets[0].confidence, 1.0);
  EXPECT_TRUE(detection_is_true(dets[0], o));
}

TEST(Initiate, NothingVisibleNoFalsePositives) {
  MockInitiator init({1.0, 0.0}, std::make_shared<EpisodeRng>(1));
  for (int i = 0; i < 50; ++i) EXPECT_TRUE(initiate(obs_with("sofa", 0.1), prompts("remote"), init).empty());
}

TEST(Initiate, RejectsEmptyPromptSet) {
  MockInitiator init({1.0, 0.0}, std::make_shared<EpisodeRng>(1));
  EXPECT_THROW(initiate(empty_obs(), PromptSet{}, init), std::invalid_argument);
}

TEST(Initiate, FalseDetectionFrequencySeed7) {
  MockInitiator init({1.0, 0.3}, std::make_shared<EpisodeRng>(7));
  int hits = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto dets = initiate(empty_obs(), prompts("remote"), init);
    for (const auto& d : dets) {
      EXPECT_TRUE(d.bbox.within_unit_square());
      EXPECT_FALSE(detection_is_true(d, empty_obs()));
    }
    hits += !dets.empty();
  }
  EXPECT_NEAR(hits / 1000.0, 0.3, 0.03);
}

TEST(Validate, ScriptedAlwaysAgree) {
  ScriptedValidator val({{Decision::agree, std::nullopt}});
  const std::vector<Detection> dets{false_detection()};
  EXPECT_EQ(validate(empty_obs(), dets, "p", val).decision, Decision::agree);
}

TEST(Validate, CatchRateOneRejectsPlantedFalseDetection) {
  MockValidator val({1.0, 1.0}, std::make_shared<EpisodeRng>(3));
  const std::vector<Detection> dets{false_detection()};
  for (int i = 0; i < 100; ++i) EXPECT_EQ(validate(empty_obs(), dets, "p", val).decision, Decision::disagree);
}

TEST(Validate, AcceptsTrueDetection) {
  MockValidator val({1.0, 1.0}, std::make_shared<EpisodeRng>(3));
  const Observation o = obs_with("remote", -0.3);
  const std::vector<Detection> dets{{"remote", bbox_for_bearing(-0.3, o.depth.fov), 0.9}};
  EXPECT_EQ(validate(o, dets, "p", val).decision, Decision::agree);
  EXPECT_EQ(validate(o, {}, "p", val).decision, Decision::agree);
}

TEST(Validate, DisagreeFrequencySeed7) {
  MockValidator val({0.9, 1.0}, std::make_shared<EpisodeRng>(7));
  const std::vector<Detection> dets{false_detection()};
  int disagree = 0;
  for (int i = 0; i < 1000; ++i) disagree += validate(empty_obs(), dets, "p", val).decision == Decision::disagree;
  EXPECT_NEAR(disagree / 1000.0, 0.9, 0.03);
}

TEST(DoublyRight, PerfectPipelineFindsGoal) {
  MockInitiator init({1.0, 0.0}, std::make_shared<EpisodeRng>(1));
  FixedValidator val(Decision::agree);
  const auto out = doubly_right(obs_with("remote", 0.0), prompts("remote"), init, val);
  EXPECT_TRUE(out.goal);
  EXPECT_EQ(out.attempts, 1);
  ASSERT_EQ(out.accepted.size(), 1u);
  EXPECT_EQ(out.last_decision, Decision::agree);
}

TEST(DoublyRight, EmptyInitiatorShortCircuits) {
  ScriptedInitiator init({});
  ScriptedValidator val({{Decision::agree, std::nullopt}});
  const auto out = doubly_right(empty_obs(), prompts("remote"), init, val, {3, false});
  EXPECT_FALSE(out.goal);
  EXPECT_EQ(out.attempts, 1);
  EXPECT_FALSE(out.last_decision.has_value());
}

TEST(DoublyRight, AcceptEmptyFollowsOriginalLoop) {
  ScriptedInitiator init({});
  FixedValidator val(Decision::agree);
  const auto out = doubly_right(empty_obs(), prompts("remote"), init, val, {3, true});
  EXPECT_TRUE(out.goal);
  EXPECT_TRUE(out.accepted.empty());
}

TEST(DoublyRight, ReassessesThenAgrees) {
  const Detection d = false_detection();
  ScriptedInitiator init({{d}, {d}, {d}});
  ScriptedValidator val({{Decision::disagree, "no"}, {Decision::agree, std::nullopt}});
  const auto out = doubly_right(empty_obs(), prompts("remote"), init, val, {2, false});
  EXPECT_TRUE(out.goal);
  EXPECT_EQ(out.attempts, 2);
  EXPECT_EQ(init.calls(), 2u);
}

TEST(DoublyRight, ReassessmentBudget) {
  const Detection d = false_detection();
  for (int budget = 0; budget <= 4; ++budget) {
    ScriptedInitiator init(std::vector<std::vector<Detection>>(10, {d}));
    FixedValidator val(Decision::disagree);
    const auto out = doubly_right(empty_obs(), prompts("remote"), init, val, {budget, false});
    EXPECT_FALSE(out.goal);
    EXPECT_EQ(out.attempts, budget + 1);
    EXPECT_EQ(out.last_decision, Decision::disagree);
  }
  ScriptedInitiator init({});
  FixedValidator val(Decision::agree);
  EXPECT_THROW(doubly_right(empty_obs(), prompts("remote"), init, val, {-1, false}), std::invalid_argument);
}

TEST(DoublyRight, RandomInvariants) {
  oracle::Rng pick(11);
  for (int k = 0; k < 300; ++k) {
    const int budget = pick.uniform_int(0, 3);
    auto rng = std::make_shared<EpisodeRng>(static_cast<std::uint64_t>(k));
    MockInitiator init({pick.uniform(), pick.uniform()}, rng);
    MockValidator val({pick.uniform(), pick.uniform()}, rng);
    const Observation o = pick.chance(0.5) ? obs_with("remote", pick.uniform(-0.6, 0.6)) : empty_obs();
    const auto out = doubly_right(o, prompts("remote"), init, val, {budget, false});
    EXPECT_LE(out.attempts, budget + 1);
    if (out.goal) {
      EXPECT_FALSE(out.accepted.empty());
      EXPECT_EQ(out.last_decision, Decision::agree);
    }
  }
}

TEST(DoublyRight, AlwaysAgreeEqualsSingleDetector) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    MockInitiator a({0.7, 0.4}, std::make_shared<EpisodeRng>(seed));
    MockInitiator b({0.7, 0.4}, std::make_shared<EpisodeRng>(seed));
    FixedValidator agree(Decision::agree);
    const Observation o = seed % 2 ? obs_with("remote", 0.1) : empty_obs();
    const bool single = !initiate(o, prompts("remote"), a).empty();
    EXPECT_EQ(doubly_right(o, prompts("remote"), b, agree).goal, single);
  }
}

TEST(DoublyRight, AlwaysDisagreeNeverGoal) {
  MockInitiator init({1.0, 1.0}, std::make_shared<EpisodeRng>(2));
  FixedValidator val(Decision::disagree);
  for (int i = 0; i < 100; ++i) EXPECT_FALSE(doubly_right(obs_with("remote", 0.0), prompts("remote"), init, val).goal);
}

TEST(DoublyRight, SeedDeterminism) {
  auto run = [](std::uint64_t seed) {
    auto rng = std::make_shared<EpisodeRng>(seed);
    MockInitiator init({0.8, 0.3}, rng);
    MockValidator val({0.9, 0.8}, rng);
    std::vector<std::pair<bool, int>> seq;
    for (int i = 0; i < 200; ++i) {
      const auto out = doubly_right(i % 3 ? empty_obs() : obs_with("remote", 0.2), prompts("remote"), init, val);
      seq.push_back({out.goal, out.attempts});
    }
    return seq;
  };
  EXPECT_EQ(run(5), run(5));
  EXPECT_NE(run(5), run(6));
}

TEST(DoublyRight, FalseGoalRateMonteCarlo) {
  EXPECT_LE(false_goal_rate(0.3, 0.9, 1, 1000, 7), 0.05);
  EXPECT_GE(false_goal_rate(0.3, 0.9, 1, 1000, 7, false), 0.27);
}

// One try: p(1 - q); a second try after a caught false positive: p q p (1 - q).
TEST(DoublyRight, FalseGoalRateMatchesAnalytic) {
  const double p = 0.3, q = 0.9;
  const double analytic = p * (1 - q) + p * q * p * (1 - q);
  EXPECT_NEAR(analytic, 0.0381, 1e-12);
  EXPECT_NEAR(false_goal_rate(p, q, 1, 200000, 99), analytic, 0.002);
}

TEST(DoublyRight, FalseGoalReduction) {
  oracle::Rng pick(13);
  for (int k = 0; k < 20; ++k) {
    const double p = pick.uniform(0.05, 0.95), q = pick.uniform(0.05, 1.0);
    const double with = false_goal_rate(p, q, pick.uniform_int(0, 3), 5000, static_cast<std::uint64_t>(100 + k));
    EXPECT_LT(with, p) << "p=" << p << " q=" << q;
  }
}

TEST(EpisodeRng, UniformRangeAndDeterminism) {
  EpisodeRng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_EQ(u, b.uniform());
  }
}
