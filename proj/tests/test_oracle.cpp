#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "wallcoord/coordinate.hpp"
#include "wallcoord/error.hpp"
#include "wallcoord/oracle.hpp"

using namespace wallcoord;
using namespace testing_support;

namespace {

const Criteria kDefault{};

MissionSpec single_brick(std::vector<AgentSpec> agents) {
  MissionSpec s;
  s.bricks = {make_brick("B1.1", Color::Red, 0.3, {0.0, 4.0}, {5.0, 0.0, 0.0, 0.0}, 0)};
  s.agents = std::move(agents);
  return s;
}

}  // namespace

TEST(Exhaustive, SingleBrickPicksBetterAgent) {
  MissionSpec s = single_brick({make_agent("uav1", AgentKind::UAV, 2.0, 1.0), make_agent("uav2", AgentKind::UAV, 1.0, 1.0)});
  OptimalPlan best = exhaustive_optimal(s, {0.0, 1.0, 0.0, 0.8});
  EXPECT_EQ(best.assignment.at("TB(B1.1)"), "uav1");
  MissionAssessor assessor(s);
  EXPECT_TRUE(check_schedule(best.schedule, generate_tree(s), assessor).empty());
  EXPECT_DOUBLE_EQ(best.value, objective(best.schedule, s, {0.0, 1.0, 0.0, 0.8}));
}

TEST(Exhaustive, IdenticalAgentsSplitIndependentBricks) {
  MissionSpec s;
  s.bricks = {make_brick("B1.1", Color::Blue, 0.3, {-2.0, 4.0}, {0.0, 0.0, 0.0, 0.0}, 0),
              make_brick("B1.2", Color::Blue, 0.3, {2.0, 4.0}, {0.3, 0.0, 0.0, 0.0}, 0)};
  s.agents = {make_agent("uav1", AgentKind::UAV, 1.0, 1.0), make_agent("uav2", AgentKind::UAV, 1.0, 1.0)};
  // The neighbor edge only waits for the pick-up, so splitting still pays off.
  OptimalPlan best = exhaustive_optimal(s, {0.0, 1.0, 0.0, 0.8});
  EXPECT_NE(best.assignment.at("TB(B1.1)"), best.assignment.at("TB(B1.2)"));
}

TEST(Exhaustive, DominatesEveryMethod) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    MissionSpec s = random_mission(seed, 4, 3);
    for (const auto& c : table_rows()) {
      const double best = exhaustive_optimal(s, c).value;
      for (Method m : {Method::Proposed, Method::Auction})
        EXPECT_GE(best, objective(method_schedule(s, c, m), s, c) - 1e-12) << seed << " " << to_string(m);
    }
  }
}

TEST(Exhaustive, MultiCriteriaMatchesSingleRuns) {
  MissionSpec s = random_mission(3, 4, 3);
  auto rows = table_rows();
  auto all = exhaustive_optimal(s, rows);
  ASSERT_EQ(all.size(), rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) EXPECT_DOUBLE_EQ(all[k].value, exhaustive_optimal(s, rows[k]).value);
}

TEST(Exhaustive, Guards) {
  EXPECT_THROW(exhaustive_optimal(random_mission(1, kOracleMaxBricks + 1, 2), kDefault), Error);
  EXPECT_THROW(exhaustive_optimal(random_mission(1, 3, kOracleMaxAgents + 1), kDefault), Error);
  try {
    exhaustive_optimal(random_mission(1, kOracleMaxBricks + 1, 2), kDefault);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooLarge);
  }
}

TEST(Auction, SingleAgentMatchesOptimum) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    MissionSpec s = random_mission(seed, 4, 1);
    Schedule a = auction_baseline(s, kDefault);
    EXPECT_NEAR(objective(a, s, kDefault), exhaustive_optimal(s, kDefault).value, 1e-9) << seed;
  }
}

TEST(Auction, ThreeRobotScheduleIsValid) {
  MissionSpec s = load_mission(data_path("three_robot_mission.json"));
  Schedule a = auction_baseline(s, kDefault);
  MissionAssessor assessor(s);
  EXPECT_TRUE(check_schedule(a, generate_tree(s), assessor).empty());
}

TEST(Auction, JointTasksUnsupported) {
  try {
    auction_baseline(load_mission(data_path("orange_mission.json")), kDefault);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedJointTask);
  }
}

TEST(RandomMission, DeterministicAndValid) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    MissionSpec a = random_mission(seed, 6, 3);
    EXPECT_EQ(a, random_mission(seed, 6, 3));
    EXPECT_TRUE(validate_spec(a).empty());
    EXPECT_EQ(a.bricks.size(), 6u);
    EXPECT_EQ(a.agents.size(), 3u);
    EXPECT_TRUE(std::any_of(a.bricks.begin(), a.bricks.end(), [](const Brick& b) { return b.color != Color::Blue; }));
  }
  EXPECT_NE(random_mission(1, 6, 3), random_mission(2, 6, 3));
  EXPECT_THROW(random_mission(1, 0, 3), Error);
  EXPECT_THROW(random_mission(1, 3, 0), Error);
}

TEST(GapPercent, Definition) {
  EXPECT_DOUBLE_EQ(gap_percent(0.8, 0.6), 25.0);
  EXPECT_DOUBLE_EQ(gap_percent(0.5, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(gap_percent(-0.5, -1.0), 100.0);
  EXPECT_NEAR(gap_percent(0.0, -0.01), 1.0, 1e-12);
}

TEST(GapReport, Statistics) {
  GapReport one = make_report(kDefault, "proposed", {4.0});
  EXPECT_DOUBLE_EQ(one.mean_gap, 4.0);
  EXPECT_DOUBLE_EQ(one.std_gap, 0.0);
  GapReport three = make_report(kDefault, "proposed", {1.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(three.mean_gap, 2.0);
  EXPECT_DOUBLE_EQ(three.std_gap, 1.0);
}

TEST(GapStudy, NonNegativeAndParallelMatchesSerial) {
  auto corpus = seeded_corpus(6, 5, 3);
  auto rows = table_rows();
  GapStudy par = gap_study(corpus, rows);
  GapStudy ser = gap_study_serial(corpus, rows);
  ASSERT_EQ(par.proposed.size(), rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(par.proposed[k].gaps, ser.proposed[k].gaps);
    EXPECT_EQ(par.auction[k].gaps, ser.auction[k].gaps);
    for (double g : par.proposed[k].gaps) EXPECT_GE(g, 0.0);
    for (double g : par.auction[k].gaps) EXPECT_GE(g, 0.0);
  }
  EXPECT_EQ(format_study(par), format_study(ser));
  EXPECT_EQ(study_to_json(par), study_to_json(ser));
}

TEST(GapStudy, MatchesPerMissionReport) {
  auto corpus = seeded_corpus(3, 4, 3);
  GapReport r = gap_report(corpus, kDefault, Method::Proposed);
  ASSERT_EQ(r.gaps.size(), 3u);
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    double best = exhaustive_optimal(corpus[k], kDefault).value;
    double got = objective(method_schedule(corpus[k], kDefault, Method::Proposed), corpus[k], kDefault);
    EXPECT_DOUBLE_EQ(r.gaps[k], gap_percent(best, got));
  }
}

TEST(GapStudy, EmptyCorpus) {
  EXPECT_THROW(gap_study({}, table_rows()), Error);
  EXPECT_THROW(gap_study_serial({}, table_rows()), Error);
}

TEST(GapStudy, TableRowsOrder) {
  auto rows = table_rows();
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].alpha, 0.5);
  EXPECT_EQ(rows[1].gamma, 0.5);
  EXPECT_EQ(rows[2].alpha, 1.0);
  EXPECT_EQ(rows[3].beta, 1.0);
  EXPECT_EQ(rows[4].gamma, 1.0);
}

TEST(GapStudy, FormatMentionsEveryRow) {
  GapStudy st = gap_study(seeded_corpus(2, 3, 2), table_rows());
  std::string text = format_study(st);
  EXPECT_NE(text.find("mu"), std::string::npos);
  EXPECT_NE(text.find("sd"), std::string::npos);
  EXPECT_EQ(study_to_json(st).at("rows").size(), 5u);
}
