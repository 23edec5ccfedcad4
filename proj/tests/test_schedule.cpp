#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "wallcoord/coordinate.hpp"
#include "wallcoord/error.hpp"
#include "wallcoord/oracle.hpp"

using namespace wallcoord;
using namespace testing_support;

namespace {

std::vector<NodeId> ids(std::initializer_list<const char*> xs) { return {xs.begin(), xs.end()}; }

bool has_rule(const std::vector<ScheduleViolation>& v, ScheduleRule r) {
  return std::any_of(v.begin(), v.end(), [&](const ScheduleViolation& x) { return x.rule == r; });
}

Schedule one_agent_plan(const MissionSpec& s, const TaemsTree& t) {
  MissionAssessor assessor(s);
  return build_schedule(t, {{"TB(B1.1)", "uav1"}, {"TB(B2.1)", "uav1"}}, assessor);
}

}  // namespace

TEST(Trace, WithoutCarryResourceActionsInterleave) {
  MissionSpec s = two_brick_mission();
  TaemsTree t = generate_tree(s, {.carry_resources = false});
  Schedule plan = one_agent_plan(s, t);
  EXPECT_EQ(plan.action_order("uav1"), ids({"GP(B1.1)", "PU(B1.1)", "GP(B2.1)", "PU(B2.1)", "GW(B1.1)", "GW(B2.1)",
                                            "PD(B1.1)", "PD(B2.1)"}));
  MissionAssessor assessor(s);
  EXPECT_TRUE(check_schedule(plan, t, assessor).empty());
}

TEST(Trace, CarryResourceSerializesBricks) {
  MissionSpec s = two_brick_mission();
  TaemsTree t = generate_tree(s);
  Schedule plan = one_agent_plan(s, t);
  EXPECT_EQ(plan.action_order("uav1"), ids({"GP(B1.1)", "PU(B1.1)", "GW(B1.1)", "PD(B1.1)", "GP(B2.1)", "PU(B2.1)",
                                            "GW(B2.1)", "PD(B2.1)"}));
  // Start (0,-3), pile B1.1 (0,4), wall B1.1 (5,0,0), pile B2.1 (0,5), wall B2.1 (5,0,0.2); speed 1.
  const double expected = 7.0 + 5.0 + std::sqrt(41.0) + 5.0 + std::sqrt(50.0) + 5.0 + std::sqrt(50.04) + 5.0;
  EXPECT_NEAR(plan.makespan, expected, 1e-9);
  EXPECT_NEAR(plan.total_cost, expected, 1e-9);  // rate 1, shortest bricks
  EXPECT_DOUBLE_EQ(plan.total_quality, 6.0);
  MissionAssessor assessor(s);
  EXPECT_TRUE(check_schedule(plan, t, assessor).empty());
  EXPECT_TRUE(schedule_invariants(plan, t).empty());
}

TEST(Trace, BindingEnablesEdge) {
  MissionSpec s = two_brick_mission();
  s.agents.push_back(make_agent("uav2", AgentKind::UAV, 1.0, 1.0, {0.0, 5.0}));
  TaemsTree t = generate_tree(s);
  MissionAssessor assessor(s);
  // uav2 starts on the B2.1 pile, so PU(B1.1) is what releases GP(B2.1).
  Schedule plan = build_schedule(t, {{"TB(B1.1)", "uav1"}, {"TB(B2.1)", "uav2"}}, assessor);
  ASSERT_EQ(plan.binding_enables.size(), 1u);
  EXPECT_EQ(plan.binding_enables[0], std::make_pair(NodeId("PU(B1.1)"), NodeId("GP(B2.1)")));
  EXPECT_TRUE(check_schedule(plan, t, assessor).empty());
}

TEST(Trace, OrangeJointActionsStartTogether) {
  MissionSpec s = orange_mission(3);
  TaemsTree t = generate_tree(s);
  Schedule plan = centralized_plan(s);
  MissionAssessor assessor(s);
  EXPECT_TRUE(check_schedule(plan, t, assessor).empty());
  std::map<NodeId, const ScheduledAction*> at;
  for (const auto& e : plan.entries) at[e.action] = &e;
  for (const char* type : {"GP", "PU", "GW", "PD"}) {
    const std::string a = std::string(type) + "(B1.1)#1";
    const std::string b = std::string(type) + "(B1.1)#2";
    ASSERT_TRUE(at.contains(a) && at.contains(b));
    EXPECT_EQ(at[a]->start, at[b]->start) << type;
    EXPECT_EQ(at[a]->end, at[b]->end) << type;
    EXPECT_NE(at[a]->agent, at[b]->agent);
  }
}

TEST(CheckSchedule, DetectsEnablesViolation) {
  MissionSpec s = two_brick_mission();
  s.agents.push_back(make_agent("uav2", AgentKind::UAV, 1.0, 1.0));
  TaemsTree t = generate_tree(s);
  MissionAssessor assessor(s);
  Schedule plan = build_schedule(t, {{"TB(B1.1)", "uav1"}, {"TB(B2.1)", "uav2"}}, assessor);
  double shift = 0.0;
  for (const auto& e : plan.entries)
    if (e.action == "GP(B2.1)") shift = e.start;
  ASSERT_GT(shift, 0.0);
  for (auto& e : plan.entries)
    if (e.agent == "uav2") e.start -= shift, e.end -= shift;
  auto v = check_schedule(plan, t, assessor);
  EXPECT_TRUE(has_rule(v, ScheduleRule::EnablesViolation));
  EXPECT_FALSE(schedule_invariants(plan, t).empty());
}

TEST(CheckSchedule, DetectsResourceViolation) {
  // The interleaved plan picks the second brick while still holding the first.
  MissionSpec s = two_brick_mission();
  Schedule interleaved = one_agent_plan(s, generate_tree(s, {.carry_resources = false}));
  MissionAssessor assessor(s);
  auto v = check_schedule(interleaved, generate_tree(s), assessor);
  EXPECT_TRUE(has_rule(v, ScheduleRule::ResourceViolation));
}

TEST(CheckSchedule, DetectsStructuralFaults) {
  MissionSpec s = two_brick_mission();
  TaemsTree t = generate_tree(s);
  MissionAssessor assessor(s);
  const Schedule good = one_agent_plan(s, t);

  Schedule missing = good;
  missing.entries.pop_back();
  EXPECT_TRUE(has_rule(check_schedule(missing, t, assessor), ScheduleRule::MissingAction));

  Schedule dup = good;
  dup.entries.push_back(dup.entries.back());
  EXPECT_TRUE(has_rule(check_schedule(dup, t, assessor), ScheduleRule::DuplicateAction));

  Schedule stretched = good;
  stretched.entries[0].end += 1.0;
  EXPECT_TRUE(has_rule(check_schedule(stretched, t, assessor), ScheduleRule::DurationMismatch));

  Schedule summary = good;
  summary.makespan += 1.0;
  EXPECT_TRUE(has_rule(check_schedule(summary, t, assessor), ScheduleRule::SummaryMismatch));

  Schedule unknown = good;
  unknown.entries[0].action = "GP(B7.7)";
  EXPECT_TRUE(has_rule(check_schedule(unknown, t, assessor), ScheduleRule::UnknownAction));
}

TEST(BuildSchedule, DisablesCycleDeadlocks) {
  MissionSpec s = two_brick_mission();
  TaemsTree t = generate_tree(s);
  // GP(B1.1) now waits for PD(B2.1), which itself waits for PU(B1.1).
  t.interrelationships.push_back({RelationKind::Disables, "GP(B1.1)", "PD(B2.1)"});
  MissionAssessor assessor(s);
  try {
    build_schedule(t, {{"TB(B1.1)", "uav1"}, {"TB(B2.1)", "uav1"}}, assessor);
    FAIL() << "expected deadlock";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Deadlock);
    EXPECT_NE(std::string(e.what()).find("GP(B1.1)"), std::string::npos);
  }
}

TEST(BuildSchedule, UnassignedUnitsAreSkipped) {
  MissionSpec s = two_brick_mission();
  TaemsTree t = generate_tree(s);
  MissionAssessor assessor(s);
  Schedule only_first = build_schedule(t, {{"TB(B1.1)", "uav1"}}, assessor);
  EXPECT_EQ(only_first.entries.size(), 4u);
}

TEST(BuildSchedule, InfeasibleAssignmentThrowsOrIsReported) {
  MissionSpec s;
  s.bricks = {make_brick("B1.1", Color::Blue, 0.3, {0.0, 4.0}, {5.0, 0.0, 0.0, 0.0}, 0)};
  s.agents = {make_agent("uav1", AgentKind::UAV, 1.0, 1.0), make_agent("ugv1", AgentKind::UGV, 0.5, 0.2)};
  TaemsTree t = generate_tree(s);
  MissionAssessor assessor(s);
  Schedule good = build_schedule(t, {{"TB(B1.1)", "uav1"}}, assessor);
  Schedule bad = good;
  for (auto& e : bad.entries) e.agent = "ugv1";
  EXPECT_TRUE(has_rule(check_schedule(bad, t, assessor), ScheduleRule::InfeasibleAssignment));
}

TEST(ScheduleProperty, RandomMissionsPassChecks) {
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    const int bricks = 1 + static_cast<int>(seed % 8);
    const int agents = 1 + static_cast<int>(seed % 4);
    MissionSpec s = random_mission(seed, bricks, agents);
    TaemsTree t = generate_tree(s);
    MissionAssessor assessor(s);
    Schedule plan = build_schedule(t, centralized_assignments(s, t), assessor);
    auto v = check_schedule(plan, t, assessor);
    EXPECT_TRUE(v.empty()) << seed << ": " << (v.empty() ? "" : v[0].detail);
    EXPECT_TRUE(schedule_invariants(plan, t).empty()) << seed << ": " << join(schedule_invariants(plan, t));
    EXPECT_EQ(plan.entries.size(), static_cast<std::size_t>(4 * bricks));
    // Deterministic: a second build is identical.
    EXPECT_EQ(plan, build_schedule(t, centralized_assignments(s, t), assessor));
  }
}

TEST(ScheduleProperty, ForcedOrderReplaysTheFreeSchedule) {
  // Replaying a schedule's own start order reproduces it exactly; the gap
  // study relies on this to keep gaps non-negative.
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    MissionSpec s = random_mission(seed, 5, 3);
    TaemsTree t = generate_tree(s);
    MissionAssessor assessor(s);
    auto assignment = centralized_assignments(s, t);
    Schedule free = build_schedule(t, assignment, assessor);
    UnitOrder order;
    for (const auto& e : free.entries) {
      auto ref = parse_action_id(e.action);
      if (ref && ref->type == ActionType::GP) order[e.agent].push_back(brick_task_id(ref->brick));
    }
    EXPECT_EQ(build_schedule(t, assignment, assessor, &order), free) << seed;
  }
}

TEST(Objective, HandComputed) {
  MissionSpec s;
  s.bricks = {make_brick("B1.1", Color::Blue, 0.3, {0.0, 4.0}, {5.0, 0.0, 0.0, 0.0}, 0)};
  s.agents = {make_agent("uav1", AgentKind::UAV, 1.0, 2.0)};
  TaemsTree t = generate_tree(s);
  MissionAssessor assessor(s);
  Schedule plan = build_schedule(t, {{"TB(B1.1)", "uav1"}}, assessor);
  const double makespan = 7.0 + 5.0 + std::sqrt(41.0) + 5.0;
  EXPECT_NEAR(plan.makespan, makespan, 1e-9);
  EXPECT_NEAR(plan.total_cost, 2.0 * makespan, 1e-9);

  ObjectiveReference ref = objective_reference(s);
  EXPECT_DOUBLE_EQ(ref.best_quality, 3.0);
  EXPECT_NEAR(ref.serial_makespan, makespan, 1e-9);
  EXPECT_NEAR(ref.serial_cost, 2.0 * makespan, 1e-9);

  EXPECT_DOUBLE_EQ(objective(plan, s, {1.0, 0.0, 0.0, 0.8}), 1.0);
  EXPECT_NEAR(objective(plan, s, {0.0, 1.0, 0.0, 0.8}), 0.0, 1e-12);
  // Half the reference time and cost.
  ObjectiveReference doubled{3.0, 2.0 * makespan, 4.0 * makespan};
  EXPECT_NEAR(objective(plan, s, {0.5, 0.35, 0.15, 0.8}, doubled), 0.5 + 0.35 * 0.5 + 0.15 * 0.5, 1e-12);
}

TEST(ScheduleJson, RoundTrip) {
  Schedule plan = centralized_plan(load_mission(data_path("three_robot_mission.json")));
  EXPECT_EQ(schedule_from_json(nlohmann::json::parse(schedule_to_json(plan).dump())), plan);
  EXPECT_THROW(schedule_from_json(nlohmann::json::parse(R"({"entries": 3})")), Error);
}

TEST(ScheduleSummary, UnitCounts) {
  MissionSpec s = orange_mission(2);
  Schedule plan = centralized_plan(s);
  auto counts = plan.unit_counts();
  EXPECT_EQ(counts.at("uav1"), 1);
  EXPECT_EQ(counts.at("uav2"), 1);
}
