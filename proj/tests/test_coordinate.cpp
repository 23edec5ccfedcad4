#include <gtest/gtest.h>

#include "support.hpp"
#include "wallcoord/coordinate.hpp"
#include "wallcoord/error.hpp"
#include "wallcoord/oracle.hpp"

using namespace wallcoord;
using namespace testing_support;

namespace {

int count_kind(const MessageTrace& t, MessageKind k) {
  return static_cast<int>(std::count_if(t.begin(), t.end(), [&](const Message& m) { return m.kind == k; }));
}

std::map<AgentId, int> brick_counts(const Schedule& s, const MissionSpec& spec, std::set<Color> colors) {
  std::map<AgentId, int> out;
  for (const auto& a : spec.agents) out[a.id] = 0;
  for (const auto& e : s.entries) {
    auto ref = parse_action_id(e.action);
    if (ref->type != ActionType::PD) continue;
    if (colors.contains(spec.find_brick(ref->brick)->color)) ++out[e.agent];
  }
  return out;
}

MissionSpec with_criteria(MissionSpec s, double a, double b, double g) {
  s.criteria.alpha = a;
  s.criteria.beta = b;
  s.criteria.gamma = g;
  return s;
}

}  // namespace

TEST(Referee, SmallestIdWins) {
  EXPECT_EQ(elect_referee({"uav2", "ugv1", "uav1"}), "uav1");
  EXPECT_EQ(elect_referee({"x"}), "x");
  EXPECT_THROW(elect_referee({}), Error);
}

TEST(Bus, SequenceNumbersAndDelivery) {
  Bus bus(1);
  bus.send({MessageKind::StatusUpdate, "a", kBroadcast});
  bus.send({MessageKind::StatusUpdate, "a", "b"});
  bus.send({MessageKind::StatusUpdate, "b", "a"});
  EXPECT_FALSE(bus.idle());
  auto delivered = bus.deliver_round();
  EXPECT_TRUE(bus.idle());
  ASSERT_EQ(delivered.size(), 3u);
  std::vector<std::uint64_t> a_seqs;
  for (const auto& m : delivered) {
    EXPECT_EQ(m.timestamp, 1u);
    if (m.from == "a") a_seqs.push_back(m.seq);
  }
  EXPECT_EQ(a_seqs, (std::vector<std::uint64_t>{1, 2}));
  EXPECT_EQ(bus.trace().size(), 3u);
}

TEST(Bus, DroppedMessagesAreTracedNotDelivered) {
  FaultPolicy p;
  p.drop_occurrences[MessageKind::Award] = {2};
  Bus bus = inject_fault(Bus(3), p);
  for (int k = 0; k < 3; ++k) bus.send({MessageKind::Award, "a", "b", {{"k", k}}});
  auto delivered = bus.deliver_round();
  EXPECT_EQ(delivered.size(), 2u);
  ASSERT_EQ(bus.trace().size(), 3u);
  int dropped = 0;
  for (const auto& m : bus.trace())
    if (m.dropped) {
      ++dropped;
      EXPECT_EQ(m.payload.at("k"), 1);
    }
  EXPECT_EQ(dropped, 1);
}

TEST(Coordination, ThreeRobotDefaultCriteria) {
  MissionSpec s = load_mission(data_path("three_robot_mission.json"));
  CoordinationResult r = run_coordination(s, 1);
  auto counts = r.schedule.unit_counts();
  EXPECT_EQ(counts["ugv1"], 0);
  EXPECT_LE(std::abs(counts["uav1"] - counts["uav2"]), 1);
  EXPECT_EQ(counts["uav1"] + counts["uav2"], 8);
  MissionAssessor assessor(s);
  EXPECT_TRUE(check_schedule(r.schedule, generate_tree(s), assessor).empty());
}

TEST(Coordination, ThreeRobotCostOnly) {
  MissionSpec s = with_criteria(load_mission(data_path("three_robot_mission.json")), 0.0, 0.0, 1.0);
  CoordinationResult r = run_coordination(s, 1);
  auto red_green = brick_counts(r.schedule, s, {Color::Red, Color::Green});
  auto blue = brick_counts(r.schedule, s, {Color::Blue});
  int n_red_green = 0;
  for (const auto& b : s.bricks) n_red_green += b.color != Color::Blue;
  EXPECT_EQ(red_green["ugv1"], n_red_green);
  EXPECT_EQ(blue["ugv1"], 0);
  EXPECT_EQ(red_green["uav1"] + red_green["uav2"], 0);
}

TEST(Coordination, SingleAgentSingleBrickTrace) {
  MissionSpec s;
  s.bricks = {make_brick("B1.1", Color::Blue, 0.3, {0.0, 4.0}, {5.0, 0.0, 0.0, 0.0}, 0)};
  s.agents = {make_agent("uav1", AgentKind::UAV, 1.0, 1.0)};
  CoordinationResult r = run_coordination(s, 9);
  EXPECT_EQ(count_kind(r.trace, MessageKind::AssessmentShare), 1);
  EXPECT_EQ(count_kind(r.trace, MessageKind::Award), 0);
  EXPECT_EQ(count_kind(r.trace, MessageKind::RefereeClaim), 0);
  EXPECT_EQ(r.assignments.at("TB(B1.1)"), "uav1");
  EXPECT_EQ(r.schedule.entries.size(), 4u);
}

TEST(Coordination, OrangeHandshakes) {
  MissionSpec s = load_mission(data_path("orange_mission.json"));
  CoordinationResult r = run_coordination(s, 4);
  int orange = 0;
  for (const auto& b : s.bricks) orange += b.color == Color::Orange;
  EXPECT_EQ(count_kind(r.trace, MessageKind::SyncRequest), 4 * orange);
  EXPECT_EQ(count_kind(r.trace, MessageKind::SyncAck), 4 * orange);
  std::map<std::string, std::set<double>> starts;
  for (const auto& e : r.schedule.entries) {
    auto ref = parse_action_id(e.action);
    if (ref->slot > 0) starts[std::string(to_string(ref->type)) + ref->brick].insert(e.start);
  }
  EXPECT_EQ(starts.size(), 4u * orange);
  for (const auto& [k, v] : starts) EXPECT_EQ(v.size(), 1u) << k;
}

TEST(CoordinationProperty, AgreementExactlyOnceAndTransparency) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    MissionSpec s = random_mission(seed, 1 + static_cast<int>(seed % 7), 1 + static_cast<int>(seed % 4));
    TaemsTree t = generate_tree(s);
    CoordinationResult r = run_coordination(s, seed);
    // Every agent holds the same award view.
    for (const auto& [agent, view] : r.views) EXPECT_EQ(view, r.assignments) << seed << " " << agent;
    // Each unit runs on exactly one agent, all four of its actions.
    std::map<NodeId, std::set<AgentId>> runners;
    for (const auto& e : r.schedule.entries) runners[brick_task_id(parse_action_id(e.action)->brick)].insert(e.agent);
    EXPECT_EQ(runners.size(), s.bricks.size());
    for (const auto& [u, who] : runners) EXPECT_EQ(who.size(), 1u) << u;
    // Same outcome as the centralized computation.
    EXPECT_EQ(r.assignments, centralized_assignments(s, t)) << seed;
    Schedule central = centralized_plan(s);
    EXPECT_EQ(r.schedule.entries, central.entries) << seed;
    EXPECT_DOUBLE_EQ(r.schedule.makespan, central.makespan);
  }
}

TEST(CoordinationProperty, TraceIsDeterministic) {
  MissionSpec s = load_mission(data_path("orange_mission.json"));
  for (std::uint64_t seed : {1u, 2u, 77u}) {
    CoordinationResult a = run_coordination(s, seed);
    CoordinationResult b = run_coordination(s, seed);
    EXPECT_EQ(a.trace, b.trace);
    EXPECT_EQ(a.schedule, b.schedule);
    EXPECT_EQ(trace_to_ndjson(a.trace), trace_to_ndjson(b.trace));
  }
}

TEST(CoordinationProperty, SeedChangesOnlyMessageOrder) {
  MissionSpec s = load_mission(data_path("three_robot_mission.json"));
  CoordinationResult a = run_coordination(s, 1);
  CoordinationResult b = run_coordination(s, 2);
  EXPECT_EQ(a.schedule, b.schedule);
  EXPECT_EQ(a.trace.size(), b.trace.size());
}

TEST(Faults, EmptyPolicyChangesNothing) {
  MissionSpec s = load_mission(data_path("orange_mission.json"));
  CoordinationOptions opts;
  opts.faults = FaultPolicy{};
  EXPECT_EQ(run_coordination(s, 5, opts).trace, run_coordination(s, 5).trace);
}

TEST(Faults, DroppedAckIsRetried) {
  MissionSpec s = load_mission(data_path("orange_mission.json"));
  CoordinationOptions opts;
  opts.faults = FaultPolicy{};
  opts.faults->drop_occurrences[MessageKind::SyncAck] = {1};
  CoordinationResult r = run_coordination(s, 5, opts);
  EXPECT_EQ(count_kind(r.trace, MessageKind::SyncRequest), 5);
  bool retried = std::any_of(r.trace.begin(), r.trace.end(), [](const Message& m) {
    return m.kind == MessageKind::SyncRequest && m.payload.at("attempt") == 2;
  });
  EXPECT_TRUE(retried);
  EXPECT_EQ(r.schedule, run_coordination(s, 5).schedule);
}

TEST(Faults, PersistentAckLossTimesOut) {
  MissionSpec s = load_mission(data_path("orange_mission.json"));
  CoordinationOptions opts;
  opts.faults = FaultPolicy{};
  opts.faults->drop_occurrences[MessageKind::SyncAck] = {1, 2, 3, 4};
  try {
    run_coordination(s, 5, opts);
    FAIL() << "expected timeout";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CoordinationTimeout);
  }
}

TEST(Faults, ConstantDelayShiftsTimestampsOnly) {
  MissionSpec s = load_mission(data_path("three_robot_mission.json"));
  CoordinationOptions opts;
  opts.faults = FaultPolicy{};
  opts.faults->delay = 3;
  CoordinationResult slow = run_coordination(s, 5, opts);
  CoordinationResult base = run_coordination(s, 5);
  ASSERT_EQ(slow.trace.size(), base.trace.size());
  for (std::size_t k = 0; k < base.trace.size(); ++k) {
    EXPECT_EQ(slow.trace[k].timestamp, base.trace[k].timestamp + 3);
    EXPECT_EQ(slow.trace[k].kind, base.trace[k].kind);
  }
  EXPECT_EQ(slow.schedule, base.schedule);
}

TEST(Faults, LostAssessmentShareTimesOut) {
  MissionSpec s = load_mission(data_path("three_robot_mission.json"));
  CoordinationOptions opts;
  opts.faults = FaultPolicy{};
  opts.faults->drop_occurrences[MessageKind::AssessmentShare] = {1};
  try {
    run_coordination(s, 5, opts);
    FAIL() << "expected timeout";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CoordinationTimeout);
  }
}

TEST(Coordination, BadCriteriaRejected) {
  MissionSpec s = with_criteria(load_mission(data_path("three_robot_mission.json")), 0.5, 0.5, 0.5);
  EXPECT_THROW(run_coordination(s, 1), Error);
}

TEST(TraceJson, NdjsonRoundTrip) {
  MissionSpec s = load_mission(data_path("orange_mission.json"));
  CoordinationOptions opts;
  opts.faults = FaultPolicy{};
  opts.faults->drop_occurrences[MessageKind::SyncAck] = {1};
  MessageTrace t = run_coordination(s, 3, opts).trace;
  std::string text = trace_to_ndjson(t);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), static_cast<long>(t.size()));
  EXPECT_EQ(trace_from_ndjson(text), t);
  EXPECT_THROW(trace_from_ndjson("{not json}\n"), Error);
  EXPECT_THROW(parse_message_kind("Hello"), Error);
}
