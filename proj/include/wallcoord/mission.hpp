#pragma once

// Wall-building missions: bricks, agents, scoring, and the translation of a
// mission into a task tree plus per-agent action assessments.

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wallcoord/taems.hpp"

namespace wallcoord {

/// Duration and cost assigned to infeasible (agent, action) pairs.
inline constexpr double kBigM = 1e6;
/// Smallest brick length; cost scales with length relative to it.
inline constexpr double kReferenceBrickLength = 0.3;

enum class Color { Red, Green, Blue, Orange };
enum class AgentKind { UGV, UAV, UAVx2 };
enum class ActionType { GP, PU, GW, PD };

std::string_view to_string(Color c);
std::string_view to_string(AgentKind k);
std::string_view to_string(ActionType t);
Color parse_color(const std::string& s);
AgentKind parse_agent_kind(const std::string& s);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

struct Pose3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double yaw = 0.0;
  bool operator==(const Pose3&) const = default;
};

struct Brick {
  std::string id;
  Color color = Color::Red;
  double length = 0.3;
  double width = 0.2;
  double height = 0.2;
  Point2 pile_position;
  Pose3 wall_pose;
  int layer = 0;
  std::vector<std::string> supports;
  bool operator==(const Brick&) const = default;
};

struct AgentSpec {
  AgentId id;
  AgentKind kind = AgentKind::UAV;
  double speed = 1.0;
  double cost_rate = 1.0;
  Point2 start_position;
  double reach_height = std::numeric_limits<double>::infinity();
  std::optional<std::pair<AgentId, AgentId>> member_ids;
  bool operator==(const AgentSpec&) const = default;
};

struct ScoreTable {
  std::map<Color, double> base_points;
  std::map<Color, double> uav_bonus;
  bool operator==(const ScoreTable&) const = default;

  // Red 1, Green 2, Blue 3, Orange 4 points; UAV bonus 2.0 / 1.4 / 1.0 / 1.0.
  static ScoreTable defaults();
};

struct Assessment {
  double quality = 0.0;
  double duration = 0.0;
  double cost = 0.0;

  bool feasible() const { return duration < kBigM; }
  static Assessment infeasible() { return {0.0, kBigM, kBigM}; }
  bool operator==(const Assessment&) const = default;
};

struct Criteria {
  double alpha = 0.5;
  double beta = 0.35;
  double gamma = 0.15;
  double delta = 0.8;
  bool operator==(const Criteria&) const = default;
};

struct MissionSpec {
  std::vector<Brick> bricks;
  std::vector<AgentSpec> agents;
  ScoreTable score_table = ScoreTable::defaults();
  Criteria criteria;
  double fixed_grab_s = 5.0;
  double fixed_release_s = 5.0;
  bool operator==(const MissionSpec&) const = default;

  const Brick* find_brick(std::string_view id) const;
  const AgentSpec* find_agent(std::string_view id) const;
};

// Human-readable problems; empty when the spec is well formed. Does not check
// that every brick has an eligible agent (generate_tree reports that).
std::vector<std::string> validate_spec(const MissionSpec& spec);
// Weight checks shared by the spec validator and the CLI.
bool weights_valid(double alpha, double beta, double gamma);
bool delta_valid(double delta);

// -- node naming ---------------------------------------------------------------

std::string brick_task_id(const std::string& brick);                   // TB(b)
std::string subtask_id(const std::string& brick, int slot);            // TB(b)#k
std::string action_id(ActionType t, const std::string& brick, int slot = 0);  // GP(b) or GP(b)#k

struct ActionRef {
  ActionType type;
  std::string brick;
  int slot = 0;  // 0 for simple bricks, 1..n for joint subtasks
};
std::optional<ActionRef> parse_action_id(std::string_view id);

// Number of subtasks an orange brick is split into.
inline constexpr int kJointSlots = 2;

// -- tree generation and assessment -----------------------------------------

struct TreeOptions {
  bool carry_resources = true;
};

std::string carry_resource_id(const AgentId& agent);
inline constexpr std::string_view kRootId = "Wall";

// Throws Error(EmptyWall), Error(InvalidSpec) or Error(NoEligibleAgent).
TaemsTree generate_tree(const MissionSpec& spec, TreeOptions options = {});

// Agent kinds allowed to handle a brick of this color.
std::vector<AgentKind> eligible_kinds(Color c);

// Planning-time assessment: GP is measured from the agent's start position.
// Throws Error(UnknownAction) for ids that do not name a brick action.
Assessment assess(const MissionSpec& spec, const AgentSpec& agent, const NodeId& action);

// Assessment with GP measured from where `previous` left the agent (wall
// position after GW/PD, pile after GP/PU); nullptr means the start position.
Assessment assess_after(const MissionSpec& spec, const AgentSpec& agent, const NodeId& action,
                        const NodeId* previous);

// Sum of the assessments of a work unit's actions (TB task or joint subtask).
Assessment assess_unit(const MissionSpec& spec, const AgentSpec& agent, const NodeId& unit);

}  // namespace wallcoord
