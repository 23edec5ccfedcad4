#pragma once

// Event-driven construction and validation of per-agent timed schedules.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "wallcoord/mission.hpp"
#include "wallcoord/taems.hpp"

namespace wallcoord {

struct ScheduledAction {
  AgentId agent;
  NodeId action;
  double start = 0.0;
  double end = 0.0;
  double cost = 0.0;
  double quality = 0.0;
  bool operator==(const ScheduledAction&) const = default;
};

struct Schedule {
  std::vector<ScheduledAction> entries;  // ordered by (start, agent, action)
  double makespan = 0.0;
  double total_cost = 0.0;
  double total_quality = 0.0;
  // Enables edges whose source completion is exactly what released the target.
  std::vector<std::pair<NodeId, NodeId>> binding_enables;
  bool operator==(const Schedule&) const = default;

  // Work units (TB tasks or joint subtasks) executed by each agent.
  std::map<AgentId, int> unit_counts() const;
  std::vector<NodeId> action_order(const AgentId& agent) const;
};

// Source of per-action assessments. `previous` is the action the agent
// completed last (nullptr at the start of its timeline).
class Assessor {
 public:
  virtual ~Assessor() = default;
  virtual Assessment assess(const AgentId& agent, const NodeId& action, const NodeId* previous) const = 0;
};

// Assessments from a mission, with positional chaining of GP distances.
class MissionAssessor final : public Assessor {
 public:
  explicit MissionAssessor(const MissionSpec& spec) : spec_(spec) {}
  Assessment assess(const AgentId& agent, const NodeId& action, const NodeId* previous) const override;

 private:
  const MissionSpec& spec_;
};

// Fixed assessments keyed by (agent, action); missing pairs are infeasible.
class TableAssessor final : public Assessor {
 public:
  void set(const AgentId& agent, const NodeId& action, Assessment a) { table_[{agent, action}] = a; }
  Assessment assess(const AgentId& agent, const NodeId& action, const NodeId* previous) const override;

 private:
  std::map<std::pair<AgentId, NodeId>, Assessment> table_;
};

// Parents of action nodes, i.e. the units an agent is assigned to.
std::vector<NodeId> work_units(const TaemsTree& tree);

// Per-agent sequence of work units; a unit may only begin once every unit
// before it in its agent's sequence has begun.
using UnitOrder = std::map<AgentId, std::vector<NodeId>>;

// Precomputed scheduling context: tree index, unit structure and the full
// (agent, action, previous action) assessment cache. Immutable after
// construction, so one instance can be shared across threads.
class Scheduler {
 public:
  Scheduler(const TaemsTree& tree, std::vector<AgentId> agents, const Assessor& assessor);

  const std::vector<AgentId>& agents() const { return agents_; }
  const std::vector<NodeId>& units() const { return unit_ids_; }
  int unit_index(const NodeId& unit) const;
  int agent_index(const AgentId& agent) const;
  // Sibling units that must run in lockstep with `unit` (empty for simple units).
  const std::vector<int>& partners(int unit) const { return partners_[unit]; }
  bool feasible(int agent, int unit) const;

  // agent_of_unit[u] is an agent index or -1 for units left unscheduled.
  // order, when given, lists unit indices per agent index.
  // Throws Error(Deadlock) naming the blocked actions.
  Schedule run(const std::vector<int>& agent_of_unit, const std::vector<std::vector<int>>* order = nullptr) const;

  // Same as run but returns nullopt instead of throwing on deadlock.
  std::optional<Schedule> try_run(const std::vector<int>& agent_of_unit,
                                  const std::vector<std::vector<int>>* order = nullptr) const;

 private:
  struct Outcome;
  Outcome simulate(const std::vector<int>& agent_of_unit, const std::vector<std::vector<int>>* order) const;
  const Assessment& cached(int agent, int action, int previous) const;

  TaemsTree tree_;
  TreeIndex index_;
  std::vector<AgentId> agents_;
  std::vector<NodeId> unit_ids_;
  std::vector<int> unit_node_;                 // unit -> node index
  std::vector<int> unit_of_action_;            // node index -> unit (or -1)
  std::vector<std::vector<int>> unit_actions_;  // unit -> action node indices in order
  std::vector<std::vector<int>> partners_;
  std::vector<int> owner_of_resource_;  // resource -> agent index or -1
  std::vector<Assessment> cache_;       // [agent][action][previous + 1]
  int n_nodes_ = 0;
};

// Builds the schedule for `assignments` (work unit -> agent). Units missing
// from the map are not scheduled. Throws Error(Deadlock).
Schedule build_schedule(const TaemsTree& tree, const std::map<NodeId, AgentId>& assignments, const Assessor& assessor,
                        const UnitOrder* order = nullptr);

enum class ScheduleRule {
  UnknownAction,
  DuplicateAction,
  MissingAction,
  NegativeDuration,
  DurationMismatch,
  InfeasibleAssignment,
  AgentOverlap,
  EnablesViolation,
  DisablesViolation,
  SeqOrderViolation,
  SplitUnit,
  ResourceViolation,
  JointSyncViolation,
  SummaryMismatch,
};

std::string_view to_string(ScheduleRule r);

struct ScheduleViolation {
  ScheduleRule rule;
  std::string subject;
  std::string detail;
};

std::vector<ScheduleViolation> check_schedule(const Schedule& schedule, const TaemsTree& tree,
                                              const Assessor& assessor);

// -- objective -------------------------------------------------------------------

struct ObjectiveReference {
  double best_quality = 0.0;   // sum over bricks of the best agent's quality
  double serial_makespan = 0.0;  // each brick by its fastest agent, one after another
  double serial_cost = 0.0;
};

ObjectiveReference objective_reference(const MissionSpec& spec);

// alpha * Q/Q_best + beta * (1 - makespan/T_ref) + gamma * (1 - cost/C_ref)
double objective(const Schedule& schedule, const MissionSpec& spec, const Criteria& criteria);
double objective(const Schedule& schedule, const MissionSpec& spec, const Criteria& criteria,
                 const ObjectiveReference& ref);

// -- serialization -----------------------------------------------------------------

nlohmann::json schedule_to_json(const Schedule& s);
Schedule schedule_from_json(const nlohmann::json& j);  // throws Error(ParseError)

}  // namespace wallcoord
