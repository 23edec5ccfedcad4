#pragma once

// Redundancy resolution: normalized multi-criteria ratings, the market-based
// allocation scheme, the fused total rating, and the one-to-one assignment
// solver used for jointly executed tasks.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wallcoord/mission.hpp"
#include "wallcoord/taems.hpp"

namespace wallcoord {

struct Weights {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

inline Weights weights_of(const Criteria& c) { return {c.alpha, c.beta, c.gamma}; }

// Assessments keyed by (agent, task). Missing entries read as infeasible.
class AssessmentTable {
 public:
  void set(const AgentId& agent, const NodeId& task, Assessment a) { table_[{agent, task}] = a; }
  Assessment get(const AgentId& agent, const NodeId& task) const;
  bool contains(const AgentId& agent, const NodeId& task) const { return table_.contains({agent, task}); }
  const auto& entries() const { return table_; }
  bool operator==(const AssessmentTable&) const = default;

 private:
  std::map<std::pair<AgentId, NodeId>, Assessment> table_;
};

struct AgentAssessment {
  AgentId agent;
  Assessment assessment;
};

// Agents whose assessment is infeasible are dropped before normalization and
// do not appear in the result. A criterion with max == min rates 1.0 for all.
// Throws Error(BadWeights) or Error(EmptyAgentSet).
std::map<AgentId, double> rate(const std::vector<AgentAssessment>& inputs, Weights weights);

// -- market-based allocation ---------------------------------------------------

struct AllocationScheme {
  std::vector<std::pair<NodeId, AgentId>> pairs;

  bool contains(const NodeId& task, const AgentId& agent) const;
  std::optional<AgentId> agent_for(const NodeId& task) const;
  bool operator==(const AllocationScheme&) const = default;
};

// `before` must reach step `source_step` (0-based action index inside the
// task) before `after` may start.
struct Precedence {
  NodeId before;
  int source_step = 0;
  NodeId after;
};

// Per (agent, task): assessments of the task's actions in execution order.
using StepAssessments = std::map<std::pair<AgentId, NodeId>, std::vector<Assessment>>;

// Greedy sequential auction minimizing tentative completion times. Throws
// Error(InfeasibleTask) when a task has no feasible agent and Error(Deadlock)
// when the precedences are cyclic.
AllocationScheme market_allocation(const std::vector<NodeId>& tasks, const std::vector<AgentId>& agents,
                                   const StepAssessments& assessments,
                                   const std::vector<Precedence>& enables_order);

// delta * r1 + (1 - delta) * r2 with r1 the min-max normalized rating and r2
// membership of (task, agent) in the scheme. Throws Error(BadDelta).
std::map<AgentId, double> total_rating(const std::map<AgentId, double>& ratings, const AllocationScheme& scheme,
                                       const NodeId& task, double delta);
// Same formula without the delta range check.
std::map<AgentId, double> total_rating_formula(const std::map<AgentId, double>& ratings,
                                               const AllocationScheme& scheme, const NodeId& task, double delta);

// Argmax of the total rating over the feasible agents of `candidates`;
// ties go to the lowest agent id.
AgentId resolve_simple(const NodeId& task, const std::vector<AgentId>& candidates, const AssessmentTable& assessments,
                       const AllocationScheme& scheme, Weights weights, double delta);

// -- complex redundancy ----------------------------------------------------------

struct AssignmentMatrix {
  std::vector<std::vector<double>> ratings;  // [agent][subtask]
  std::vector<AgentId> agents;
  std::vector<NodeId> subtasks;
};

// Maximizes the summed rating with one agent per subtask and at most one
// subtask per agent, by branch and bound. Throws Error(InfeasibleDimensions)
// when there are fewer agents than subtasks.
std::map<NodeId, AgentId> solve_gap(const AssignmentMatrix& matrix);

// Objective of an assignment, summed in subtask order.
double gap_objective(const AssignmentMatrix& matrix, const std::map<NodeId, AgentId>& assignment);

// Rates every subtask of a complexly redundant task over `eligible_agents`
// and solves the resulting assignment problem. Throws
// Error(NotComplexlyRedundant) or Error(TooFewAgents).
std::map<NodeId, AgentId> resolve_complex(const TaemsTree& tree, const NodeId& task,
                                          const std::vector<AgentId>& eligible_agents,
                                          const AssessmentTable& assessments, Weights weights);

}  // namespace wallcoord
