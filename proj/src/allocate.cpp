#include "wallcoord/allocate.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "wallcoord/error.hpp"

namespace wallcoord {

Assessment AssessmentTable::get(const AgentId& agent, const NodeId& task) const {
  auto it = table_.find({agent, task});
  return it == table_.end() ? Assessment::infeasible() : it->second;
}

namespace {

// (value - worst) / (best - worst), 1.0 when the span collapses.
double normalized(double value, double worst, double best) {
  if (best == worst) return 1.0;
  return (value - worst) / (best - worst);
}

}  // namespace

std::map<AgentId, double> rate(const std::vector<AgentAssessment>& inputs, Weights w) {
  if (!weights_valid(w.alpha, w.beta, w.gamma))
    throw Error(ErrorCode::BadWeights, "weights must be non-negative and sum to 1");
  std::vector<const AgentAssessment*> feasible;
  for (const auto& in : inputs)
    if (in.assessment.feasible()) feasible.push_back(&in);
  if (feasible.empty()) throw Error(ErrorCode::EmptyAgentSet, "no agent with a feasible assessment");

  constexpr double inf = std::numeric_limits<double>::infinity();
  double q_min = inf, q_max = -inf, d_min = inf, d_max = -inf, c_min = inf, c_max = -inf;
  for (const auto* in : feasible) {
    const Assessment& a = in->assessment;
    q_min = std::min(q_min, a.quality);
    q_max = std::max(q_max, a.quality);
    d_min = std::min(d_min, a.duration);
    d_max = std::max(d_max, a.duration);
    c_min = std::min(c_min, a.cost);
    c_max = std::max(c_max, a.cost);
  }
  std::map<AgentId, double> out;
  for (const auto* in : feasible) {
    const Assessment& a = in->assessment;
    double r_q = normalized(a.quality, q_min, q_max);
    double r_d = normalized(a.duration, d_max, d_min);
    double r_c = normalized(a.cost, c_max, c_min);
    out[in->agent] = w.alpha * r_q + w.beta * r_d + w.gamma * r_c;
  }
  return out;
}

// -- market --------------------------------------------------------------------

bool AllocationScheme::contains(const NodeId& task, const AgentId& agent) const {
  return std::find(pairs.begin(), pairs.end(), std::make_pair(task, agent)) != pairs.end();
}

std::optional<AgentId> AllocationScheme::agent_for(const NodeId& task) const {
  for (const auto& [t, a] : pairs)
    if (t == task) return a;
  return std::nullopt;
}

AllocationScheme market_allocation(const std::vector<NodeId>& tasks, const std::vector<AgentId>& agents,
                                   const StepAssessments& assessments,
                                   const std::vector<Precedence>& enables_order) {
  std::vector<NodeId> sorted_tasks = tasks;
  std::sort(sorted_tasks.begin(), sorted_tasks.end());
  sorted_tasks.erase(std::unique(sorted_tasks.begin(), sorted_tasks.end()), sorted_tasks.end());
  std::vector<AgentId> sorted_agents = agents;
  std::sort(sorted_agents.begin(), sorted_agents.end());
  const std::set<NodeId> task_set(sorted_tasks.begin(), sorted_tasks.end());

  std::map<NodeId, std::vector<const Precedence*>> preds;
  for (const auto& p : enables_order)
    if (task_set.contains(p.before) && task_set.contains(p.after)) preds[p.after].push_back(&p);

  auto steps_of = [&](const AgentId& a, const NodeId& t) -> const std::vector<Assessment>* {
    auto it = assessments.find({a, t});
    if (it == assessments.end() || it->second.empty()) return nullptr;
    for (const auto& s : it->second)
      if (!s.feasible()) return nullptr;
    return &it->second;
  };

  std::map<AgentId, double> avail;
  for (const auto& a : sorted_agents) avail[a] = 0.0;
  struct Placed {
    AgentId agent;
    double start;
  };
  std::map<NodeId, Placed> placed;
  AllocationScheme scheme;

  while (placed.size() < sorted_tasks.size()) {
    bool found = false;
    double best_end = 0.0;
    NodeId best_task;
    AgentId best_agent;
    double best_start = 0.0;
    for (const auto& t : sorted_tasks) {
      if (placed.contains(t)) continue;
      bool ready = true;
      for (const auto* p : preds[t])
        if (!placed.contains(p->before)) ready = false;
      if (!ready) continue;

      double release = 0.0;
      for (const auto* p : preds[t]) {
        const Placed& src = placed.at(p->before);
        const auto* steps = steps_of(src.agent, p->before);
        double at = src.start;
        for (int k = 0; k <= p->source_step && k < static_cast<int>(steps->size()); ++k) at += (*steps)[k].duration;
        release = std::max(release, at);
      }
      bool any_agent = false;
      for (const auto& a : sorted_agents) {
        const auto* steps = steps_of(a, t);
        if (steps == nullptr) continue;
        any_agent = true;
        double start = std::max(avail[a], release);
        double end = start;
        for (const auto& s : *steps) end += s.duration;
        // Strict comparison keeps the lowest (task, agent) on ties.
        if (!found || end < best_end) {
          found = true;
          best_end = end;
          best_task = t;
          best_agent = a;
          best_start = start;
        }
      }
      if (!any_agent) throw Error(ErrorCode::InfeasibleTask, "no feasible agent for '" + t + "'");
    }
    if (!found) throw Error(ErrorCode::Deadlock, "precedences among market tasks are cyclic");
    placed[best_task] = {best_agent, best_start};
    avail[best_agent] = best_end;
    scheme.pairs.emplace_back(best_task, best_agent);
  }
  return scheme;
}

std::map<AgentId, double> total_rating_formula(const std::map<AgentId, double>& ratings,
                                               const AllocationScheme& scheme, const NodeId& task, double delta) {
  double r_min = std::numeric_limits<double>::infinity();
  double r_max = -r_min;
  for (const auto& [a, r] : ratings) {
    r_min = std::min(r_min, r);
    r_max = std::max(r_max, r);
  }
  std::map<AgentId, double> out;
  for (const auto& [a, r] : ratings) {
    double r1 = normalized(r, r_min, r_max);
    double r2 = scheme.contains(task, a) ? 1.0 : 0.0;
    out[a] = delta * r1 + (1.0 - delta) * r2;
  }
  return out;
}

std::map<AgentId, double> total_rating(const std::map<AgentId, double>& ratings, const AllocationScheme& scheme,
                                       const NodeId& task, double delta) {
  if (!delta_valid(delta)) throw Error(ErrorCode::BadDelta, "delta must lie in [0.5, 1)");
  return total_rating_formula(ratings, scheme, task, delta);
}

AgentId resolve_simple(const NodeId& task, const std::vector<AgentId>& candidates, const AssessmentTable& assessments,
                       const AllocationScheme& scheme, Weights weights, double delta) {
  std::vector<AgentAssessment> inputs;
  for (const auto& a : candidates) inputs.push_back({a, assessments.get(a, task)});
  auto totals = total_rating(rate(inputs, weights), scheme, task, delta);
  // std::map iterates in ascending id order, so strict > keeps the lowest id on ties.
  const AgentId* best = nullptr;
  double best_value = 0.0;
  for (const auto& [a, v] : totals) {
    if (best == nullptr || v > best_value) {
      best = &a;
      best_value = v;
    }
  }
  return *best;
}

std::map<NodeId, AgentId> resolve_complex(const TaemsTree& tree, const NodeId& task,
                                          const std::vector<AgentId>& eligible_agents,
                                          const AssessmentTable& assessments, Weights weights) {
  const TaemsNode* node = tree.find(task);
  if (node == nullptr || node->kind != NodeKind::Task || node->local_qaf != Qaf::Max)
    throw Error(ErrorCode::NotComplexlyRedundant, task);

  std::vector<AgentId> agents = eligible_agents;
  std::sort(agents.begin(), agents.end());
  agents.erase(std::unique(agents.begin(), agents.end()), agents.end());
  if (agents.size() < node->children.size())
    throw Error(ErrorCode::TooFewAgents, task + " needs " + std::to_string(node->children.size()) + " agents");

  AssignmentMatrix m;
  m.agents = agents;
  m.subtasks = node->children;
  m.ratings.assign(agents.size(), std::vector<double>(node->children.size(), -kBigM));
  for (std::size_t j = 0; j < node->children.size(); ++j) {
    std::vector<AgentAssessment> inputs;
    for (const auto& a : agents) inputs.push_back({a, assessments.get(a, node->children[j])});
    auto r = rate(inputs, weights);
    for (std::size_t i = 0; i < agents.size(); ++i)
      if (auto it = r.find(agents[i]); it != r.end()) m.ratings[i][j] = it->second;
  }
  auto result = solve_gap(m);
  for (const auto& [sub, agent] : result)
    if (!assessments.get(agent, sub).feasible())
      throw Error(ErrorCode::TooFewAgents, task + ": not enough feasible agents");
  return result;
}

}  // namespace wallcoord
