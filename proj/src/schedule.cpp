#include "wallcoord/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "wallcoord/error.hpp"

namespace wallcoord {

// -- assessors ---------------------------------------------------------------

Assessment MissionAssessor::assess(const AgentId& agent, const NodeId& action, const NodeId* previous) const {
  const AgentSpec* a = spec_.find_agent(agent);
  if (a == nullptr) throw Error(ErrorCode::UnknownAgent, agent);
  return assess_after(spec_, *a, action, previous);
}

Assessment TableAssessor::assess(const AgentId& agent, const NodeId& action, const NodeId*) const {
  auto it = table_.find({agent, action});
  return it == table_.end() ? Assessment::infeasible() : it->second;
}

// -- schedule helpers --------------------------------------------------------

namespace {

std::string unit_key(const NodeId& action) {
  auto ref = parse_action_id(action);
  if (!ref) return action;
  return ref->slot > 0 ? subtask_id(ref->brick, ref->slot) : brick_task_id(ref->brick);
}

// Joint actions run for the longest member duration; cost scales with time.
double stretched_cost(const Assessment& own, double duration) {
  if (own.duration > 0.0) return own.cost * (duration / own.duration);
  return own.cost;
}

}  // namespace

std::map<AgentId, int> Schedule::unit_counts() const {
  std::map<AgentId, std::set<std::string>> units;
  for (const auto& e : entries) units[e.agent].insert(unit_key(e.action));
  std::map<AgentId, int> out;
  for (const auto& [a, s] : units) out[a] = static_cast<int>(s.size());
  return out;
}

std::vector<NodeId> Schedule::action_order(const AgentId& agent) const {
  std::vector<NodeId> out;
  for (const auto& e : entries)
    if (e.agent == agent) out.push_back(e.action);
  return out;
}

std::vector<NodeId> work_units(const TaemsTree& tree) {
  std::set<NodeId> units;
  for (const auto& [id, node] : tree.nodes) {
    if (node.kind != NodeKind::Task) continue;
    for (const auto& c : node.children)
      if (tree.is_action(c)) {
        units.insert(id);
        break;
      }
  }
  return {units.begin(), units.end()};
}

// -- Scheduler ---------------------------------------------------------------

Scheduler::Scheduler(const TaemsTree& tree, std::vector<AgentId> agents, const Assessor& assessor)
    : tree_(tree), index_(tree_), agents_(std::move(agents)) {
  std::sort(agents_.begin(), agents_.end());
  agents_.erase(std::unique(agents_.begin(), agents_.end()), agents_.end());
  n_nodes_ = index_.node_count();

  unit_ids_ = work_units(tree_);
  unit_of_action_.assign(n_nodes_, -1);
  for (const auto& u : unit_ids_) {
    int node = index_.index_of(u);
    unit_node_.push_back(node);
    std::vector<int> acts;
    for (const auto& c : tree_.nodes.at(u).children) {
      int ci = index_.index_of(c);
      if (ci >= 0 && index_.is_action(ci)) {
        acts.push_back(ci);
        unit_of_action_[ci] = static_cast<int>(unit_actions_.size());
      }
    }
    unit_actions_.push_back(std::move(acts));
  }

  partners_.assign(unit_ids_.size(), {});
  for (std::size_t u = 0; u < unit_ids_.size(); ++u) {
    int p = index_.parent(unit_node_[u]);
    if (p < 0) continue;
    const TaemsNode& parent = tree_.nodes.at(index_.id(p));
    if (parent.local_qaf != Qaf::Max) continue;
    for (const auto& sib : parent.children) {
      int su = unit_index(sib);
      if (su >= 0 && su != static_cast<int>(u)) partners_[u].push_back(su);
    }
  }

  owner_of_resource_.assign(index_.resource_count(), -1);
  for (int r = 0; r < index_.resource_count(); ++r)
    owner_of_resource_[r] = agent_index(tree_.resources.at(index_.resource_id(r)).owner_agent);

  const int n_agents = static_cast<int>(agents_.size());
  const std::size_t stride = static_cast<std::size_t>(n_nodes_) + 1;
  cache_.assign(static_cast<std::size_t>(n_agents) * n_nodes_ * stride, Assessment::infeasible());
  for (int a = 0; a < n_agents; ++a)
    for (int act : index_.actions()) {
      if (unit_of_action_[act] < 0) continue;
      const std::size_t base = (static_cast<std::size_t>(a) * n_nodes_ + act) * stride;
      cache_[base] = assessor.assess(agents_[a], index_.id(act), nullptr);
      for (int prev : index_.actions())
        cache_[base + prev + 1] = assessor.assess(agents_[a], index_.id(act), &index_.id(prev));
    }
}

const Assessment& Scheduler::cached(int agent, int action, int previous) const {
  const std::size_t stride = static_cast<std::size_t>(n_nodes_) + 1;
  return cache_[(static_cast<std::size_t>(agent) * n_nodes_ + action) * stride + (previous + 1)];
}

int Scheduler::unit_index(const NodeId& unit) const {
  auto it = std::lower_bound(unit_ids_.begin(), unit_ids_.end(), unit);
  return (it != unit_ids_.end() && *it == unit) ? static_cast<int>(it - unit_ids_.begin()) : -1;
}

int Scheduler::agent_index(const AgentId& agent) const {
  auto it = std::lower_bound(agents_.begin(), agents_.end(), agent);
  return (it != agents_.end() && *it == agent) ? static_cast<int>(it - agents_.begin()) : -1;
}

bool Scheduler::feasible(int agent, int unit) const {
  for (int act : unit_actions_[unit])
    if (!cached(agent, act, -1).feasible()) return false;
  return true;
}

struct Scheduler::Outcome {
  std::optional<Schedule> schedule;
  std::string deadlock;
};

Scheduler::Outcome Scheduler::simulate(const std::vector<int>& agent_of_unit,
                                       const std::vector<std::vector<int>>* order) const {
  const int n_agents = static_cast<int>(agents_.size());
  const int n_units = static_cast<int>(unit_ids_.size());

  std::vector<std::vector<int>> units_of(n_agents);
  for (int u = 0; u < n_units; ++u)
    if (agent_of_unit[u] >= 0) units_of[agent_of_unit[u]].push_back(u);

  // Forced sequences: unit u may begin only when it is next in its agent's sequence.
  std::vector<std::vector<int>> seq(n_agents);
  std::vector<std::size_t> next_in_seq(n_agents, 0);
  if (order != nullptr) {
    for (int a = 0; a < n_agents; ++a) {
      std::set<int> listed;
      if (a < static_cast<int>(order->size()))
        for (int u : (*order)[a])
          if (agent_of_unit[u] == a && listed.insert(u).second) seq[a].push_back(u);
      for (int u : units_of[a])
        if (!listed.contains(u)) seq[a].push_back(u);
    }
  }

  std::vector<char> status(n_nodes_, 0);  // 0 pending, 1 running, 2 done
  std::vector<char> unit_started(n_units, 0);
  int remaining = 0;
  for (int u = 0; u < n_units; ++u)
    if (agent_of_unit[u] >= 0) remaining += static_cast<int>(unit_actions_[u].size());

  std::vector<double> res_state(index_.resource_count());
  for (int r = 0; r < index_.resource_count(); ++r)
    res_state[r] = tree_.resources.at(index_.resource_id(r)).state;
  auto res_at = [&](int r) {
    Resource copy = tree_.resources.at(index_.resource_id(r));
    copy.state = res_state[r];
    return copy;
  };

  std::vector<int> running(n_agents, -1);
  std::vector<double> busy_until(n_agents, 0.0);
  std::vector<int> last(n_agents, -1);
  std::vector<ScheduledAction> entries;
  entries.reserve(remaining);

  auto touches = [&](int r, int agent) { return owner_of_resource_[r] < 0 || owner_of_resource_[r] == agent; };

  auto executable_for = [&](int agent, int act) {
    if (status[act] != 0) return false;
    int u = unit_of_action_[act];
    if (u < 0 || agent_of_unit[u] != agent) return false;
    for (int req : index_.required_done(act))
      if (status[req] != 2) return false;
    for (const auto& use : index_.limits(act))
      if (touches(use.resource, agent) && !resource_sufficient(res_at(use.resource), use.amount)) return false;
    for (const auto& use : index_.consumes(act))
      if (touches(use.resource, agent) && !resource_sufficient(res_at(use.resource), use.amount)) return false;
    if (order != nullptr && !unit_started[u]) {
      if (next_in_seq[agent] >= seq[agent].size() || seq[agent][next_in_seq[agent]] != u) return false;
    }
    return true;
  };

  auto pick = [&](int agent) {
    int best = -1;
    std::tuple<int, int, int, int> best_key{};
    for (int u : units_of[agent])
      for (int act : unit_actions_[u]) {
        if (!executable_for(agent, act)) continue;
        std::tuple<int, int, int, int> key{index_.position(act), index_.enables_rank(unit_node_[u]), u, act};
        if (best < 0 || key < best_key) {
          best = act;
          best_key = key;
        }
      }
    return best;
  };

  auto start = [&](int agent, int act, double t, double duration, const Assessment& own) {
    int u = unit_of_action_[act];
    if (!unit_started[u]) {
      unit_started[u] = 1;
      if (order != nullptr) ++next_in_seq[agent];
    }
    for (const auto& use : index_.consumes(act))
      if (touches(use.resource, agent)) res_state[use.resource] = apply_resource_effect(res_at(use.resource), -use.amount)->state;
    status[act] = 1;
    running[agent] = act;
    busy_until[agent] = t + duration;
    entries.push_back({agents_[agent], index_.id(act), t, t + duration, stretched_cost(own, duration), own.quality});
  };

  double t = 0.0;
  for (;;) {
    bool progress = true;
    while (progress) {
      progress = false;
      for (int a = 0; a < n_agents; ++a) {
        if (running[a] >= 0) continue;
        int act = pick(a);
        if (act < 0) continue;
        int u = unit_of_action_[act];
        const Assessment& own = cached(a, act, last[a]);
        if (partners_[u].empty()) {
          start(a, act, t, own.duration, own);
          progress = true;
          continue;
        }
        // Lockstep: every partner unit's twin action must be startable now.
        std::size_t pos = std::find(unit_actions_[u].begin(), unit_actions_[u].end(), act) - unit_actions_[u].begin();
        std::vector<std::pair<int, int>> twins;
        bool ready = true;
        double duration = own.duration;
        for (int pu : partners_[u]) {
          int b = agent_of_unit[pu];
          if (b < 0 || b == a || running[b] >= 0 || pos >= unit_actions_[pu].size()) {
            ready = false;
            break;
          }
          int twin = unit_actions_[pu][pos];
          if (!executable_for(b, twin)) {
            ready = false;
            break;
          }
          twins.emplace_back(b, twin);
          duration = std::max(duration, cached(b, twin, last[b]).duration);
        }
        if (!ready) continue;
        start(a, act, t, duration, own);
        for (auto [b, twin] : twins) start(b, twin, t, duration, cached(b, twin, last[b]));
        progress = true;
      }
    }

    double next = std::numeric_limits<double>::infinity();
    for (int a = 0; a < n_agents; ++a)
      if (running[a] >= 0) next = std::min(next, busy_until[a]);
    if (std::isinf(next)) break;
    t = next;
    for (int a = 0; a < n_agents; ++a) {
      if (running[a] < 0 || busy_until[a] != t) continue;
      int act = running[a];
      status[act] = 2;
      for (const auto& use : index_.produces(act))
        if (touches(use.resource, a)) res_state[use.resource] = apply_resource_effect(res_at(use.resource), use.amount)->state;
      last[a] = act;
      running[a] = -1;
      --remaining;
    }
  }

  if (remaining > 0) {
    // Report a cycle in the wait-for relation when there is one, else the blocked set.
    std::vector<int> blocked;
    for (int u = 0; u < n_units; ++u)
      if (agent_of_unit[u] >= 0)
        for (int act : unit_actions_[u])
          if (status[act] != 2) blocked.push_back(act);
    std::vector<int> color(n_nodes_, 0), stack;
    std::vector<int> cycle;
    auto dfs = [&](auto&& self, int v) -> bool {
      color[v] = 1;
      stack.push_back(v);
      for (int w : index_.required_done(v)) {
        if (status[w] == 2) continue;
        if (color[w] == 1) {
          auto it = std::find(stack.begin(), stack.end(), w);
          cycle.assign(it, stack.end());
          return true;
        }
        if (color[w] == 0 && self(self, w)) return true;
      }
      stack.pop_back();
      color[v] = 2;
      return false;
    };
    for (int v : blocked)
      if (color[v] == 0 && dfs(dfs, v)) break;
    std::ostringstream msg;
    const auto& listed = cycle.empty() ? blocked : cycle;
    msg << (cycle.empty() ? "blocked actions:" : "blocked cycle:");
    for (int v : listed) msg << ' ' << index_.id(v);
    return {std::nullopt, msg.str()};
  }

  std::sort(entries.begin(), entries.end(), [](const ScheduledAction& x, const ScheduledAction& y) {
    return std::tie(x.start, x.agent, x.action) < std::tie(y.start, y.agent, y.action);
  });
  Schedule s;
  std::map<NodeId, const ScheduledAction*> by_action;
  for (const auto& e : entries) {
    s.makespan = std::max(s.makespan, e.end);
    s.total_cost += e.cost;
    s.total_quality += e.quality;
    by_action[e.action] = &e;
  }
  for (auto [src, dst] : index_.enables_edges())
    for (int sa : index_.descendant_actions(src))
      for (int da : index_.descendant_actions(dst)) {
        auto si = by_action.find(index_.id(sa));
        auto di = by_action.find(index_.id(da));
        if (si == by_action.end() || di == by_action.end()) continue;
        if (di->second->start > 0.0 && di->second->start == si->second->end)
          s.binding_enables.emplace_back(index_.id(sa), index_.id(da));
      }
  std::sort(s.binding_enables.begin(), s.binding_enables.end());
  s.binding_enables.erase(std::unique(s.binding_enables.begin(), s.binding_enables.end()), s.binding_enables.end());
  s.entries = std::move(entries);
  return {std::move(s), {}};
}

Schedule Scheduler::run(const std::vector<int>& agent_of_unit, const std::vector<std::vector<int>>* order) const {
  Outcome out = simulate(agent_of_unit, order);
  if (!out.schedule) throw Error(ErrorCode::Deadlock, out.deadlock);
  return std::move(*out.schedule);
}

std::optional<Schedule> Scheduler::try_run(const std::vector<int>& agent_of_unit,
                                           const std::vector<std::vector<int>>* order) const {
  return simulate(agent_of_unit, order).schedule;
}

Schedule build_schedule(const TaemsTree& tree, const std::map<NodeId, AgentId>& assignments, const Assessor& assessor,
                        const UnitOrder* order) {
  std::vector<AgentId> agents;
  for (const auto& [u, a] : assignments) agents.push_back(a);
  // Idle resource owners still count, so their resources stay private.
  for (const auto& [id, res] : tree.resources)
    if (!res.owner_agent.empty()) agents.push_back(res.owner_agent);
  Scheduler scheduler(tree, agents, assessor);
  std::vector<int> agent_of_unit(scheduler.units().size(), -1);
  for (const auto& [u, a] : assignments) {
    int ui = scheduler.unit_index(u);
    if (ui < 0) throw Error(ErrorCode::UnknownAction, "'" + u + "' is not a work unit");
    agent_of_unit[ui] = scheduler.agent_index(a);
  }
  if (order == nullptr) return scheduler.run(agent_of_unit);
  std::vector<std::vector<int>> idx(scheduler.agents().size());
  for (const auto& [a, units] : *order) {
    int ai = scheduler.agent_index(a);
    if (ai < 0) continue;
    for (const auto& u : units)
      if (int ui = scheduler.unit_index(u); ui >= 0) idx[ai].push_back(ui);
  }
  return scheduler.run(agent_of_unit, &idx);
}

// -- validation --------------------------------------------------------------

std::string_view to_string(ScheduleRule r) {
  switch (r) {
    case ScheduleRule::UnknownAction: return "UnknownAction";
    case ScheduleRule::DuplicateAction: return "DuplicateAction";
    case ScheduleRule::MissingAction: return "MissingAction";
    case ScheduleRule::NegativeDuration: return "NegativeDuration";
    case ScheduleRule::DurationMismatch: return "DurationMismatch";
    case ScheduleRule::InfeasibleAssignment: return "InfeasibleAssignment";
    case ScheduleRule::AgentOverlap: return "AgentOverlap";
    case ScheduleRule::EnablesViolation: return "EnablesViolation";
    case ScheduleRule::DisablesViolation: return "DisablesViolation";
    case ScheduleRule::SeqOrderViolation: return "SeqOrderViolation";
    case ScheduleRule::SplitUnit: return "SplitUnit";
    case ScheduleRule::ResourceViolation: return "ResourceViolation";
    case ScheduleRule::JointSyncViolation: return "JointSyncViolation";
    case ScheduleRule::SummaryMismatch: return "SummaryMismatch";
  }
  return "?";
}

namespace {

constexpr double kTimeEps = 1e-9;

bool close(double a, double b) { return std::abs(a - b) <= kTimeEps * std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace

std::vector<ScheduleViolation> check_schedule(const Schedule& schedule, const TaemsTree& tree,
                                              const Assessor& assessor) {
  std::vector<ScheduleViolation> out;
  auto add = [&](ScheduleRule r, std::string subject, std::string detail) {
    out.push_back({r, std::move(subject), std::move(detail)});
  };
  TreeIndex index(tree);

  std::map<NodeId, const ScheduledAction*> by_action;
  for (const auto& e : schedule.entries) {
    int n = index.index_of(e.action);
    if (n < 0 || !index.is_action(n)) {
      add(ScheduleRule::UnknownAction, e.action, "not an action of the tree");
      continue;
    }
    if (!by_action.emplace(e.action, &e).second) add(ScheduleRule::DuplicateAction, e.action, "scheduled twice");
    if (e.end < e.start) add(ScheduleRule::NegativeDuration, e.action, "ends before it starts");
  }
  for (int a : index.actions())
    if (!by_action.contains(index.id(a))) add(ScheduleRule::MissingAction, index.id(a), "never scheduled");

  auto entry = [&](int node) -> const ScheduledAction* {
    auto it = by_action.find(index.id(node));
    return it == by_action.end() ? nullptr : it->second;
  };

  // Per-agent timelines.
  std::map<AgentId, std::vector<const ScheduledAction*>> timeline;
  for (const auto& [id, e] : by_action) timeline[e->agent].push_back(e);
  std::map<const ScheduledAction*, const ScheduledAction*> previous_of;
  for (auto& [agent, list] : timeline) {
    std::sort(list.begin(), list.end(), [](auto* x, auto* y) { return std::tie(x->start, x->end, x->action) < std::tie(y->start, y->end, y->action); });
    for (std::size_t k = 0; k < list.size(); ++k) {
      previous_of[list[k]] = k > 0 ? list[k - 1] : nullptr;
      if (k > 0 && list[k]->start < list[k - 1]->end && !close(list[k]->start, list[k - 1]->end))
        add(ScheduleRule::AgentOverlap, list[k]->action, "overlaps " + list[k - 1]->action + " on " + agent);
    }
  }

  auto own_assessment = [&](const ScheduledAction* e) {
    const ScheduledAction* p = previous_of[e];
    return assessor.assess(e->agent, e->action, p != nullptr ? &p->action : nullptr);
  };

  // Joint partners: sibling units under a local-max parent, paired by position.
  std::map<const ScheduledAction*, std::vector<const ScheduledAction*>> twins;
  for (const auto& [id, node] : tree.nodes) {
    if (node.local_qaf != Qaf::Max) continue;
    std::vector<std::vector<int>> units;
    for (const auto& c : node.children) {
      const TaemsNode* u = tree.find(c);
      if (u == nullptr) continue;
      std::vector<int> acts;
      for (const auto& a : u->children)
        if (int ai = index.index_of(a); ai >= 0 && index.is_action(ai)) acts.push_back(ai);
      units.push_back(std::move(acts));
    }
    for (std::size_t i = 0; i < units.size(); ++i)
      for (std::size_t j = i + 1; j < units.size(); ++j)
        for (std::size_t k = 0; k < std::min(units[i].size(), units[j].size()); ++k) {
          const ScheduledAction* x = entry(units[i][k]);
          const ScheduledAction* y = entry(units[j][k]);
          if (x == nullptr || y == nullptr) continue;
          twins[x].push_back(y);
          twins[y].push_back(x);
          if (x->start != y->start) add(ScheduleRule::JointSyncViolation, x->action, "starts apart from " + y->action);
          if (x->agent == y->agent) add(ScheduleRule::JointSyncViolation, x->action, "shares an agent with " + y->action);
        }
  }

  for (const auto& [id, e] : by_action) {
    Assessment own = own_assessment(e);
    if (!own.feasible()) {
      add(ScheduleRule::InfeasibleAssignment, id, e->agent + " cannot perform it");
      continue;
    }
    double expected = own.duration;
    if (auto it = twins.find(e); it != twins.end())
      for (const auto* t : it->second) expected = std::max(expected, own_assessment(t).duration);
    if (!close(e->end - e->start, expected))
      add(ScheduleRule::DurationMismatch, id, "lasts " + std::to_string(e->end - e->start) + " s, expected " + std::to_string(expected));
  }

  for (auto [src, dst] : index.enables_edges())
    for (int sa : index.descendant_actions(src))
      for (int da : index.descendant_actions(dst)) {
        const ScheduledAction* s = entry(sa);
        const ScheduledAction* d = entry(da);
        if (s == nullptr || d == nullptr) continue;
        if (s->end > d->start && !close(s->end, d->start))
          add(ScheduleRule::EnablesViolation, d->action, "starts before " + s->action + " ends");
      }
  for (auto [src, dst] : index.disables_edges())
    for (int sa : index.descendant_actions(src))
      for (int da : index.descendant_actions(dst)) {
        const ScheduledAction* s = entry(sa);
        const ScheduledAction* d = entry(da);
        if (s == nullptr || d == nullptr) continue;
        if (d->end > s->end && !close(d->end, s->end))
          add(ScheduleRule::DisablesViolation, s->action, "completes before " + d->action);
      }

  for (const auto& [id, node] : tree.nodes) {
    if (node.kind != NodeKind::Task || node.qaf != Qaf::SeqSumAll) continue;
    const ScheduledAction* prev = nullptr;
    std::string agent;
    for (const auto& c : node.children) {
      int ci = index.index_of(c);
      if (ci < 0 || !index.is_action(ci)) continue;
      const ScheduledAction* e = entry(ci);
      if (e == nullptr) continue;
      if (agent.empty()) agent = e->agent;
      else if (agent != e->agent) add(ScheduleRule::SplitUnit, id, "actions run on more than one agent");
      if (prev != nullptr && prev->end > e->start && !close(prev->end, e->start))
        add(ScheduleRule::SeqOrderViolation, e->action, "starts before " + prev->action + " ends");
      prev = e;
    }
  }

  // Replay resource levels: consumption at start, production at end.
  for (int r = 0; r < index.resource_count(); ++r) {
    const Resource& res = tree.resources.at(index.resource_id(r));
    struct Event {
      double t;
      int order;  // productions first at equal times
      double delta;
      std::string action;
    };
    std::vector<Event> events;
    for (const auto& [id, e] : by_action) {
      if (!res.owner_agent.empty() && e->agent != res.owner_agent) continue;
      int n = index.index_of(id);
      for (const auto& use : index.consumes(n))
        if (use.resource == r) events.push_back({e->start, 1, -use.amount, id});
      for (const auto& use : index.produces(n))
        if (use.resource == r) events.push_back({e->end, 0, use.amount, id});
    }
    std::sort(events.begin(), events.end(), [](const Event& x, const Event& y) {
      return std::tie(x.t, x.order, x.action) < std::tie(y.t, y.order, y.action);
    });
    Resource level = res;
    for (const auto& ev : events) {
      auto next = apply_resource_effect(level, ev.delta);
      if (!next) {
        add(ScheduleRule::ResourceViolation, ev.action, "drives " + res.id + " below its lower limit");
        continue;
      }
      level = *next;
    }
  }

  double makespan = 0.0;
  for (const auto& e : schedule.entries) makespan = std::max(makespan, e.end);
  if (makespan != schedule.makespan) add(ScheduleRule::SummaryMismatch, "makespan", "does not equal the latest end");
  return out;
}

// -- objective ---------------------------------------------------------------

ObjectiveReference objective_reference(const MissionSpec& spec) {
  ObjectiveReference ref;
  for (const auto& b : spec.bricks) {
    const bool joint = b.color == Color::Orange;
    const int slots = joint ? kJointSlots : 0;
    // Best quality per slot, and per-agent unit assessments for the serial plan.
    double brick_quality = 0.0;
    std::vector<std::pair<Assessment, AgentId>> units;
    for (int k = joint ? 1 : 0; k <= slots; ++k) {
      double best_q = 0.0;
      for (const auto& a : spec.agents) {
        if (a.kind == AgentKind::UAVx2) continue;
        Assessment pd = assess(spec, a, action_id(ActionType::PD, b.id, k));
        if (pd.feasible()) best_q = std::max(best_q, pd.quality);
      }
      brick_quality += best_q;
    }
    ref.best_quality += brick_quality;

    std::vector<std::pair<double, const AgentSpec*>> by_speed;
    for (const auto& a : spec.agents) {
      if (a.kind == AgentKind::UAVx2) continue;
      Assessment u = assess_unit(spec, a, joint ? subtask_id(b.id, 1) : brick_task_id(b.id));
      if (u.feasible()) by_speed.emplace_back(u.duration, &a);
    }
    std::sort(by_speed.begin(), by_speed.end(), [](const auto& x, const auto& y) {
      return std::tie(x.first, x.second->id) < std::tie(y.first, y.second->id);
    });
    if (by_speed.empty()) continue;
    if (!joint) {
      Assessment u = assess_unit(spec, *by_speed[0].second, brick_task_id(b.id));
      ref.serial_makespan += u.duration;
      ref.serial_cost += u.cost;
    } else {
      double duration = 0.0, cost = 0.0;
      for (int k = 1; k <= slots && k - 1 < static_cast<int>(by_speed.size()); ++k) {
        Assessment u = assess_unit(spec, *by_speed[k - 1].second, subtask_id(b.id, k));
        duration = std::max(duration, u.duration);
        cost += u.cost;
      }
      ref.serial_makespan += duration;
      ref.serial_cost += cost;
    }
  }
  return ref;
}

double objective(const Schedule& schedule, const MissionSpec& spec, const Criteria& c, const ObjectiveReference& ref) {
  // Quality summed per brick in mission order so equal plans compare bitwise equal.
  std::map<std::string, std::vector<std::pair<int, double>>> pd_quality;
  for (const auto& e : schedule.entries) {
    auto r = parse_action_id(e.action);
    if (r && r->type == ActionType::PD) pd_quality[r->brick].emplace_back(r->slot, e.quality);
  }
  double q = 0.0;
  for (const auto& b : spec.bricks) {
    auto it = pd_quality.find(b.id);
    if (it == pd_quality.end()) continue;
    std::sort(it->second.begin(), it->second.end());
    double brick_q = 0.0;
    for (const auto& [slot, value] : it->second) brick_q += value;
    q += brick_q;
  }
  double quality_term = ref.best_quality > 0.0 ? q / ref.best_quality : 1.0;
  double time_term = ref.serial_makespan > 0.0 ? 1.0 - schedule.makespan / ref.serial_makespan : 0.0;
  double cost_term = ref.serial_cost > 0.0 ? 1.0 - schedule.total_cost / ref.serial_cost : 0.0;
  return c.alpha * quality_term + c.beta * time_term + c.gamma * cost_term;
}

double objective(const Schedule& schedule, const MissionSpec& spec, const Criteria& c) {
  return objective(schedule, spec, c, objective_reference(spec));
}

// -- serialization -----------------------------------------------------------

nlohmann::json schedule_to_json(const Schedule& s) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : s.entries)
    entries.push_back({{"agent", e.agent},
                       {"action", e.action},
                       {"start", e.start},
                       {"end", e.end},
                       {"cost", e.cost},
                       {"quality", e.quality}});
  nlohmann::json binding = nlohmann::json::array();
  for (const auto& [from, to] : s.binding_enables) binding.push_back({from, to});
  return {{"entries", entries},
          {"makespan", s.makespan},
          {"total_cost", s.total_cost},
          {"total_quality", s.total_quality},
          {"binding_enables", binding}};
}

Schedule schedule_from_json(const nlohmann::json& j) {
  try {
    Schedule s;
    for (const auto& je : j.at("entries")) {
      ScheduledAction e;
      e.agent = je.at("agent").get<std::string>();
      e.action = je.at("action").get<std::string>();
      e.start = je.at("start").get<double>();
      e.end = je.at("end").get<double>();
      e.cost = je.value("cost", 0.0);
      e.quality = je.value("quality", 0.0);
      s.entries.push_back(std::move(e));
    }
    s.makespan = j.at("makespan").get<double>();
    s.total_cost = j.value("total_cost", 0.0);
    s.total_quality = j.value("total_quality", 0.0);
    for (const auto& jb : j.value("binding_enables", nlohmann::json::array()))
      s.binding_enables.emplace_back(jb.at(0).get<std::string>(), jb.at(1).get<std::string>());
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

}  // namespace wallcoord
