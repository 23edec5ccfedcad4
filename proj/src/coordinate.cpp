#include "wallcoord/coordinate.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "wallcoord/error.hpp"

namespace wallcoord {

namespace {

constexpr MessageKind kAllKinds[] = {MessageKind::AssessmentShare, MessageKind::RefereeClaim, MessageKind::AllocationScheme,
                                     MessageKind::Award,           MessageKind::Drop,         MessageKind::SyncRequest,
                                     MessageKind::SyncAck,         MessageKind::StatusUpdate};

}  // namespace

std::string_view to_string(MessageKind k) {
  switch (k) {
    case MessageKind::AssessmentShare: return "AssessmentShare";
    case MessageKind::RefereeClaim: return "RefereeClaim";
    case MessageKind::AllocationScheme: return "AllocationScheme";
    case MessageKind::Award: return "Award";
    case MessageKind::Drop: return "Drop";
    case MessageKind::SyncRequest: return "SyncRequest";
    case MessageKind::SyncAck: return "SyncAck";
    case MessageKind::StatusUpdate: return "StatusUpdate";
  }
  return "?";
}

MessageKind parse_message_kind(const std::string& s) {
  for (MessageKind k : kAllKinds)
    if (to_string(k) == s) return k;
  throw Error(ErrorCode::ParseError, "unknown message kind '" + s + "'");
}

// -- trace I/O -----------------------------------------------------------------

nlohmann::json message_to_json(const Message& m) {
  nlohmann::json j = {{"kind", to_string(m.kind)}, {"from", m.from},       {"to", m.to},
                      {"seq", m.seq},              {"time", m.timestamp}, {"payload", m.payload}};
  if (m.dropped) j["dropped"] = true;
  return j;
}

Message message_from_json(const nlohmann::json& j) {
  try {
    Message m;
    m.kind = parse_message_kind(j.at("kind").get<std::string>());
    m.from = j.at("from").get<std::string>();
    m.to = j.at("to").get<std::string>();
    m.seq = j.at("seq").get<std::uint64_t>();
    m.timestamp = j.at("time").get<std::uint64_t>();
    m.payload = j.value("payload", nlohmann::json::object());
    m.dropped = j.value("dropped", false);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

std::string trace_to_ndjson(const MessageTrace& trace) {
  std::string out;
  for (const auto& m : trace) {
    out += message_to_json(m).dump();
    out += '\n';
  }
  return out;
}

MessageTrace trace_from_ndjson(const std::string& text) {
  MessageTrace trace;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      trace.push_back(message_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return trace;
}

// -- bus -------------------------------------------------------------------------

void Bus::send(Message m) {
  m.seq = ++next_seq_[m.from];
  outbox_[m.from].push_back(std::move(m));
}

bool Bus::idle() const {
  for (const auto& [sender, queue] : outbox_)
    if (!queue.empty()) return false;
  return true;
}

bool Bus::should_drop(const Message& m) {
  int n = ++kind_count_[m.kind];
  if (!policy_) return false;
  if (auto it = policy_->drop_occurrences.find(m.kind); it != policy_->drop_occurrences.end() && it->second.contains(n))
    return true;
  if (policy_->drop_rate > 0.0) {
    std::mt19937_64 rng(fault_rng_++);
    return std::bernoulli_distribution(policy_->drop_rate)(rng);
  }
  return false;
}

std::vector<Message> Bus::deliver_round() {
  ++clock_;
  std::vector<AgentId> senders;
  for (const auto& [sender, queue] : outbox_)
    if (!queue.empty()) senders.push_back(sender);
  std::mt19937_64 rng(rng_state_ ^ (clock_ * 0x9E3779B97F4A7C15ULL));
  std::shuffle(senders.begin(), senders.end(), rng);

  const std::uint64_t delay = policy_ ? policy_->delay : 0;
  std::vector<Message> delivered;
  for (const auto& sender : senders) {
    for (auto& m : outbox_[sender]) {
      m.timestamp = clock_ + delay;
      m.dropped = should_drop(m);
      trace_.push_back(m);
      if (!m.dropped) delivered.push_back(std::move(m));
    }
    outbox_[sender].clear();
  }
  return delivered;
}

Bus inject_fault(Bus bus, FaultPolicy policy) {
  bus.fault_rng_ = policy.seed;
  bus.policy_ = std::move(policy);
  return bus;
}

AgentId elect_referee(const std::set<AgentId>& candidates) {
  if (candidates.empty()) throw Error(ErrorCode::EmptySet, "no candidate referee");
  return *candidates.begin();
}

// -- shared planning inputs ------------------------------------------------------

namespace {

std::vector<const AgentSpec*> working_agents(const MissionSpec& spec) {
  std::vector<const AgentSpec*> out;
  for (const auto& a : spec.agents)
    if (a.kind != AgentKind::UAVx2) out.push_back(&a);
  std::sort(out.begin(), out.end(), [](auto* x, auto* y) { return x->id < y->id; });
  return out;
}

// Parents whose children must be executed jointly.
std::vector<NodeId> joint_tasks(const TaemsTree& tree) {
  std::vector<NodeId> out;
  for (const auto& [id, node] : tree.nodes)
    if (node.kind == NodeKind::Task && node.local_qaf == Qaf::Max) out.push_back(id);
  return out;
}

std::set<NodeId> joint_units(const TaemsTree& tree) {
  std::set<NodeId> out;
  for (const auto& t : joint_tasks(tree))
    for (const auto& c : tree.nodes.at(t).children) out.insert(c);
  return out;
}

std::vector<NodeId> simple_units(const TaemsTree& tree) {
  std::vector<NodeId> out;
  const auto joint = joint_units(tree);
  for (const auto& u : work_units(tree))
    if (!joint.contains(u)) out.push_back(u);
  return out;
}

void check_criteria(const Criteria& c) {
  if (!weights_valid(c.alpha, c.beta, c.gamma))
    throw Error(ErrorCode::BadWeights, "weights must be non-negative and sum to 1");
  if (!delta_valid(c.delta)) throw Error(ErrorCode::BadDelta, "delta must lie in [0.5, 1)");
}

std::vector<AgentId> feasible_agents(const AssessmentTable& table, const std::vector<AgentId>& agents, const NodeId& unit) {
  std::vector<AgentId> out;
  for (const auto& a : agents)
    if (table.get(a, unit).feasible()) out.push_back(a);
  return out;
}

std::vector<AgentId> joint_candidates(const TaemsTree& tree, const AssessmentTable& table,
                                      const std::vector<AgentId>& agents, const NodeId& task) {
  std::vector<AgentId> out;
  for (const auto& a : agents) {
    bool ok = true;
    for (const auto& sub : tree.nodes.at(task).children) ok = ok && table.get(a, sub).feasible();
    if (ok) out.push_back(a);
  }
  return out;
}

AgentId resolve_unit(const NodeId& unit, const std::vector<AgentId>& candidates, const AssessmentTable& table,
                     const AllocationScheme& scheme, const Criteria& c) {
  if (candidates.empty()) throw Error(ErrorCode::InfeasibleTask, "no feasible agent for '" + unit + "'");
  if (candidates.size() == 1) return candidates.front();
  return resolve_simple(unit, candidates, table, scheme, weights_of(c), c.delta);
}

}  // namespace

AssessmentTable unit_assessments(const MissionSpec& spec, const TaemsTree& tree) {
  AssessmentTable table;
  for (const auto* a : working_agents(spec))
    for (const auto& u : work_units(tree)) table.set(a->id, u, assess_unit(spec, *a, u));
  return table;
}

StepAssessments step_assessments(const MissionSpec& spec, const TaemsTree& tree) {
  StepAssessments out;
  for (const auto* a : working_agents(spec))
    for (const auto& u : work_units(tree)) {
      auto& steps = out[{a->id, u}];
      for (const auto& act : tree.nodes.at(u).children) steps.push_back(assess(spec, *a, act));
    }
  return out;
}

std::vector<Precedence> unit_precedences(const TaemsTree& tree) {
  std::map<NodeId, std::pair<NodeId, int>> owner;  // action -> (unit, step)
  for (const auto& u : work_units(tree)) {
    const auto& children = tree.nodes.at(u).children;
    for (std::size_t k = 0; k < children.size(); ++k) owner[children[k]] = {u, static_cast<int>(k)};
  }
  std::vector<Precedence> out;
  for (const auto& rel : tree.interrelationships) {
    if (rel.kind != RelationKind::Enables) continue;
    auto s = owner.find(rel.source);
    auto t = owner.find(rel.target);
    if (s == owner.end() || t == owner.end()) continue;
    out.push_back({s->second.first, s->second.second, t->second.first});
  }
  return out;
}

std::map<NodeId, AgentId> centralized_assignments(const MissionSpec& spec, const TaemsTree& tree) {
  check_criteria(spec.criteria);
  std::vector<AgentId> agents;
  for (const auto* a : working_agents(spec)) agents.push_back(a->id);
  const AssessmentTable table = unit_assessments(spec, tree);
  const auto simple = simple_units(tree);
  const AllocationScheme scheme = market_allocation(simple, agents, step_assessments(spec, tree), unit_precedences(tree));

  std::map<NodeId, AgentId> out;
  for (const auto& u : simple) out[u] = resolve_unit(u, feasible_agents(table, agents, u), table, scheme, spec.criteria);
  for (const auto& task : joint_tasks(tree))
    for (auto& [sub, agent] :
         resolve_complex(tree, task, joint_candidates(tree, table, agents, task), table, weights_of(spec.criteria)))
      out[sub] = agent;
  return out;
}

Schedule centralized_plan(const MissionSpec& spec) {
  TaemsTree tree = generate_tree(spec);
  MissionAssessor assessor(spec);
  return build_schedule(tree, centralized_assignments(spec, tree), assessor);
}

// -- decentralized runtime ---------------------------------------------------------

namespace {

nlohmann::json assessment_json(const Assessment& a) { return {a.quality, a.duration, a.cost}; }

Assessment assessment_of(const nlohmann::json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

// One agent's private state. It learns about others only through messages.
struct Process {
  const AgentSpec* spec = nullptr;
  std::set<AgentId> shared;  // agents whose assessments arrived
  AssessmentTable table;
  StepAssessments steps;
  std::optional<AllocationScheme> scheme;
  std::map<NodeId, AgentId> awards;
  std::set<AgentId> statuses;
  std::set<std::pair<NodeId, int>> acked;  // (action, attempt)
  std::vector<ScheduledAction> local;
  std::vector<std::pair<NodeId, NodeId>> local_binding;
};

class Runtime {
 public:
  Runtime(const MissionSpec& spec, std::uint64_t seed, const CoordinationOptions& options)
      : spec_(spec), options_(options), tree_(generate_tree(spec)), assessor_(spec), bus_(seed) {
    if (options.faults) bus_ = inject_fault(std::move(bus_), *options.faults);
    for (const auto* a : working_agents(spec)) {
      ids_.push_back(a->id);
      procs_[a->id].spec = a;
    }
    if (ids_.empty()) throw Error(ErrorCode::EmptyAgentSet, "mission has no working agents");
    simple_ = simple_units(tree_);
    joint_ = joint_tasks(tree_);
  }

  CoordinationResult run() {
    check_criteria(spec_.criteria);
    share_assessments();
    publish_scheme();
    resolve_redundancy();
    schedule_locally();
    synchronize_joint_actions();
    return collect();
  }

 private:
  void broadcast(const AgentId& from, MessageKind kind, nlohmann::json payload) {
    bus_.send({kind, from, kBroadcast, std::move(payload)});
  }

  void send(const AgentId& from, const AgentId& to, MessageKind kind, nlohmann::json payload) {
    bus_.send({kind, from, to, std::move(payload)});
  }

  void receive(Process& p, const Message& m) {
    const auto& pl = m.payload;
    switch (m.kind) {
      case MessageKind::AssessmentShare:
        for (const auto& u : pl.at("units")) {
          const NodeId unit = u.at("unit").get<std::string>();
          p.table.set(m.from, unit, assessment_of(u.at("total")));
          auto& steps = p.steps[{m.from, unit}];
          steps.clear();
          for (const auto& s : u.at("steps")) steps.push_back(assessment_of(s));
        }
        p.shared.insert(m.from);
        break;
      case MessageKind::AllocationScheme: {
        AllocationScheme s;
        for (const auto& pair : pl.at("pairs")) s.pairs.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
        p.scheme = std::move(s);
        break;
      }
      case MessageKind::Award:
        p.awards[pl.at("task").get<std::string>()] = pl.at("agent").get<std::string>();
        break;
      case MessageKind::StatusUpdate:
        p.statuses.insert(m.from);
        break;
      case MessageKind::SyncRequest:
        send(p.spec->id, m.from, MessageKind::SyncAck, {{"action", pl.at("partner_action")}, {"attempt", pl.at("attempt")}});
        break;
      case MessageKind::SyncAck:
        p.acked.insert({pl.at("action").get<std::string>(), pl.at("attempt").get<int>()});
        break;
      case MessageKind::RefereeClaim:
      case MessageKind::Drop:
        break;
    }
  }

  void pump() {
    for (const auto& m : bus_.deliver_round()) {
      if (m.to == kBroadcast) {
        for (auto& [id, p] : procs_)
          if (id != m.from) receive(p, m);
      } else if (auto it = procs_.find(m.to); it != procs_.end()) {
        receive(it->second, m);
      }
    }
  }

  // Delivers rounds until `done` holds and the bus is drained; times out
  // after `patience` quiet rounds.
  template <typename Pred>
  void await(Pred done, const std::string& what) {
    int quiet = 0;
    while (!done() || !bus_.idle()) {
      if (bus_.idle() && ++quiet > options_.patience)
        throw Error(ErrorCode::CoordinationTimeout, "gave up waiting for " + what);
      pump();
    }
  }

  void share_assessments() {
    for (auto& [id, p] : procs_) {
      nlohmann::json units = nlohmann::json::array();
      for (const auto& u : work_units(tree_)) {
        Assessment total = assess_unit(spec_, *p.spec, u);
        nlohmann::json steps = nlohmann::json::array();
        for (const auto& act : tree_.nodes.at(u).children) steps.push_back(assessment_json(assess(spec_, *p.spec, act)));
        units.push_back({{"unit", u}, {"total", assessment_json(total)}, {"steps", steps}});
        p.table.set(id, u, total);
        auto& own = p.steps[{id, u}];
        for (const auto& s : steps) own.push_back(assessment_of(s));
      }
      p.shared.insert(id);
      broadcast(id, MessageKind::AssessmentShare, {{"units", units}});
    }
    await([&] { return std::all_of(procs_.begin(), procs_.end(), [&](auto& kv) { return kv.second.shared.size() == ids_.size(); }); },
          "assessment shares");
  }

  void publish_scheme() {
    const AgentId referee = elect_referee({ids_.begin(), ids_.end()});
    Process& r = procs_.at(referee);
    r.scheme = market_allocation(simple_, ids_, r.steps, unit_precedences(tree_));
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& [t, a] : r.scheme->pairs) pairs.push_back({t, a});
    broadcast(referee, MessageKind::AllocationScheme, {{"pairs", pairs}});
    await([&] { return std::all_of(procs_.begin(), procs_.end(), [](auto& kv) { return kv.second.scheme.has_value(); }); },
          "the allocation scheme");
  }

  void resolve_redundancy() {
    // Every agent derives the same candidate sets from the shared tables, so
    // each knows locally which tasks are contested and who referees them.
    for (const auto& u : simple_) {
      for (auto& [id, p] : procs_) {
        auto candidates = feasible_agents(p.table, ids_, u);
        if (candidates.empty()) throw Error(ErrorCode::InfeasibleTask, "no feasible agent for '" + u + "'");
        if (candidates.size() == 1) {
          p.awards[u] = candidates.front();
          continue;
        }
        if (id != elect_referee({candidates.begin(), candidates.end()})) continue;
        AgentId winner = resolve_unit(u, candidates, p.table, *p.scheme, spec_.criteria);
        broadcast(id, MessageKind::RefereeClaim, {{"task", u}, {"candidates", candidates}});
        broadcast(id, MessageKind::Award, {{"task", u}, {"agent", winner}});
        for (const auto& loser : candidates)
          if (loser != winner) send(id, loser, MessageKind::Drop, {{"task", u}});
        p.awards[u] = winner;
      }
    }
    for (const auto& task : joint_) {
      for (auto& [id, p] : procs_) {
        auto candidates = joint_candidates(tree_, p.table, ids_, task);
        if (candidates.empty()) continue;
        if (id != elect_referee({candidates.begin(), candidates.end()})) continue;
        auto result = resolve_complex(tree_, task, candidates, p.table, weights_of(spec_.criteria));
        broadcast(id, MessageKind::RefereeClaim, {{"task", task}, {"candidates", candidates}});
        std::set<AgentId> chosen;
        for (const auto& [sub, agent] : result) {
          broadcast(id, MessageKind::Award, {{"task", sub}, {"agent", agent}});
          p.awards[sub] = agent;
          chosen.insert(agent);
        }
        for (const auto& loser : candidates)
          if (!chosen.contains(loser)) send(id, loser, MessageKind::Drop, {{"task", task}});
      }
    }
    std::size_t expected = simple_.size();
    for (const auto& task : joint_) expected += tree_.nodes.at(task).children.size();
    for (const auto& task : joint_)
      if (joint_candidates(tree_, procs_.begin()->second.table, ids_, task).size() < tree_.nodes.at(task).children.size())
        throw Error(ErrorCode::TooFewAgents, task + " lacks enough capable agents");
    await([&] { return std::all_of(procs_.begin(), procs_.end(), [&](auto& kv) { return kv.second.awards.size() == expected; }); },
          "task awards");
  }

  void schedule_locally() {
    for (auto& [id, p] : procs_) {
      Schedule view = build_schedule(tree_, p.awards, assessor_);
      std::set<NodeId> mine;
      for (const auto& e : view.entries)
        if (e.agent == id) {
          p.local.push_back(e);
          mine.insert(e.action);
        }
      for (const auto& b : view.binding_enables)
        if (mine.contains(b.second)) p.local_binding.push_back(b);
      std::vector<NodeId> units;
      for (const auto& [u, a] : p.awards)
        if (a == id) units.push_back(u);
      broadcast(id, MessageKind::StatusUpdate, {{"units", units}, {"finish", p.local.empty() ? 0.0 : p.local.back().end}});
      p.statuses.insert(id);
    }
    await([&] { return std::all_of(procs_.begin(), procs_.end(), [&](auto& kv) { return kv.second.statuses.size() == ids_.size(); }); },
          "status updates");
  }

  void synchronize_joint_actions() {
    // Joint actions are the entries whose unit belongs to a joint task; group
    // them by position so each group is one lockstep step.
    struct Group {
      double start;
      std::vector<const ScheduledAction*> members;
    };
    std::map<std::pair<NodeId, int>, Group> groups;  // (joint task, step)
    for (const auto& task : joint_) {
      const auto& subs = tree_.nodes.at(task).children;
      for (const auto& sub : subs) {
        const auto& acts = tree_.nodes.at(sub).children;
        for (std::size_t k = 0; k < acts.size(); ++k)
          for (const auto& [id, p] : procs_)
            for (const auto& e : p.local)
              if (e.action == acts[k]) {
                auto& g = groups[{task, static_cast<int>(k)}];
                g.start = e.start;
                g.members.push_back(&e);
              }
      }
    }
    std::vector<Group*> ordered;
    for (auto& [key, g] : groups) ordered.push_back(&g);
    std::stable_sort(ordered.begin(), ordered.end(), [](auto* x, auto* y) { return x->start < y->start; });

    for (Group* g : ordered) {
      std::sort(g->members.begin(), g->members.end(), [](auto* x, auto* y) { return x->agent < y->agent; });
      const ScheduledAction* lead = g->members.front();
      for (std::size_t k = 1; k < g->members.size(); ++k) {
        const ScheduledAction* partner = g->members[k];
        bool acked = false;
        for (int attempt = 1; attempt <= options_.max_retries + 1 && !acked; ++attempt) {
          send(lead->agent, partner->agent, MessageKind::SyncRequest,
               {{"action", lead->action}, {"partner_action", partner->action}, {"start", lead->start}, {"attempt", attempt}});
          while (!bus_.idle()) pump();
          acked = procs_.at(lead->agent).acked.contains({partner->action, attempt});
        }
        if (!acked)
          throw Error(ErrorCode::CoordinationTimeout, partner->agent + " never acknowledged " + partner->action);
      }
    }
  }

  CoordinationResult collect() {
    CoordinationResult out;
    std::vector<ScheduledAction> entries;
    for (const auto& [id, p] : procs_) {
      entries.insert(entries.end(), p.local.begin(), p.local.end());
      out.schedule.binding_enables.insert(out.schedule.binding_enables.end(), p.local_binding.begin(), p.local_binding.end());
      out.views[id] = p.awards;
    }
    std::sort(entries.begin(), entries.end(), [](const ScheduledAction& x, const ScheduledAction& y) {
      return std::tie(x.start, x.agent, x.action) < std::tie(y.start, y.agent, y.action);
    });
    for (const auto& e : entries) {
      out.schedule.makespan = std::max(out.schedule.makespan, e.end);
      out.schedule.total_cost += e.cost;
      out.schedule.total_quality += e.quality;
    }
    std::sort(out.schedule.binding_enables.begin(), out.schedule.binding_enables.end());
    out.schedule.entries = std::move(entries);
    const Process& referee = procs_.at(elect_referee({ids_.begin(), ids_.end()}));
    out.scheme = *referee.scheme;
    out.assignments = referee.awards;
    out.trace = bus_.trace();
    return out;
  }

  const MissionSpec& spec_;
  CoordinationOptions options_;
  TaemsTree tree_;
  MissionAssessor assessor_;
  Bus bus_;
  std::vector<AgentId> ids_;
  std::map<AgentId, Process> procs_;
  std::vector<NodeId> simple_;
  std::vector<NodeId> joint_;
};

}  // namespace

CoordinationResult run_coordination(const MissionSpec& spec, std::uint64_t seed, const CoordinationOptions& options) {
  Runtime runtime(spec, seed, options);
  return runtime.run();
}

}  // namespace wallcoord
