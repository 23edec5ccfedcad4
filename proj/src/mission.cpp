#include "wallcoord/mission.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "wallcoord/error.hpp"

namespace wallcoord {

std::string_view to_string(Color c) {
  switch (c) {
    case Color::Red: return "Red";
    case Color::Green: return "Green";
    case Color::Blue: return "Blue";
    case Color::Orange: return "Orange";
  }
  return "?";
}

std::string_view to_string(AgentKind k) {
  switch (k) {
    case AgentKind::UGV: return "UGV";
    case AgentKind::UAV: return "UAV";
    case AgentKind::UAVx2: return "UAVx2";
  }
  return "?";
}

std::string_view to_string(ActionType t) {
  switch (t) {
    case ActionType::GP: return "GP";
    case ActionType::PU: return "PU";
    case ActionType::GW: return "GW";
    case ActionType::PD: return "PD";
  }
  return "?";
}

Color parse_color(const std::string& s) {
  for (Color c : {Color::Red, Color::Green, Color::Blue, Color::Orange})
    if (to_string(c) == s) return c;
  throw Error(ErrorCode::ParseError, "unknown color '" + s + "'");
}

AgentKind parse_agent_kind(const std::string& s) {
  for (AgentKind k : {AgentKind::UGV, AgentKind::UAV, AgentKind::UAVx2})
    if (to_string(k) == s) return k;
  throw Error(ErrorCode::ParseError, "unknown agent kind '" + s + "'");
}

ScoreTable ScoreTable::defaults() {
  ScoreTable t;
  t.base_points = {{Color::Red, 1.0}, {Color::Green, 2.0}, {Color::Blue, 3.0}, {Color::Orange, 4.0}};
  t.uav_bonus = {{Color::Red, 2.0}, {Color::Green, 1.4}, {Color::Blue, 1.0}, {Color::Orange, 1.0}};
  return t;
}

const Brick* MissionSpec::find_brick(std::string_view id) const {
  for (const auto& b : bricks)
    if (b.id == id) return &b;
  return nullptr;
}

const AgentSpec* MissionSpec::find_agent(std::string_view id) const {
  for (const auto& a : agents)
    if (a.id == id) return &a;
  return nullptr;
}

bool weights_valid(double alpha, double beta, double gamma) {
  if (!(alpha >= 0 && beta >= 0 && gamma >= 0)) return false;
  return std::abs(alpha + beta + gamma - 1.0) <= 1e-9;
}

bool delta_valid(double delta) { return delta >= 0.5 && delta < 1.0; }

std::vector<std::string> validate_spec(const MissionSpec& spec) {
  std::vector<std::string> out;
  std::set<std::string> brick_ids;
  for (const auto& b : spec.bricks) {
    if (b.id.empty() || b.id.find_first_of("()#") != std::string::npos)
      out.push_back("brick id '" + b.id + "' is empty or contains '(', ')' or '#'");
    if (!brick_ids.insert(b.id).second) out.push_back("duplicate brick id '" + b.id + "'");
    if (!(b.length >= 0.3 && b.length <= 1.8)) out.push_back("brick '" + b.id + "' length outside [0.3, 1.8] m");
    if (b.layer < 0) out.push_back("brick '" + b.id + "' has a negative layer");
    if (b.layer == 0 && !b.supports.empty()) out.push_back("layer-0 brick '" + b.id + "' lists supports");
  }
  for (const auto& b : spec.bricks) {
    for (const auto& s : b.supports) {
      const Brick* under = spec.find_brick(s);
      if (under == nullptr)
        out.push_back("brick '" + b.id + "' is supported by unknown brick '" + s + "'");
      else if (under->layer >= b.layer)
        out.push_back("brick '" + b.id + "' is supported by '" + s + "' which is not in a lower layer");
    }
  }
  std::set<std::string> agent_ids;
  for (const auto& a : spec.agents) {
    if (a.id.empty()) out.push_back("agent id is empty");
    if (!agent_ids.insert(a.id).second) out.push_back("duplicate agent id '" + a.id + "'");
    if (!(a.speed > 0)) out.push_back("agent '" + a.id + "' speed must be positive");
    if (!(a.cost_rate >= 0)) out.push_back("agent '" + a.id + "' cost rate must be non-negative");
    if (a.kind == AgentKind::UAVx2) {
      if (!a.member_ids) {
        out.push_back("UAVx2 agent '" + a.id + "' has no members");
      } else {
        const auto& [m1, m2] = *a.member_ids;
        const AgentSpec* p = spec.find_agent(m1);
        const AgentSpec* q = spec.find_agent(m2);
        if (m1 == m2 || p == nullptr || q == nullptr || p->kind != AgentKind::UAV || q->kind != AgentKind::UAV)
          out.push_back("UAVx2 agent '" + a.id + "' members must be two distinct UAVs");
      }
    }
  }
  for (const auto* table : {&spec.score_table.base_points, &spec.score_table.uav_bonus}) {
    for (const auto& [c, v] : *table)
      if (!(v >= 0)) out.push_back("score table entry for " + std::string(to_string(c)) + " is negative");
  }
  const Criteria& c = spec.criteria;
  if (!weights_valid(c.alpha, c.beta, c.gamma)) out.push_back("criteria weights must be non-negative and sum to 1");
  if (!delta_valid(c.delta)) out.push_back("delta must lie in [0.5, 1)");
  if (!(spec.fixed_grab_s >= 0 && spec.fixed_release_s >= 0)) out.push_back("fixed grab/release times must be non-negative");
  return out;
}

// -- naming ------------------------------------------------------------------

std::string brick_task_id(const std::string& brick) { return "TB(" + brick + ")"; }

std::string subtask_id(const std::string& brick, int slot) {
  return brick_task_id(brick) + "#" + std::to_string(slot);
}

std::string action_id(ActionType t, const std::string& brick, int slot) {
  std::string id = std::string(to_string(t)) + "(" + brick + ")";
  if (slot > 0) id += "#" + std::to_string(slot);
  return id;
}

std::optional<ActionRef> parse_action_id(std::string_view id) {
  auto open = id.find('(');
  auto close = id.find(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open + 2) return std::nullopt;
  std::string_view head = id.substr(0, open);
  ActionRef ref{};
  bool matched = false;
  for (ActionType t : {ActionType::GP, ActionType::PU, ActionType::GW, ActionType::PD}) {
    if (head == to_string(t)) {
      ref.type = t;
      matched = true;
    }
  }
  if (!matched) return std::nullopt;
  ref.brick = std::string(id.substr(open + 1, close - open - 1));
  std::string_view tail = id.substr(close + 1);
  if (!tail.empty()) {
    if (tail.size() < 2 || tail[0] != '#') return std::nullopt;
    int slot = 0;
    for (char ch : tail.substr(1)) {
      if (ch < '0' || ch > '9') return std::nullopt;
      slot = slot * 10 + (ch - '0');
    }
    if (slot <= 0) return std::nullopt;
    ref.slot = slot;
  }
  return ref;
}

std::string carry_resource_id(const AgentId& agent) { return "carry(" + agent + ")"; }

std::vector<AgentKind> eligible_kinds(Color c) {
  switch (c) {
    case Color::Red:
    case Color::Green: return {AgentKind::UGV, AgentKind::UAV};
    case Color::Blue: return {AgentKind::UAV};
    case Color::Orange: return {AgentKind::UAV, AgentKind::UAVx2};
  }
  return {};
}

namespace {

bool kind_eligible(Color c, AgentKind k) {
  auto kinds = eligible_kinds(c);
  return std::find(kinds.begin(), kinds.end(), k) != kinds.end();
}

bool can_handle(const MissionSpec& spec, const AgentSpec& a, const Brick& b) {
  if (!kind_eligible(b.color, a.kind)) return false;
  if (a.kind == AgentKind::UGV && b.wall_pose.z > a.reach_height) return false;
  (void)spec;
  return true;
}

std::set<std::string> kind_tokens(Color c) {
  std::set<std::string> out;
  for (AgentKind k : eligible_kinds(c)) out.insert(std::string(to_string(k)));
  return out;
}

}  // namespace

TaemsTree generate_tree(const MissionSpec& spec, TreeOptions options) {
  if (spec.bricks.empty()) throw Error(ErrorCode::EmptyWall, "mission has no bricks");
  if (auto problems = validate_spec(spec); !problems.empty()) throw Error(ErrorCode::InvalidSpec, problems.front());

  for (const auto& b : spec.bricks) {
    int capable = 0;
    for (const auto& a : spec.agents)
      if (a.kind != AgentKind::UAVx2 && can_handle(spec, a, b)) ++capable;
    int needed = b.color == Color::Orange ? kJointSlots : 1;
    if (capable < needed) throw Error(ErrorCode::NoEligibleAgent, "no agent can handle brick '" + b.id + "'");
  }

  TaemsTree tree;
  tree.root = std::string(kRootId);
  TaemsNode root{tree.root, NodeKind::Task, {}, Qaf::SumAll, std::nullopt, {}};

  // Work units (TB tasks or joint subtasks) per brick, for resource and Enables wiring.
  std::map<std::string, std::vector<std::string>> units_of;

  auto add_unit = [&](const Brick& b, const std::string& unit_id, int slot) {
    TaemsNode unit{unit_id, NodeKind::Task, {}, Qaf::SeqSumAll, std::nullopt, kind_tokens(b.color)};
    for (ActionType t : {ActionType::GP, ActionType::PU, ActionType::GW, ActionType::PD}) {
      std::string aid = action_id(t, b.id, slot);
      unit.children.push_back(aid);
      tree.nodes.emplace(aid, TaemsNode{aid, NodeKind::Action, {}, Qaf::SumAll, std::nullopt, kind_tokens(b.color)});
    }
    tree.nodes.emplace(unit_id, std::move(unit));
    units_of[b.id].push_back(unit_id);
  };

  for (const auto& b : spec.bricks) {
    std::string tb = brick_task_id(b.id);
    root.children.push_back(tb);
    if (b.color == Color::Orange) {
      TaemsNode parent{tb, NodeKind::Task, {}, Qaf::SumAll, Qaf::Max, kind_tokens(b.color)};
      for (int k = 1; k <= kJointSlots; ++k) {
        parent.children.push_back(subtask_id(b.id, k));
        add_unit(b, subtask_id(b.id, k), k);
      }
      tree.nodes.emplace(tb, std::move(parent));
    } else {
      add_unit(b, tb, 0);
    }
  }
  tree.nodes.emplace(root.id, root);

  if (options.carry_resources) {
    for (const auto& a : spec.agents) {
      if (a.kind == AgentKind::UAVx2) continue;
      std::string rid = carry_resource_id(a.id);
      bool used = false;
      for (const auto& b : spec.bricks) {
        if (!kind_eligible(b.color, a.kind)) continue;
        used = true;
        int slots = b.color == Color::Orange ? kJointSlots : 0;
        for (int k = slots == 0 ? 0 : 1; k <= slots; ++k) {
          std::string gp = action_id(ActionType::GP, b.id, k);
          std::string pd = action_id(ActionType::PD, b.id, k);
          tree.interrelationships.push_back({RelationKind::Consumes, gp, rid, 1.0});
          tree.interrelationships.push_back({RelationKind::Produces, pd, rid, 1.0});
          tree.interrelationships.push_back({RelationKind::Limits, rid, gp, 1.0});
        }
      }
      if (used) tree.resources.emplace(rid, Resource{rid, 1.0, 0.0, 1.1, a.id});
    }
  }

  // Brick-level precedence: supports, then the immediate left neighbour in the layer.
  std::set<std::pair<std::string, std::string>> precedes;
  for (const auto& b : spec.bricks) {
    for (const auto& s : b.supports) precedes.emplace(s, b.id);
    const Brick* left = nullptr;
    for (const auto& o : spec.bricks) {
      if (o.id == b.id || o.layer != b.layer || !(o.wall_pose.x < b.wall_pose.x)) continue;
      if (left == nullptr || o.wall_pose.x > left->wall_pose.x) left = &o;
    }
    if (left != nullptr) precedes.emplace(left->id, b.id);
  }
  std::set<std::pair<std::string, std::string>> edges;
  for (const auto& [from, to] : precedes) {
    const Brick* f = spec.find_brick(from);
    const Brick* t = spec.find_brick(to);
    bool joint = f->color == Color::Orange || t->color == Color::Orange;
    ActionType src_type = joint ? ActionType::PD : ActionType::PU;
    int fs = f->color == Color::Orange ? 1 : 0, fe = f->color == Color::Orange ? kJointSlots : 0;
    int ts = t->color == Color::Orange ? 1 : 0, te = t->color == Color::Orange ? kJointSlots : 0;
    for (int i = fs; i <= fe; ++i)
      for (int k = ts; k <= te; ++k) {
        auto e = std::make_pair(action_id(src_type, from, i), action_id(ActionType::GP, to, k));
        if (edges.insert(e).second) tree.interrelationships.push_back({RelationKind::Enables, e.first, e.second, 0.0});
      }
  }
  return tree;
}

// -- assessment --------------------------------------------------------------

namespace {

struct Point3 {
  double x, y, z;
};

double distance(Point3 a, Point3 b) { return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z); }

Point3 pile_of(const Brick& b) { return {b.pile_position.x, b.pile_position.y, 0.0}; }
Point3 wall_of(const Brick& b) { return {b.wall_pose.x, b.wall_pose.y, b.wall_pose.z}; }

struct Mover {
  AgentKind kind;
  double speed;
  double cost_rate;
  Point2 start;
  double reach;
};

Mover mover_for(const MissionSpec& spec, const AgentSpec& agent) {
  Mover m{agent.kind, agent.speed, agent.cost_rate, agent.start_position, agent.reach_height};
  if (agent.kind == AgentKind::UAVx2 && agent.member_ids) {
    const AgentSpec* p = spec.find_agent(agent.member_ids->first);
    const AgentSpec* q = spec.find_agent(agent.member_ids->second);
    if (p != nullptr && q != nullptr) {
      const AgentSpec* slow = p->speed <= q->speed ? p : q;
      m.speed = slow->speed;
      m.cost_rate = p->cost_rate + q->cost_rate;
      m.start = slow->start_position;
    }
  }
  return m;
}

Point3 location_after(const MissionSpec& spec, const NodeId& previous, Point3 fallback) {
  auto ref = parse_action_id(previous);
  if (!ref) return fallback;
  const Brick* b = spec.find_brick(ref->brick);
  if (b == nullptr) return fallback;
  return (ref->type == ActionType::GP || ref->type == ActionType::PU) ? pile_of(*b) : wall_of(*b);
}

}  // namespace

Assessment assess_after(const MissionSpec& spec, const AgentSpec& agent, const NodeId& action,
                        const NodeId* previous) {
  auto ref = parse_action_id(action);
  const Brick* b = ref ? spec.find_brick(ref->brick) : nullptr;
  if (b == nullptr) throw Error(ErrorCode::UnknownAction, action);
  bool joint = b->color == Color::Orange;
  if (joint != (ref->slot > 0) || ref->slot > kJointSlots) throw Error(ErrorCode::UnknownAction, action);

  const Mover m = mover_for(spec, agent);
  if (!kind_eligible(b->color, m.kind)) return Assessment::infeasible();
  if (m.kind == AgentKind::UGV && b->wall_pose.z > m.reach) return Assessment::infeasible();

  Assessment out;
  switch (ref->type) {
    case ActionType::GP: {
      Point3 from{m.start.x, m.start.y, 0.0};
      if (previous != nullptr) from = location_after(spec, *previous, from);
      out.duration = distance(from, pile_of(*b)) / m.speed;
      break;
    }
    case ActionType::PU: out.duration = spec.fixed_grab_s; break;
    case ActionType::GW: out.duration = distance(pile_of(*b), wall_of(*b)) / m.speed; break;
    case ActionType::PD: {
      out.duration = spec.fixed_release_s;
      double points = 0.0;
      if (auto it = spec.score_table.base_points.find(b->color); it != spec.score_table.base_points.end())
        points = it->second;
      if (m.kind != AgentKind::UGV) {
        auto it = spec.score_table.uav_bonus.find(b->color);
        points *= it != spec.score_table.uav_bonus.end() ? it->second : 1.0;
      }
      // A joint brick's points are split across its subtasks; an aggregated
      // UAVx2 assessment keeps the full value.
      if (joint && m.kind != AgentKind::UAVx2) points /= kJointSlots;
      out.quality = points;
      break;
    }
  }
  out.cost = out.duration * m.cost_rate * (b->length / kReferenceBrickLength);
  return out;
}

Assessment assess(const MissionSpec& spec, const AgentSpec& agent, const NodeId& action) {
  return assess_after(spec, agent, action, nullptr);
}

Assessment assess_unit(const MissionSpec& spec, const AgentSpec& agent, const NodeId& unit) {
  // TB(b) or TB(b)#k
  if (unit.size() < 5 || unit.rfind("TB(", 0) != 0) throw Error(ErrorCode::UnknownAction, unit);
  auto ref = parse_action_id("GP" + unit.substr(2));
  if (!ref) throw Error(ErrorCode::UnknownAction, unit);
  Assessment total;
  for (ActionType t : {ActionType::GP, ActionType::PU, ActionType::GW, ActionType::PD}) {
    Assessment a = assess(spec, agent, action_id(t, ref->brick, ref->slot));
    if (!a.feasible()) return Assessment::infeasible();
    total.quality += a.quality;
    total.duration += a.duration;
    total.cost += a.cost;
  }
  return total;
}

}  // namespace wallcoord
