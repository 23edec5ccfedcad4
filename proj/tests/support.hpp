#pragma once

// Shared fixtures and independent reference computations for the tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "wallcoord/allocate.hpp"
#include "wallcoord/mission.hpp"
#include "wallcoord/mission_json.hpp"
#include "wallcoord/schedule.hpp"
#include "wallcoord/taems.hpp"

namespace testing_support {

using namespace wallcoord;

inline std::string data_path(const std::string& name) { return std::string(WALLCOORD_DATA_DIR) + "/" + name; }

inline Brick make_brick(std::string id, Color c, double length, Point2 pile, Pose3 wall, int layer,
                        std::vector<std::string> supports = {}) {
  Brick b;
  b.id = std::move(id);
  b.color = c;
  b.length = length;
  b.width = 0.2;
  b.height = 0.2;
  b.pile_position = pile;
  b.wall_pose = wall;
  b.layer = layer;
  b.supports = std::move(supports);
  return b;
}

inline AgentSpec make_agent(std::string id, AgentKind kind, double speed, double cost_rate, Point2 start = {0.0, -3.0}) {
  AgentSpec a;
  a.id = std::move(id);
  a.kind = kind;
  a.speed = speed;
  a.cost_rate = cost_rate;
  a.start_position = start;
  return a;
}

// The two stacked bricks of the interleaving example, one UAV.
inline MissionSpec two_brick_mission() {
  MissionSpec s;
  s.bricks = {make_brick("B1.1", Color::Blue, 0.3, {0.0, 4.0}, {5.0, 0.0, 0.0, 0.0}, 0),
              make_brick("B2.1", Color::Blue, 0.3, {0.0, 5.0}, {5.0, 0.0, 0.2, 0.0}, 1, {"B1.1"})};
  s.agents = {make_agent("uav1", AgentKind::UAV, 1.0, 1.0)};
  return s;
}

// One orange brick carried by two of the given UAVs.
inline MissionSpec orange_mission(int uavs = 2) {
  MissionSpec s;
  s.bricks = {make_brick("B1.1", Color::Orange, 1.8, {6.0, 4.0}, {1.0, 0.0, 0.0, 0.0}, 0)};
  for (int k = 1; k <= uavs; ++k)
    s.agents.push_back(make_agent("uav" + std::to_string(k), AgentKind::UAV, 1.0 + 0.5 * k, 1.0, {0.0, -1.0 * k}));
  return s;
}

// -- independent reference computations -----------------------------------------

// Best injective assignment by trying every permutation of agents.
struct GapOptimum {
  double value = -std::numeric_limits<double>::infinity();
  std::vector<int> agent_of;  // per subtask
};

inline GapOptimum exhaustive_gap(const AssignmentMatrix& m) {
  const int agents = static_cast<int>(m.agents.size());
  const int subtasks = static_cast<int>(m.subtasks.size());
  GapOptimum best;
  std::vector<int> perm(agents);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    // The first `subtasks` entries of each permutation define one assignment;
    // duplicates across permutations are harmless for the maximum.
    double v = 0.0;
    for (int j = 0; j < subtasks; ++j) v += m.ratings[perm[j]][j];
    if (v > best.value) {
      best.value = v;
      best.agent_of.assign(perm.begin(), perm.begin() + subtasks);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline AssignmentMatrix random_matrix(std::mt19937_64& rng, int agents, int subtasks) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> coarse(0, 4);
  AssignmentMatrix m;
  for (int i = 0; i < agents; ++i) m.agents.push_back("a" + std::to_string(i));
  for (int j = 0; j < subtasks; ++j) m.subtasks.push_back("t" + std::to_string(j));
  // Half of the matrices use coarse values so ties are common.
  const bool ties = u(rng) < 0.5;
  m.ratings.assign(agents, std::vector<double>(subtasks));
  for (auto& row : m.ratings)
    for (auto& v : row) v = ties ? coarse(rng) / 4.0 : u(rng);
  return m;
}

// Hand-evaluated weighted rating for two or more agents.
inline double normalized_ratio(double value, double worst, double best) {
  return best == worst ? 1.0 : (value - worst) / (best - worst);
}


// Independent checks of a finished schedule; one message per problem.
inline std::vector<std::string> schedule_invariants(const Schedule& s, const TaemsTree& tree) {
  std::vector<std::string> out;
  std::map<NodeId, const ScheduledAction*> by_action;
  for (const auto& e : s.entries) by_action[e.action] = &e;
  constexpr double eps = 1e-9;
  for (const auto& r : tree.interrelationships) {
    if (r.kind != RelationKind::Enables) continue;
    auto src = by_action.find(r.source);
    auto dst = by_action.find(r.target);
    if (src == by_action.end() || dst == by_action.end()) continue;
    if (dst->second->start < src->second->end - eps) out.push_back("enables " + r.source + " -> " + r.target);
  }
  // Units in SeqSumAll order on a single agent.
  std::map<AgentId, std::vector<std::pair<double, double>>> carried;
  for (const auto& [id, node] : tree.nodes) {
    if (node.kind != NodeKind::Task || node.children.empty()) continue;
    if (tree.nodes.at(node.children.front()).kind != NodeKind::Action) continue;
    std::vector<const ScheduledAction*> steps;
    for (const auto& c : node.children)
      if (auto it = by_action.find(c); it != by_action.end()) steps.push_back(it->second);
    if (steps.empty()) continue;
    if (steps.size() != node.children.size()) {
      out.push_back("partial unit " + id);
      continue;
    }
    for (std::size_t k = 0; k < steps.size(); ++k) {
      if (steps[k]->agent != steps[0]->agent) out.push_back("split unit " + id);
      if (k > 0 && steps[k]->start < steps[k - 1]->end - eps) out.push_back("order " + steps[k]->action);
    }
    carried[steps[0]->agent].emplace_back(steps.front()->start, steps.back()->end);
  }
  // One brick in the gripper at a time: pick-to-place windows never overlap.
  for (auto& [agent, windows] : carried) {
    std::sort(windows.begin(), windows.end());
    for (std::size_t k = 1; k < windows.size(); ++k)
      if (windows[k].first < windows[k - 1].second - eps) out.push_back("carry overlap on " + agent);
  }
  // Agents do one action at a time.
  std::map<AgentId, std::vector<std::pair<double, double>>> busy;
  for (const auto& e : s.entries) busy[e.agent].emplace_back(e.start, e.end);
  for (auto& [agent, spans] : busy) {
    std::sort(spans.begin(), spans.end());
    for (std::size_t k = 1; k < spans.size(); ++k)
      if (spans[k].first < spans[k - 1].second - eps) out.push_back("overlap on " + agent);
  }
  return out;
}

inline std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) out += x + "; ";
  return out;
}

}  // namespace testing_support
