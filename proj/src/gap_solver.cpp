#include <algorithm>
#include <cmath>
#include <numeric>

#include "wallcoord/allocate.hpp"
#include "wallcoord/error.hpp"

namespace wallcoord {

namespace {

void check_dimensions(const AssignmentMatrix& m) {
  const std::size_t agents = m.agents.size(), subtasks = m.subtasks.size();
  if (m.ratings.size() != agents)
    throw Error(ErrorCode::InfeasibleDimensions, "rating rows do not match the agent list");
  for (const auto& row : m.ratings)
    if (row.size() != subtasks) throw Error(ErrorCode::InfeasibleDimensions, "rating columns do not match the subtask list");
  if (agents < subtasks)
    throw Error(ErrorCode::InfeasibleDimensions,
                std::to_string(agents) + " agents cannot cover " + std::to_string(subtasks) + " subtasks");
}

double canonical_objective(const AssignmentMatrix& m, const std::vector<int>& agent_of) {
  double s = 0.0;
  for (std::size_t j = 0; j < agent_of.size(); ++j) s += m.ratings[agent_of[j]][j];
  return s;
}

std::map<NodeId, AgentId> to_map(const AssignmentMatrix& m, const std::vector<int>& agent_of) {
  std::map<NodeId, AgentId> out;
  for (std::size_t j = 0; j < agent_of.size(); ++j) out[m.subtasks[j]] = m.agents[agent_of[j]];
  return out;
}

class BranchAndBound {
 public:
  explicit BranchAndBound(const AssignmentMatrix& m) : m_(m) {
    const int n = static_cast<int>(m.subtasks.size());
    const int agents = static_cast<int>(m.agents.size());
    // Subtasks with the widest rating spread are decided first.
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    std::vector<double> spread(n, 0.0);
    for (int j = 0; j < n; ++j) {
      double lo = m.ratings[0][j], hi = lo;
      for (int i = 1; i < agents; ++i) {
        lo = std::min(lo, m.ratings[i][j]);
        hi = std::max(hi, m.ratings[i][j]);
      }
      spread[j] = hi - lo;
    }
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) { return spread[a] > spread[b]; });
    agent_order_.resize(n);
    for (int j = 0; j < n; ++j) {
      auto& ao = agent_order_[j];
      ao.resize(agents);
      std::iota(ao.begin(), ao.end(), 0);
      std::stable_sort(ao.begin(), ao.end(), [&](int a, int b) { return m.ratings[a][j] > m.ratings[b][j]; });
    }
    used_.assign(agents, 0);
    current_.assign(n, -1);
  }

  std::vector<int> solve() {
    descend(0, 0.0);
    return best_;
  }

 private:
  double bound(int depth) const {
    double b = 0.0;
    for (int d = depth; d < static_cast<int>(order_.size()); ++d) {
      int j = order_[d];
      for (int i : agent_order_[j])
        if (!used_[i]) {
          b += m_.ratings[i][j];
          break;
        }
    }
    return b;
  }

  void descend(int depth, double partial) {
    const int n = static_cast<int>(order_.size());
    if (depth == n) {
      double value = canonical_objective(m_, current_);
      if (best_.empty() || value > best_value_) {
        best_value_ = value;
        best_ = current_;
      }
      return;
    }
    if (!best_.empty()) {
      double ub = partial + bound(depth);
      // The slack absorbs summation-order rounding so an equal-valued
      // branch is never cut before its canonical objective is compared.
      if (ub + 1e-9 * (1.0 + std::abs(best_value_)) < best_value_) return;
    }
    int j = order_[depth];
    for (int i : agent_order_[j]) {
      if (used_[i]) continue;
      used_[i] = 1;
      current_[j] = i;
      descend(depth + 1, partial + m_.ratings[i][j]);
      current_[j] = -1;
      used_[i] = 0;
    }
  }

  const AssignmentMatrix& m_;
  std::vector<int> order_;
  std::vector<std::vector<int>> agent_order_;
  std::vector<char> used_;
  std::vector<int> current_;
  std::vector<int> best_;
  double best_value_ = 0.0;
};

}  // namespace

double gap_objective(const AssignmentMatrix& m, const std::map<NodeId, AgentId>& assignment) {
  double s = 0.0;
  for (std::size_t j = 0; j < m.subtasks.size(); ++j) {
    const AgentId& a = assignment.at(m.subtasks[j]);
    auto it = std::find(m.agents.begin(), m.agents.end(), a);
    s += m.ratings[it - m.agents.begin()][j];
  }
  return s;
}

std::map<NodeId, AgentId> solve_gap(const AssignmentMatrix& m) {
  check_dimensions(m);
  if (m.subtasks.empty()) return {};
  BranchAndBound bb(m);
  return to_map(m, bb.solve());
}

}  // namespace wallcoord
