#include "wallcoord/taems.hpp"

#include <algorithm>
#include <functional>
#include <queue>

#include "wallcoord/error.hpp"

namespace wallcoord {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::MissingLeafQuality: return "MissingLeafQuality";
    case ErrorCode::EmptyWall: return "EmptyWall";
    case ErrorCode::NoEligibleAgent: return "NoEligibleAgent";
    case ErrorCode::UnknownAction: return "UnknownAction";
    case ErrorCode::UnknownAgent: return "UnknownAgent";
    case ErrorCode::EmptyAgentSet: return "EmptyAgentSet";
    case ErrorCode::BadWeights: return "BadWeights";
    case ErrorCode::BadDelta: return "BadDelta";
    case ErrorCode::InfeasibleTask: return "InfeasibleTask";
    case ErrorCode::InfeasibleDimensions: return "InfeasibleDimensions";
    case ErrorCode::NotComplexlyRedundant: return "NotComplexlyRedundant";
    case ErrorCode::TooFewAgents: return "TooFewAgents";
    case ErrorCode::Deadlock: return "Deadlock";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::CoordinationTimeout: return "CoordinationTimeout";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::UnsupportedJointTask: return "UnsupportedJointTask";
  }
  return "Unknown";
}

std::string_view to_string(Qaf q) {
  switch (q) {
    case Qaf::SumAll: return "SumAll";
    case Qaf::Max: return "Max";
    case Qaf::SeqSumAll: return "SeqSumAll";
    case Qaf::Sum: return "Sum";
  }
  return "?";
}

std::string_view to_string(NodeKind k) { return k == NodeKind::Task ? "Task" : "Action"; }

std::string_view to_string(RelationKind k) {
  switch (k) {
    case RelationKind::Enables: return "Enables";
    case RelationKind::Disables: return "Disables";
    case RelationKind::Consumes: return "Consumes";
    case RelationKind::Produces: return "Produces";
    case RelationKind::Limits: return "Limits";
  }
  return "?";
}

std::string_view to_string(TreeRule r) {
  switch (r) {
    case TreeRule::EmptyId: return "EmptyId";
    case TreeRule::KeyMismatch: return "KeyMismatch";
    case TreeRule::MissingRoot: return "MissingRoot";
    case TreeRule::UnresolvedReference: return "UnresolvedReference";
    case TreeRule::ActionHasChildren: return "ActionHasChildren";
    case TreeRule::TaskWithoutChildren: return "TaskWithoutChildren";
    case TreeRule::LocalQafOnAction: return "LocalQafOnAction";
    case TreeRule::MultipleParents: return "MultipleParents";
    case TreeRule::HierarchyCycle: return "HierarchyCycle";
    case TreeRule::Disconnected: return "Disconnected";
    case TreeRule::SelfLoop: return "SelfLoop";
    case TreeRule::BadEndpoint: return "BadEndpoint";
    case TreeRule::CyclicEnables: return "CyclicEnables";
    case TreeRule::ResourceBounds: return "ResourceBounds";
    case TreeRule::NegativeAmount: return "NegativeAmount";
  }
  return "?";
}

const TaemsNode* TaemsTree::find(std::string_view id) const {
  auto it = nodes.find(std::string(id));
  return it == nodes.end() ? nullptr : &it->second;
}

bool TaemsTree::is_action(std::string_view id) const {
  const TaemsNode* n = find(id);
  return n != nullptr && n->kind == NodeKind::Action;
}

namespace {

bool is_node_relation(RelationKind k) {
  return k == RelationKind::Enables || k == RelationKind::Disables;
}

// Kahn's algorithm; returns nodes left over when the graph has a cycle.
std::vector<std::string> cyclic_remainder(const std::map<std::string, std::set<std::string>>& adj) {
  std::map<std::string, int> indeg;
  for (const auto& [u, vs] : adj) {
    indeg.try_emplace(u, 0);
    for (const auto& v : vs) ++indeg[v];
  }
  std::queue<std::string> ready;
  for (const auto& [n, d] : indeg)
    if (d == 0) ready.push(n);
  while (!ready.empty()) {
    std::string u = ready.front();
    ready.pop();
    indeg.erase(u);
    auto it = adj.find(u);
    if (it == adj.end()) continue;
    for (const auto& v : it->second)
      if (--indeg[v] == 0) ready.push(v);
  }
  std::vector<std::string> rest;
  for (const auto& [n, d] : indeg) rest.push_back(n);
  return rest;
}

}  // namespace

std::vector<TreeViolation> validate_tree(const TaemsTree& tree) {
  std::vector<TreeViolation> out;
  auto add = [&](TreeRule r, std::string subject, std::string detail) {
    out.push_back({r, std::move(subject), std::move(detail)});
  };

  if (tree.nodes.empty() && tree.root.empty()) return out;  // the empty tree is valid

  for (const auto& [key, node] : tree.nodes) {
    if (node.id.empty()) add(TreeRule::EmptyId, key, "node id is empty");
    if (key != node.id) add(TreeRule::KeyMismatch, key, "map key differs from node id '" + node.id + "'");
    if (node.kind == NodeKind::Action) {
      if (!node.children.empty()) add(TreeRule::ActionHasChildren, key, "action nodes must be leaves");
      if (node.local_qaf) add(TreeRule::LocalQafOnAction, key, "local QAF is only meaningful on tasks");
    } else if (node.children.empty()) {
      add(TreeRule::TaskWithoutChildren, key, "task nodes need at least one child");
    }
    for (const auto& c : node.children)
      if (!tree.nodes.contains(c)) add(TreeRule::UnresolvedReference, key, "child '" + c + "' does not exist");
  }

  if (!tree.nodes.contains(tree.root)) {
    add(TreeRule::MissingRoot, tree.root, "root id does not resolve");
  }

  // Parent/child structure must be a tree hanging from the root.
  std::map<std::string, std::vector<std::string>> parents;
  for (const auto& [key, node] : tree.nodes)
    for (const auto& c : node.children) parents[c].push_back(key);
  for (const auto& [child, ps] : parents)
    if (ps.size() > 1) add(TreeRule::MultipleParents, child, "node has " + std::to_string(ps.size()) + " parents");
  if (parents.contains(tree.root)) add(TreeRule::HierarchyCycle, tree.root, "root has a parent");

  std::set<std::string> reached;
  if (tree.nodes.contains(tree.root)) {
    std::vector<std::string> stack{tree.root};
    while (!stack.empty()) {
      std::string id = stack.back();
      stack.pop_back();
      if (!reached.insert(id).second) continue;
      const TaemsNode* n = tree.find(id);
      if (n == nullptr) continue;
      for (const auto& c : n->children)
        if (tree.nodes.contains(c)) stack.push_back(c);
    }
  }
  for (const auto& [key, node] : tree.nodes)
    if (!reached.contains(key)) add(TreeRule::Disconnected, key, "not reachable from root");

  {
    std::map<std::string, std::set<std::string>> hier;
    for (const auto& [key, node] : tree.nodes)
      for (const auto& c : node.children) hier[key].insert(c);
    for (const auto& n : cyclic_remainder(hier))
      add(TreeRule::HierarchyCycle, n, "participates in a parent/child cycle");
  }

  std::map<std::string, std::set<std::string>> enables;
  for (const auto& e : tree.interrelationships) {
    std::string subject = std::string(to_string(e.kind)) + "(" + e.source + "->" + e.target + ")";
    if (e.source == e.target) add(TreeRule::SelfLoop, subject, "relation connects a node to itself");
    bool src_node = tree.nodes.contains(e.source), dst_node = tree.nodes.contains(e.target);
    bool src_res = tree.resources.contains(e.source), dst_res = tree.resources.contains(e.target);
    if (!src_node && !src_res) add(TreeRule::UnresolvedReference, subject, "source '" + e.source + "' does not exist");
    if (!dst_node && !dst_res) add(TreeRule::UnresolvedReference, subject, "target '" + e.target + "' does not exist");
    bool ok_src = true, ok_dst = true;
    switch (e.kind) {
      case RelationKind::Enables:
      case RelationKind::Disables:
        ok_src = !src_res;
        ok_dst = !dst_res;
        break;
      case RelationKind::Consumes:
      case RelationKind::Produces:
        ok_src = !src_res;
        ok_dst = !dst_node;
        break;
      case RelationKind::Limits:
        ok_src = !src_node;
        ok_dst = !dst_res;
        break;
    }
    if (!ok_src || !ok_dst) add(TreeRule::BadEndpoint, subject, "endpoint kinds do not match the relation");
    if (!is_node_relation(e.kind) && e.amount < 0) add(TreeRule::NegativeAmount, subject, "resource amounts are non-negative");
    if (e.kind == RelationKind::Enables && src_node && dst_node && e.source != e.target)
      enables[e.source].insert(e.target);
  }
  for (const auto& n : cyclic_remainder(enables))
    add(TreeRule::CyclicEnables, n, "participates in an Enables cycle");

  for (const auto& [key, r] : tree.resources) {
    if (key != r.id) add(TreeRule::KeyMismatch, key, "map key differs from resource id '" + r.id + "'");
    if (!(r.lower <= r.state && r.state <= r.upper))
      add(TreeRule::ResourceBounds, key, "state outside [lower, upper]");
  }
  return out;
}

double aggregate_quality(const TaemsTree& tree, const std::map<NodeId, double>& leaf_qualities) {
  if (tree.nodes.empty()) return 0.0;
  std::function<double(const NodeId&)> eval = [&](const NodeId& id) -> double {
    const TaemsNode* n = tree.find(id);
    if (n == nullptr) throw Error(ErrorCode::UnknownAction, "node '" + id + "' not in tree");
    if (n->kind == NodeKind::Action) {
      auto it = leaf_qualities.find(id);
      if (it == leaf_qualities.end()) throw Error(ErrorCode::MissingLeafQuality, id);
      return it->second;
    }
    std::vector<double> qs;
    qs.reserve(n->children.size());
    for (const auto& c : n->children) qs.push_back(eval(c));
    switch (n->qaf) {
      case Qaf::SumAll:
      case Qaf::SeqSumAll: {
        double s = 0.0;
        for (double q : qs) {
          if (q == 0.0) return 0.0;
          s += q;
        }
        return s;
      }
      case Qaf::Max: return qs.empty() ? 0.0 : *std::max_element(qs.begin(), qs.end());
      case Qaf::Sum: {
        double s = 0.0;
        for (double q : qs)
          if (q > 0.0) s += q;
        return s;
      }
    }
    return 0.0;
  };
  return eval(tree.root);
}

std::optional<Resource> apply_resource_effect(const Resource& res, double delta) {
  double next = res.state + delta;
  if (next < res.lower) return std::nullopt;
  Resource out = res;
  out.state = std::min(next, res.upper);
  return out;
}

bool resource_sufficient(const Resource& res, double amount) {
  return apply_resource_effect(res, -amount).has_value();
}

// -- TreeIndex ---------------------------------------------------------------

TreeIndex::TreeIndex(const TaemsTree& tree) {
  for (const auto& [key, node] : tree.nodes) {
    lookup_.emplace(key, static_cast<int>(ids_.size()));
    ids_.push_back(key);
  }
  const int n = node_count();
  is_action_.assign(n, 0);
  parent_.assign(n, -1);
  position_.assign(n, 0);
  descendant_actions_.assign(n, {});
  required_done_.assign(n, {});
  limits_.assign(n, {});
  consumes_.assign(n, {});
  produces_.assign(n, {});
  enables_rank_.assign(n, 0);

  std::vector<std::vector<int>> children(n);
  for (int i = 0; i < n; ++i) {
    const TaemsNode& node = tree.nodes.at(ids_[i]);
    is_action_[i] = node.kind == NodeKind::Action;
    if (is_action_[i]) actions_.push_back(i);
    for (std::size_t k = 0; k < node.children.size(); ++k) {
      int c = index_of(node.children[k]);
      if (c < 0) continue;
      children[i].push_back(c);
      parent_[c] = i;
      position_[c] = static_cast<int>(k);
    }
  }

  for (int a : actions_) {
    std::vector<int> seen;
    for (int x = a; x >= 0 && static_cast<int>(seen.size()) <= n; x = parent_[x]) {
      descendant_actions_[x].push_back(a);
      seen.push_back(x);
    }
  }

  for (const auto& [key, r] : tree.resources) {
    resource_lookup_.emplace(key, static_cast<int>(resource_ids_.size()));
    resource_ids_.push_back(key);
  }

  // Node-level constraints, lifted to descendant actions below.
  std::vector<std::vector<int>> node_requires(n);
  std::vector<std::vector<ResourceUse>> node_limits(n);
  for (const auto& e : tree.interrelationships) {
    int s = index_of(e.source), t = index_of(e.target);
    switch (e.kind) {
      case RelationKind::Enables:
        if (s >= 0 && t >= 0 && s != t) {
          node_requires[t].push_back(s);
          enables_edges_.emplace_back(s, t);
        }
        break;
      case RelationKind::Disables:
        if (s >= 0 && t >= 0 && s != t) {
          node_requires[s].push_back(t);
          disables_edges_.emplace_back(s, t);
        }
        break;
      case RelationKind::Consumes:
        if (s >= 0 && resource_index(e.target) >= 0) consumes_[s].push_back({resource_index(e.target), e.amount});
        break;
      case RelationKind::Produces:
        if (s >= 0 && resource_index(e.target) >= 0) produces_[s].push_back({resource_index(e.target), e.amount});
        break;
      case RelationKind::Limits:
        if (t >= 0 && resource_index(e.source) >= 0) node_limits[t].push_back({resource_index(e.source), e.amount});
        break;
    }
  }
  for (int x = 0; x < n; ++x) {
    int p = parent_[x];
    if (p >= 0 && !is_action_[p] && tree.nodes.at(ids_[p]).qaf == Qaf::SeqSumAll) {
      for (int k = 0; k < position_[x]; ++k) node_requires[x].push_back(children[p][k]);
    }
  }

  for (int a : actions_) {
    std::set<int> req;
    int depth = 0;
    for (int x = a; x >= 0 && depth <= n; x = parent_[x], ++depth) {
      for (int src : node_requires[x])
        for (int d : descendant_actions_[src]) req.insert(d);
      for (const auto& use : node_limits[x]) limits_[a].push_back(use);
    }
    req.erase(a);
    required_done_[a].assign(req.begin(), req.end());
  }

  // Enables ranks on the action-level expansion of the Enables relation.
  std::vector<std::vector<int>> succ(n);
  std::vector<int> indeg(n, 0);
  for (auto [s, t] : enables_edges_)
    for (int u : descendant_actions_[s])
      for (int v : descendant_actions_[t]) {
        succ[u].push_back(v);
        ++indeg[v];
      }
  std::queue<int> ready;
  for (int a : actions_)
    if (indeg[a] == 0) ready.push(a);
  std::vector<char> placed(n, 0);
  while (!ready.empty()) {
    int u = ready.front();
    ready.pop();
    placed[u] = 1;
    for (int v : succ[u]) {
      enables_rank_[v] = std::max(enables_rank_[v], enables_rank_[u] + 1);
      if (--indeg[v] == 0) ready.push(v);
    }
  }
  for (int a : actions_)
    if (!placed[a]) enables_rank_[a] = n;
  for (int a : actions_)
    for (int x = parent_[a], depth = 0; x >= 0 && depth <= n; x = parent_[x], ++depth)
      enables_rank_[x] = std::max(enables_rank_[x], enables_rank_[a]);
}

int TreeIndex::index_of(std::string_view id) const {
  auto it = lookup_.find(id);
  return it == lookup_.end() ? -1 : it->second;
}

int TreeIndex::resource_index(std::string_view id) const {
  auto it = resource_lookup_.find(id);
  return it == resource_lookup_.end() ? -1 : it->second;
}

std::set<NodeId> executable_actions(const TaemsTree& tree, const std::set<NodeId>& done,
                                    const std::set<NodeId>& in_progress,
                                    const std::map<ResourceId, Resource>& resources) {
  std::set<NodeId> out;
  if (tree.nodes.empty()) return out;
  TreeIndex index(tree);
  for (int a : index.actions()) {
    const NodeId& id = index.id(a);
    if (done.contains(id) || in_progress.contains(id)) continue;
    bool ok = true;
    for (int r : index.required_done(a))
      if (!done.contains(index.id(r))) {
        ok = false;
        break;
      }
    if (!ok) continue;
    for (const auto& use : index.limits(a)) {
      auto it = resources.find(index.resource_id(use.resource));
      if (it != resources.end() && !resource_sufficient(it->second, use.amount)) {
        ok = false;
        break;
      }
    }
    if (ok) out.insert(id);
  }
  return out;
}

}  // namespace wallcoord
