#pragma once

// Hierarchical task/action trees with quality accumulation functions,
// interrelationships and virtual resources.

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wallcoord {

using NodeId = std::string;
using ResourceId = std::string;
using AgentId = std::string;

enum class Qaf { SumAll, Max, SeqSumAll, Sum };
enum class NodeKind { Task, Action };
enum class RelationKind { Enables, Disables, Consumes, Produces, Limits };

std::string_view to_string(Qaf q);
std::string_view to_string(NodeKind k);
std::string_view to_string(RelationKind k);

struct TaemsNode {
  NodeId id;
  NodeKind kind = NodeKind::Action;
  std::vector<NodeId> children;
  Qaf qaf = Qaf::SumAll;  // ignored on actions
  std::optional<Qaf> local_qaf;
  std::set<std::string> eligible_agent_kinds;

  bool operator==(const TaemsNode&) const = default;
};

struct Interrelationship {
  RelationKind kind = RelationKind::Enables;
  std::string source;
  std::string target;
  double amount = 0.0;  // resource relations only

  bool operator==(const Interrelationship&) const = default;
};

struct Resource {
  ResourceId id;
  double state = 1.0;
  double lower = 0.0;
  double upper = 1.1;
  AgentId owner_agent;

  bool operator==(const Resource&) const = default;
};

struct TaemsTree {
  NodeId root;
  std::map<NodeId, TaemsNode> nodes;
  std::vector<Interrelationship> interrelationships;
  std::map<ResourceId, Resource> resources;

  bool operator==(const TaemsTree&) const = default;

  const TaemsNode* find(std::string_view id) const;
  bool is_action(std::string_view id) const;
};

// -- validation --------------------------------------------------------------

enum class TreeRule {
  EmptyId,
  KeyMismatch,
  MissingRoot,
  UnresolvedReference,
  ActionHasChildren,
  TaskWithoutChildren,
  LocalQafOnAction,
  MultipleParents,
  HierarchyCycle,
  Disconnected,
  SelfLoop,
  BadEndpoint,
  CyclicEnables,
  ResourceBounds,
  NegativeAmount,
};

std::string_view to_string(TreeRule r);

struct TreeViolation {
  TreeRule rule;
  std::string subject;
  std::string detail;
};

// Collects every violation instead of stopping at the first.
std::vector<TreeViolation> validate_tree(const TaemsTree& tree);

// -- semantics ---------------------------------------------------------------

// Bottom-up root quality. Throws Error(MissingLeafQuality) when an action
// reachable from the root has no entry.
double aggregate_quality(const TaemsTree& tree, const std::map<NodeId, double>& leaf_qualities);

// Returns the updated resource, or nullopt when the change would drop the
// state below the lower limit. Increases clamp at the upper limit.
std::optional<Resource> apply_resource_effect(const Resource& res, double delta);

// Actions that may start now. Limits-linked resources absent from `resources`
// are not checked, which lets a caller pass only one agent's resources.
std::set<NodeId> executable_actions(const TaemsTree& tree, const std::set<NodeId>& done,
                                    const std::set<NodeId>& in_progress,
                                    const std::map<ResourceId, Resource>& resources);

// Integer-indexed view of a tree with every start constraint of an action
// flattened to a list of actions that must already be done. Built once and
// queried many times by the scheduler and the oracle.
class TreeIndex {
 public:
  explicit TreeIndex(const TaemsTree& tree);

  int node_count() const { return static_cast<int>(ids_.size()); }
  int index_of(std::string_view id) const;  // -1 when unknown
  const NodeId& id(int node) const { return ids_[node]; }
  bool is_action(int node) const { return is_action_[node]; }
  int parent(int node) const { return parent_[node]; }
  // Position of the node among its parent's children.
  int position(int node) const { return position_[node]; }

  std::span<const int> actions() const { return actions_; }
  std::span<const int> descendant_actions(int node) const { return descendant_actions_[node]; }
  std::span<const int> required_done(int action) const { return required_done_[action]; }

  struct ResourceUse {
    int resource;
    double amount;
  };
  std::span<const ResourceUse> limits(int action) const { return limits_[action]; }
  std::span<const ResourceUse> consumes(int action) const { return consumes_[action]; }
  std::span<const ResourceUse> produces(int action) const { return produces_[action]; }

  int resource_count() const { return static_cast<int>(resource_ids_.size()); }
  int resource_index(std::string_view id) const;
  const ResourceId& resource_id(int r) const { return resource_ids_[r]; }

  // Longest-path depth of each node in the Enables relation lifted to the
  // topmost distinct ancestors below the root; 0 for unconstrained nodes.
  int enables_rank(int node) const { return enables_rank_[node]; }

  // Direct Enables / Disables edges between nodes, as index pairs.
  std::span<const std::pair<int, int>> enables_edges() const { return enables_edges_; }
  std::span<const std::pair<int, int>> disables_edges() const { return disables_edges_; }

 private:
  std::vector<NodeId> ids_;
  std::map<NodeId, int, std::less<>> lookup_;
  std::vector<char> is_action_;
  std::vector<int> parent_;
  std::vector<int> position_;
  std::vector<int> actions_;
  std::vector<std::vector<int>> descendant_actions_;
  std::vector<std::vector<int>> required_done_;
  std::vector<std::vector<ResourceUse>> limits_;
  std::vector<std::vector<ResourceUse>> consumes_;
  std::vector<std::vector<ResourceUse>> produces_;
  std::vector<ResourceId> resource_ids_;
  std::map<ResourceId, int, std::less<>> resource_lookup_;
  std::vector<int> enables_rank_;
  std::vector<std::pair<int, int>> enables_edges_;
  std::vector<std::pair<int, int>> disables_edges_;
};

// The resource check used by both executable_actions and the scheduler.
bool resource_sufficient(const Resource& res, double amount);

}  // namespace wallcoord
