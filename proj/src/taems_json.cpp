#include "wallcoord/taems_json.hpp"

#include "wallcoord/error.hpp"

namespace wallcoord {

using nlohmann::json;

Qaf parse_qaf(const std::string& s) {
  for (Qaf q : {Qaf::SumAll, Qaf::Max, Qaf::SeqSumAll, Qaf::Sum})
    if (to_string(q) == s) return q;
  throw Error(ErrorCode::ParseError, "unknown qaf '" + s + "'");
}

NodeKind parse_node_kind(const std::string& s) {
  if (s == "Task") return NodeKind::Task;
  if (s == "Action") return NodeKind::Action;
  throw Error(ErrorCode::ParseError, "unknown node kind '" + s + "'");
}

RelationKind parse_relation_kind(const std::string& s) {
  for (RelationKind k : {RelationKind::Enables, RelationKind::Disables, RelationKind::Consumes,
                         RelationKind::Produces, RelationKind::Limits})
    if (to_string(k) == s) return k;
  throw Error(ErrorCode::ParseError, "unknown relation kind '" + s + "'");
}

json tree_to_json(const TaemsTree& tree) {
  json nodes = json::array();
  for (const auto& [key, n] : tree.nodes) {
    nodes.push_back({
        {"id", n.id},
        {"kind", to_string(n.kind)},
        {"children", n.children},
        {"qaf", to_string(n.qaf)},
        {"local_qaf", n.local_qaf ? json(to_string(*n.local_qaf)) : json(nullptr)},
        {"eligible_agent_kinds", n.eligible_agent_kinds},
    });
  }
  json edges = json::array();
  for (const auto& e : tree.interrelationships) {
    edges.push_back({{"kind", to_string(e.kind)}, {"source", e.source}, {"target", e.target}, {"amount", e.amount}});
  }
  json resources = json::array();
  for (const auto& [key, r] : tree.resources) {
    resources.push_back({{"id", r.id},
                         {"state", r.state},
                         {"lower", r.lower},
                         {"upper", r.upper},
                         {"owner_agent", r.owner_agent}});
  }
  return {{"root", tree.root}, {"nodes", nodes}, {"edges", edges}, {"resources", resources}};
}

TaemsTree tree_from_json(const json& j) {
  try {
    TaemsTree tree;
    tree.root = j.at("root").get<std::string>();
    for (const auto& jn : j.at("nodes")) {
      TaemsNode n;
      n.id = jn.at("id").get<std::string>();
      n.kind = parse_node_kind(jn.at("kind").get<std::string>());
      n.children = jn.value("children", std::vector<std::string>{});
      n.qaf = parse_qaf(jn.value("qaf", std::string("SumAll")));
      if (jn.contains("local_qaf") && !jn.at("local_qaf").is_null())
        n.local_qaf = parse_qaf(jn.at("local_qaf").get<std::string>());
      n.eligible_agent_kinds = jn.value("eligible_agent_kinds", std::set<std::string>{});
      if (!tree.nodes.emplace(n.id, n).second) throw Error(ErrorCode::ParseError, "duplicate node id '" + n.id + "'");
    }
    for (const auto& je : j.value("edges", json::array())) {
      Interrelationship e;
      e.kind = parse_relation_kind(je.at("kind").get<std::string>());
      e.source = je.at("source").get<std::string>();
      e.target = je.at("target").get<std::string>();
      e.amount = je.value("amount", 0.0);
      tree.interrelationships.push_back(std::move(e));
    }
    for (const auto& jr : j.value("resources", json::array())) {
      Resource r;
      r.id = jr.at("id").get<std::string>();
      r.state = jr.at("state").get<double>();
      r.lower = jr.at("lower").get<double>();
      r.upper = jr.at("upper").get<double>();
      r.owner_agent = jr.value("owner_agent", std::string());
      if (!tree.resources.emplace(r.id, r).second)
        throw Error(ErrorCode::ParseError, "duplicate resource id '" + r.id + "'");
    }
    return tree;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

}  // namespace wallcoord
