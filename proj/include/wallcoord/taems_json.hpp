#pragma once

#include <string>

#include "json.hpp"
#include "wallcoord/taems.hpp"

namespace wallcoord {

// {"root", "nodes": [...], "edges": [...], "resources": [...]}
nlohmann::json tree_to_json(const TaemsTree& tree);
// Throws Error(ParseError) on malformed input or duplicate ids.
TaemsTree tree_from_json(const nlohmann::json& j);

Qaf parse_qaf(const std::string& s);
NodeKind parse_node_kind(const std::string& s);
RelationKind parse_relation_kind(const std::string& s);

}  // namespace wallcoord
