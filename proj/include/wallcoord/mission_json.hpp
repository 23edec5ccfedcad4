#pragma once

#include <string>

#include "json.hpp"
#include "wallcoord/mission.hpp"

namespace wallcoord {

nlohmann::json mission_to_json(const MissionSpec& spec);
// Throws Error(ParseError). Missing optional fields take the defaults.
MissionSpec mission_from_json(const nlohmann::json& j);

MissionSpec load_mission(const std::string& path);
void save_mission(const MissionSpec& spec, const std::string& path);

}  // namespace wallcoord
