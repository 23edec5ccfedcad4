#pragma once

// Gantt renderings of a schedule: one lane per agent, one segment per action,
// colored by action type (GP blue, PU red, GW yellow, PD green).

#include <string>

#include "wallcoord/schedule.hpp"

namespace wallcoord {

std::string render_text(const Schedule& schedule, int width = 72);
std::string render_svg(const Schedule& schedule);

}  // namespace wallcoord
