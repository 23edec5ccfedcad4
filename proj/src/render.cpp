#include "wallcoord/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>

namespace wallcoord {

namespace {

std::string fmt(double v, int decimals = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::optional<ActionType> type_of(const NodeId& action) {
  auto ref = parse_action_id(action);
  if (!ref) return std::nullopt;
  return ref->type;
}

char glyph(const NodeId& action) {
  switch (type_of(action).value_or(ActionType::GP)) {
    case ActionType::GP: return 'G';
    case ActionType::PU: return 'U';
    case ActionType::GW: return 'W';
    case ActionType::PD: return 'D';
  }
  return '?';
}

const char* fill(const NodeId& action) {
  auto t = type_of(action);
  if (!t) return "gray";
  switch (*t) {
    case ActionType::GP: return "blue";
    case ActionType::PU: return "red";
    case ActionType::GW: return "yellow";
    case ActionType::PD: return "green";
  }
  return "gray";
}

std::map<AgentId, std::vector<const ScheduledAction*>> lanes(const Schedule& s) {
  std::map<AgentId, std::vector<const ScheduledAction*>> out;
  for (const auto& e : s.entries) out[e.agent].push_back(&e);
  return out;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_text(const Schedule& schedule, int width) {
  const auto by_agent = lanes(schedule);
  std::size_t name_width = 5;
  for (const auto& [agent, list] : by_agent) name_width = std::max(name_width, agent.size());
  const double span = schedule.makespan > 0.0 ? schedule.makespan : 1.0;

  std::string out = "makespan " + fmt(schedule.makespan) + " s, cost " + fmt(schedule.total_cost) + ", quality " +
                    fmt(schedule.total_quality) + "\n";
  out += "legend G=GP U=PU W=GW D=PD\n";
  for (const auto& [agent, list] : by_agent) {
    std::string bar(width, '.');
    for (const auto* e : list) {
      int from = static_cast<int>(std::floor(e->start / span * width));
      int to = static_cast<int>(std::ceil(e->end / span * width));
      from = std::clamp(from, 0, width - 1);
      to = std::clamp(to, from + 1, width);
      for (int k = from; k < to; ++k) bar[k] = glyph(e->action);
    }
    out += agent + std::string(name_width - agent.size(), ' ') + " |" + bar + "|\n";
  }
  for (const auto& [agent, list] : by_agent)
    for (const auto* e : list)
      out += agent + std::string(name_width - agent.size(), ' ') + "  " + e->action + "  " + fmt(e->start) + " - " +
             fmt(e->end) + "\n";
  for (const auto& [from, to] : schedule.binding_enables) out += "binding " + from + " -> " + to + "\n";
  return out;
}

std::string render_svg(const Schedule& schedule) {
  const auto by_agent = lanes(schedule);
  constexpr double kLeft = 90.0, kPlot = 800.0, kLane = 32.0, kTop = 30.0, kBar = 22.0;
  const double span = schedule.makespan > 0.0 ? schedule.makespan : 1.0;
  const double height = kTop + kLane * static_cast<double>(std::max<std::size_t>(by_agent.size(), 1)) + 30.0;
  auto x_of = [&](double t) { return kLeft + t / span * kPlot; };

  std::map<AgentId, int> lane_of;
  for (const auto& [agent, list] : by_agent) lane_of.emplace(agent, static_cast<int>(lane_of.size()));

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kLeft + kPlot + 20.0, 0) + "\" height=\"" +
                    fmt(height, 0) + "\" font-family=\"monospace\" font-size=\"11\">\n";
  out += "<text x=\"" + fmt(kLeft, 0) + "\" y=\"18\">makespan " + fmt(schedule.makespan) + " s</text>\n";
  for (const auto& [agent, list] : by_agent) {
    const double y = kTop + kLane * lane_of.at(agent);
    out += "<g class=\"lane\" id=\"lane-" + escape(agent) + "\">\n";
    out += "<text x=\"4\" y=\"" + fmt(y + kBar * 0.7) + "\">" + escape(agent) + "</text>\n";
    for (const auto* e : list) {
      out += "<rect class=\"seg\" x=\"" + fmt(x_of(e->start)) + "\" y=\"" + fmt(y) + "\" width=\"" +
             fmt(x_of(e->end) - x_of(e->start)) + "\" height=\"" + fmt(kBar) + "\" fill=\"" + fill(e->action) +
             "\" stroke=\"black\" stroke-width=\"0.5\"><title>" + escape(e->action) + " " + fmt(e->start) + "-" +
             fmt(e->end) + "</title></rect>\n";
    }
    out += "</g>\n";
  }

  std::map<NodeId, const ScheduledAction*> by_action;
  for (const auto& e : schedule.entries) by_action[e.action] = &e;
  for (const auto& [from, to] : schedule.binding_enables) {
    auto s = by_action.find(from);
    auto t = by_action.find(to);
    if (s == by_action.end() || t == by_action.end()) continue;
    const double y1 = kTop + kLane * lane_of.at(s->second->agent) + kBar / 2.0;
    const double y2 = kTop + kLane * lane_of.at(t->second->agent) + kBar / 2.0;
    out += "<line class=\"enables\" x1=\"" + fmt(x_of(s->second->end)) + "\" y1=\"" + fmt(y1) + "\" x2=\"" +
           fmt(x_of(t->second->start)) + "\" y2=\"" + fmt(y2) + "\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace wallcoord
