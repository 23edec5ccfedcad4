#include "wallcoord/mission_json.hpp"

#include <cmath>
#include <fstream>

#include "wallcoord/error.hpp"

namespace wallcoord {

using nlohmann::json;

namespace {

json color_map(const std::map<Color, double>& m) {
  json j = json::object();
  for (const auto& [c, v] : m) j[std::string(to_string(c))] = v;
  return j;
}

std::map<Color, double> parse_color_map(const json& j) {
  std::map<Color, double> m;
  for (const auto& [k, v] : j.items()) m[parse_color(k)] = v.get<double>();
  return m;
}

}  // namespace

json mission_to_json(const MissionSpec& spec) {
  json bricks = json::array();
  for (const auto& b : spec.bricks) {
    bricks.push_back({{"id", b.id},
                      {"color", to_string(b.color)},
                      {"length", b.length},
                      {"width", b.width},
                      {"height", b.height},
                      {"pile_position", {b.pile_position.x, b.pile_position.y}},
                      {"wall_pose", {b.wall_pose.x, b.wall_pose.y, b.wall_pose.z, b.wall_pose.yaw}},
                      {"layer", b.layer},
                      {"supports", b.supports}});
  }
  json agents = json::array();
  for (const auto& a : spec.agents) {
    json ja = {{"id", a.id},
               {"kind", to_string(a.kind)},
               {"speed", a.speed},
               {"cost_rate", a.cost_rate},
               {"start_position", {a.start_position.x, a.start_position.y}},
               {"reach_height", std::isinf(a.reach_height) ? json(nullptr) : json(a.reach_height)}};
    if (a.member_ids) ja["member_ids"] = {a.member_ids->first, a.member_ids->second};
    agents.push_back(std::move(ja));
  }
  return {{"bricks", bricks},
          {"agents", agents},
          {"score_table",
           {{"base_points", color_map(spec.score_table.base_points)},
            {"uav_bonus", color_map(spec.score_table.uav_bonus)}}},
          {"criteria",
           {{"alpha", spec.criteria.alpha},
            {"beta", spec.criteria.beta},
            {"gamma", spec.criteria.gamma},
            {"delta", spec.criteria.delta}}},
          {"fixed_grab_s", spec.fixed_grab_s},
          {"fixed_release_s", spec.fixed_release_s}};
}

MissionSpec mission_from_json(const json& j) {
  try {
    MissionSpec spec;
    for (const auto& jb : j.at("bricks")) {
      Brick b;
      b.id = jb.at("id").get<std::string>();
      b.color = parse_color(jb.at("color").get<std::string>());
      b.length = jb.value("length", 0.3);
      b.width = jb.value("width", 0.2);
      b.height = jb.value("height", 0.2);
      const auto& pp = jb.at("pile_position");
      b.pile_position = {pp.at(0).get<double>(), pp.at(1).get<double>()};
      const auto& wp = jb.at("wall_pose");
      b.wall_pose = {wp.at(0).get<double>(), wp.at(1).get<double>(), wp.at(2).get<double>(),
                     wp.size() > 3 ? wp.at(3).get<double>() : 0.0};
      b.layer = jb.value("layer", 0);
      b.supports = jb.value("supports", std::vector<std::string>{});
      spec.bricks.push_back(std::move(b));
    }
    for (const auto& ja : j.at("agents")) {
      AgentSpec a;
      a.id = ja.at("id").get<std::string>();
      a.kind = parse_agent_kind(ja.at("kind").get<std::string>());
      a.speed = ja.at("speed").get<double>();
      a.cost_rate = ja.value("cost_rate", 1.0);
      if (ja.contains("start_position")) {
        const auto& sp = ja.at("start_position");
        a.start_position = {sp.at(0).get<double>(), sp.at(1).get<double>()};
      }
      if (ja.contains("reach_height") && !ja.at("reach_height").is_null())
        a.reach_height = ja.at("reach_height").get<double>();
      if (ja.contains("member_ids") && !ja.at("member_ids").is_null()) {
        const auto& m = ja.at("member_ids");
        a.member_ids = std::make_pair(m.at(0).get<std::string>(), m.at(1).get<std::string>());
      }
      spec.agents.push_back(std::move(a));
    }
    if (j.contains("score_table")) {
      const auto& st = j.at("score_table");
      if (st.contains("base_points")) spec.score_table.base_points = parse_color_map(st.at("base_points"));
      if (st.contains("uav_bonus")) spec.score_table.uav_bonus = parse_color_map(st.at("uav_bonus"));
    }
    if (j.contains("criteria")) {
      const auto& c = j.at("criteria");
      spec.criteria.alpha = c.value("alpha", spec.criteria.alpha);
      spec.criteria.beta = c.value("beta", spec.criteria.beta);
      spec.criteria.gamma = c.value("gamma", spec.criteria.gamma);
      spec.criteria.delta = c.value("delta", spec.criteria.delta);
    }
    spec.fixed_grab_s = j.value("fixed_grab_s", 5.0);
    spec.fixed_release_s = j.value("fixed_release_s", 5.0);
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

MissionSpec load_mission(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return mission_from_json(j);
}

void save_mission(const MissionSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write '" + path + "'");
  out << mission_to_json(spec).dump(2) << '\n';
}

}  // namespace wallcoord
