// Command-line entry point: plan, coordinate, compare, gen, render, validate.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "wallcoord/coordinate.hpp"
#include "wallcoord/error.hpp"
#include "wallcoord/mission_json.hpp"
#include "wallcoord/oracle.hpp"
#include "wallcoord/render.hpp"
#include "wallcoord/taems_json.hpp"

namespace fs = std::filesystem;
using namespace wallcoord;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kParse = 2, kBadValue = 3, kPlanning = 4, kGuard = 5 };

struct Failure {
  int code;
  std::string message;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kParse, "cannot open '" + path + "'"};
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{kPlanning, "cannot write '" + path + "'"};
  out << text;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") std::cout << text;
  else write_file(path, text);
}

MissionSpec read_mission(const std::string& path) {
  try {
    return load_mission(path);
  } catch (const Error& e) {
    throw Failure{kParse, e.what()};
  }
}

// Weights first (exit 3), then the remaining structural checks (exit 2).
void check_mission(const MissionSpec& spec) {
  const Criteria& c = spec.criteria;
  if (!weights_valid(c.alpha, c.beta, c.gamma))
    throw Failure{kBadValue, "weights must be non-negative and sum to 1"};
  if (!delta_valid(c.delta)) throw Failure{kBadValue, "delta must lie in [0.5, 1)"};
  auto problems = validate_spec(spec);
  if (!problems.empty()) throw Failure{kParse, problems.front()};
}

struct WeightFlags {
  std::optional<double> alpha, beta, gamma, delta;

  void add(CLI::App* cmd) {
    cmd->add_option("--alpha", alpha, "quality weight");
    cmd->add_option("--beta", beta, "duration weight");
    cmd->add_option("--gamma", gamma, "cost weight");
    cmd->add_option("--delta", delta, "rating vs. allocation-scheme balance");
  }

  void apply(Criteria& c) const {
    if (alpha) c.alpha = *alpha;
    if (beta) c.beta = *beta;
    if (gamma) c.gamma = *gamma;
    if (delta) c.delta = *delta;
  }
};

std::string summary(const MissionSpec& spec, const Schedule& schedule) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  out << "makespan " << schedule.makespan << " s\n";
  out << "cost " << schedule.total_cost << "\n";
  out << "quality " << schedule.total_quality << "\n";
  auto counts = schedule.unit_counts();
  std::vector<AgentId> ids;
  for (const auto& a : spec.agents)
    if (a.kind != AgentKind::UAVx2) ids.push_back(a.id);
  std::sort(ids.begin(), ids.end());
  for (const auto& id : ids) out << "tasks " << id << " " << (counts.contains(id) ? counts.at(id) : 0) << "\n";
  return out.str();
}

int run_plan(const std::string& mission_path, const WeightFlags& weights, std::uint64_t seed, const std::string& out_path,
             const std::string& trace_path) {
  MissionSpec spec = read_mission(mission_path);
  weights.apply(spec.criteria);
  check_mission(spec);
  CoordinationResult result;
  try {
    result = run_coordination(spec, seed);
  } catch (const Error& e) {
    throw Failure{kPlanning, e.what()};
  }
  if (!out_path.empty()) write_file(out_path, schedule_to_json(result.schedule).dump(2) + "\n");
  if (!trace_path.empty()) write_file(trace_path, trace_to_ndjson(result.trace));
  std::cout << summary(spec, result.schedule);
  return kOk;
}

std::string describe(const Message& m) {
  std::ostringstream s;
  s << "t=" << m.timestamp << " " << m.from << " -> " << m.to << " " << to_string(m.kind) << " #" << m.seq;
  if (m.dropped) s << " (dropped)";
  s << " " << m.payload.dump();
  return s.str();
}

int run_coordinate(const std::string& mission_path, const std::string& replay_path, const WeightFlags& weights,
                   std::uint64_t seed, const std::string& trace_path) {
  if (!replay_path.empty()) {
    MessageTrace trace;
    try {
      trace = trace_from_ndjson(read_file(replay_path));
    } catch (const Error& e) {
      throw Failure{kParse, e.what()};
    }
    for (const auto& m : trace) std::cout << describe(m) << "\n";
    return kOk;
  }
  if (mission_path.empty()) throw Failure{kParse, "coordinate needs a mission file or --replay"};
  MissionSpec spec = read_mission(mission_path);
  weights.apply(spec.criteria);
  check_mission(spec);
  CoordinationResult result;
  try {
    result = run_coordination(spec, seed);
  } catch (const Error& e) {
    throw Failure{kPlanning, e.what()};
  }
  const std::string ndjson = trace_to_ndjson(result.trace);
  if (trace_path.empty()) std::cout << ndjson;
  else write_file(trace_path, ndjson);
  return kOk;
}

std::vector<Criteria> parse_criteria_set(const std::string& text) {
  if (text.empty() || text == "table") return table_rows();
  std::vector<Criteria> rows;
  std::stringstream all(text);
  std::string row;
  while (std::getline(all, row, ';')) {
    Criteria c;
    char comma1 = 0, comma2 = 0;
    std::istringstream in(row);
    if (!(in >> c.alpha >> comma1 >> c.beta >> comma2 >> c.gamma) || comma1 != ',' || comma2 != ',')
      throw Failure{kParse, "criteria rows look like alpha,beta,gamma separated by ';'"};
    if (!weights_valid(c.alpha, c.beta, c.gamma)) throw Failure{kBadValue, "criteria row '" + row + "' does not sum to 1"};
    rows.push_back(c);
  }
  return rows;
}

int run_compare(const std::string& dir, const std::string& criteria_set, const std::string& out_path) {
  auto rows = parse_criteria_set(criteria_set);
  std::vector<std::string> files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path().string());
  if (ec) throw Failure{kParse, "cannot read directory '" + dir + "'"};
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Failure{kGuard, "corpus '" + dir + "' holds no missions"};
  std::vector<MissionSpec> corpus;
  for (const auto& f : files) {
    corpus.push_back(read_mission(f));
    auto problems = validate_spec(corpus.back());
    if (!problems.empty()) throw Failure{kParse, f + ": " + problems.front()};
  }
  GapStudy study;
  try {
    study = gap_study(corpus, rows);
  } catch (const Error& e) {
    throw Failure{e.code() == ErrorCode::TooLarge ? kGuard : kPlanning, e.what()};
  }
  std::cout << format_study(study);
  if (!out_path.empty()) write_file(out_path, study_to_json(study).dump(2) + "\n");
  return kOk;
}

int run_gen(std::uint64_t seed, int bricks, int agents, const std::string& out_path) {
  if (bricks < 1 || agents < 1) throw Failure{kBadValue, "--bricks and --agents must be at least 1"};
  emit(out_path, mission_to_json(random_mission(seed, bricks, agents)).dump(2) + "\n");
  return kOk;
}

int run_render(const std::string& schedule_path, const std::string& format, const std::string& out_path) {
  Schedule schedule;
  try {
    schedule = schedule_from_json(nlohmann::json::parse(read_file(schedule_path)));
  } catch (const nlohmann::json::exception& e) {
    throw Failure{kParse, e.what()};
  } catch (const Error& e) {
    throw Failure{kParse, e.what()};
  }
  emit(out_path, format == "svg" ? render_svg(schedule) : render_text(schedule));
  return kOk;
}

// Accepts a mission file, or a tree file (an object with "root" and "nodes").
int run_validate(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Failure{kParse, e.what()};
  }
  std::vector<std::string> problems;
  try {
    if (j.contains("nodes") && j.contains("root")) {
      for (const auto& v : validate_tree(tree_from_json(j)))
        problems.push_back(std::string(to_string(v.rule)) + " " + v.subject + ": " + v.detail);
    } else {
      MissionSpec spec = mission_from_json(j);
      problems = validate_spec(spec);
      if (!weights_valid(spec.criteria.alpha, spec.criteria.beta, spec.criteria.gamma))
        problems.push_back("criteria weights must be non-negative and sum to 1");
      if (!delta_valid(spec.criteria.delta)) problems.push_back("delta must lie in [0.5, 1)");
      if (problems.empty()) {
        try {
          for (const auto& v : validate_tree(generate_tree(spec)))
            problems.push_back(std::string(to_string(v.rule)) + " " + v.subject + ": " + v.detail);
        } catch (const Error& e) {
          problems.push_back(e.what());
        }
      }
    }
  } catch (const Error& e) {
    throw Failure{kParse, e.what()};
  }
  for (const auto& p : problems) std::cout << p << "\n";
  if (!problems.empty()) return kInvalid;
  std::cout << "valid\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mission planning and coordination for heterogeneous wall-building robot teams"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string mission, out, trace, replay, corpus, criteria_set = "table", schedule_file, format = "text";
  int bricks = 0, agents = 0;
  WeightFlags weights;

  auto* plan = app.add_subcommand("plan", "allocate and schedule a mission");
  plan->add_option("mission", mission, "mission JSON file")->required();
  weights.add(plan);
  plan->add_option("--seed", seed, "bus seed");
  plan->add_option("--out", out, "schedule JSON output");
  plan->add_option("--trace", trace, "message trace output (NDJSON)");

  auto* coord = app.add_subcommand("coordinate", "run the message protocol and emit its trace, or replay one");
  coord->add_option("mission", mission, "mission JSON file");
  coord->add_option("--replay", replay, "print a recorded NDJSON trace");
  weights.add(coord);
  coord->add_option("--seed", seed, "bus seed");
  coord->add_option("--out", trace, "trace output (NDJSON); stdout when omitted");

  auto* compare = app.add_subcommand("compare", "optimality gaps of the method and the auction baseline");
  compare->add_option("corpus", corpus, "directory of mission JSON files")->required();
  compare->add_option("--criteria-set", criteria_set, "'table' or rows 'a,b,g;a,b,g'");
  compare->add_option("--out", out, "gap report JSON output");

  auto* gen = app.add_subcommand("gen", "generate a seeded random mission");
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--bricks", bricks, "number of bricks")->required();
  gen->add_option("--agents", agents, "number of agents")->required();
  gen->add_option("--out", out, "mission JSON output; stdout when omitted");

  auto* render = app.add_subcommand("render", "draw a schedule as a Gantt chart");
  render->add_option("schedule", schedule_file, "schedule JSON file")->required();
  render->add_option("--format", format, "svg or text")->check(CLI::IsMember({"svg", "text"}));
  render->add_option("--out", out, "output file; stdout when omitted");

  auto* validate = app.add_subcommand("validate", "check a mission or tree file");
  validate->add_option("file", mission, "mission or tree JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }

  try {
    if (*plan) return run_plan(mission, weights, seed, out, trace);
    if (*coord) return run_coordinate(mission, replay, weights, seed, trace);
    if (*compare) return run_compare(corpus, criteria_set, out);
    if (*gen) return run_gen(seed, bricks, agents, out);
    if (*render) return run_render(schedule_file, format, out);
    if (*validate) return run_validate(mission);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPlanning;
  }
  return kOk;
}
