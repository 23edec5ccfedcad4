#include "wallcoord/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "wallcoord/coordinate.hpp"
#include "wallcoord/error.hpp"

namespace wallcoord {

namespace {

std::vector<AgentId> working_agent_ids(const MissionSpec& spec) {
  std::vector<AgentId> out;
  for (const auto& a : spec.agents)
    if (a.kind != AgentKind::UAVx2) out.push_back(a.id);
  std::sort(out.begin(), out.end());
  return out;
}

void check_guard(const MissionSpec& spec) {
  const auto agents = working_agent_ids(spec);
  if (static_cast<int>(spec.bricks.size()) > kOracleMaxBricks || static_cast<int>(agents.size()) > kOracleMaxAgents)
    throw Error(ErrorCode::TooLarge, "exhaustive search is limited to " + std::to_string(kOracleMaxBricks) + " bricks and " +
                                         std::to_string(kOracleMaxAgents) + " agents");
}

// Walks every assignment of units to feasible agents (joint partners on
// distinct agents) and, per assignment, every combination of per-agent unit
// orders. Calls visit(agent_of_unit, order, schedule) for each non-deadlocked one.
template <typename Visit>
void enumerate_plans(const Scheduler& s, Visit&& visit) {
  const int n_units = static_cast<int>(s.units().size());
  const int n_agents = static_cast<int>(s.agents().size());
  std::vector<std::vector<int>> options(n_units);
  for (int u = 0; u < n_units; ++u)
    for (int a = 0; a < n_agents; ++a)
      if (s.feasible(a, u)) options[u].push_back(a);

  std::vector<int> agent_of(n_units, -1);
  std::vector<std::vector<int>> order(n_agents);

  auto orders = [&](auto&& self, int a) -> void {
    if (a == n_agents) {
      if (auto sched = s.try_run(agent_of, &order)) visit(agent_of, order, *sched);
      return;
    }
    auto& seq = order[a];
    seq.clear();
    for (int u = 0; u < n_units; ++u)
      if (agent_of[u] == a) seq.push_back(u);
    do {
      self(self, a + 1);
    } while (std::next_permutation(seq.begin(), seq.end()));
  };

  auto assign = [&](auto&& self, int u) -> void {
    if (u == n_units) {
      orders(orders, 0);
      return;
    }
    for (int a : options[u]) {
      bool clash = false;
      for (int p : s.partners(u))
        if (p < u && agent_of[p] == a) clash = true;
      if (clash) continue;
      agent_of[u] = a;
      self(self, u + 1);
    }
    agent_of[u] = -1;
  };
  assign(assign, 0);
}

}  // namespace

std::vector<OptimalPlan> exhaustive_optimal(const MissionSpec& spec, const std::vector<Criteria>& criteria) {
  check_guard(spec);
  for (const auto& c : criteria)
    if (!weights_valid(c.alpha, c.beta, c.gamma)) throw Error(ErrorCode::BadWeights, "weights must be non-negative and sum to 1");
  const TaemsTree tree = generate_tree(spec);
  const MissionAssessor assessor(spec);
  const Scheduler s(tree, working_agent_ids(spec), assessor);
  const ObjectiveReference ref = objective_reference(spec);

  std::vector<OptimalPlan> best(criteria.size());
  std::vector<char> found(criteria.size(), 0);
  enumerate_plans(s, [&](const std::vector<int>& agent_of, const std::vector<std::vector<int>>& order, const Schedule& sched) {
    for (std::size_t i = 0; i < criteria.size(); ++i) {
      double j = objective(sched, spec, criteria[i], ref);
      if (found[i] && !(j > best[i].value)) continue;
      found[i] = 1;
      OptimalPlan& p = best[i];
      p.value = j;
      p.schedule = sched;
      p.assignment.clear();
      p.order.clear();
      for (std::size_t u = 0; u < agent_of.size(); ++u)
        if (agent_of[u] >= 0) p.assignment[s.units()[u]] = s.agents()[agent_of[u]];
      for (std::size_t a = 0; a < order.size(); ++a)
        for (int u : order[a]) p.order[s.agents()[a]].push_back(s.units()[u]);
    }
  });
  if (!criteria.empty() && !found[0]) throw Error(ErrorCode::Deadlock, "no assignment yields a schedule");
  return best;
}

OptimalPlan exhaustive_optimal(const MissionSpec& spec, const Criteria& criteria) {
  return exhaustive_optimal(spec, std::vector<Criteria>{criteria}).front();
}

Schedule auction_baseline(const MissionSpec& spec, const Criteria& criteria) {
  if (!weights_valid(criteria.alpha, criteria.beta, criteria.gamma))
    throw Error(ErrorCode::BadWeights, "weights must be non-negative and sum to 1");
  const TaemsTree tree = generate_tree(spec);
  for (const auto& [id, node] : tree.nodes)
    if (node.local_qaf == Qaf::Max) throw Error(ErrorCode::UnsupportedJointTask, id + " needs joint execution");
  const MissionAssessor assessor(spec);
  const Scheduler s(tree, working_agent_ids(spec), assessor);
  const ObjectiveReference ref = objective_reference(spec);
  const int n_units = static_cast<int>(s.units().size());
  const int n_agents = static_cast<int>(s.agents().size());

  std::vector<std::vector<int>> preds(n_units);
  for (const auto& p : unit_precedences(tree)) {
    int before = s.unit_index(p.before), after = s.unit_index(p.after);
    if (before >= 0 && after >= 0 && before != after) preds[after].push_back(before);
  }

  std::vector<int> agent_of(n_units, -1);
  std::vector<std::vector<int>> order(n_agents);
  Schedule current;
  for (int round = 0; round < n_units; ++round) {
    int best_u = -1, best_a = -1;
    double best_j = 0.0;
    std::optional<Schedule> best_schedule;
    for (int u = 0; u < n_units; ++u) {
      if (agent_of[u] >= 0) continue;
      if (std::any_of(preds[u].begin(), preds[u].end(), [&](int p) { return agent_of[p] < 0; })) continue;
      for (int a = 0; a < n_agents; ++a) {
        if (!s.feasible(a, u)) continue;
        agent_of[u] = a;
        order[a].push_back(u);
        auto sched = s.try_run(agent_of, &order);
        order[a].pop_back();
        agent_of[u] = -1;
        if (!sched) continue;
        double j = objective(*sched, spec, criteria, ref);
        if (best_u < 0 || j > best_j) {
          best_u = u;
          best_a = a;
          best_j = j;
          best_schedule = std::move(sched);
        }
      }
    }
    if (best_u < 0) throw Error(ErrorCode::InfeasibleTask, "no agent can take any remaining task");
    agent_of[best_u] = best_a;
    order[best_a].push_back(best_u);
    current = std::move(*best_schedule);
  }
  return current;
}

// -- generator -------------------------------------------------------------------

MissionSpec random_mission(std::uint64_t seed, int n_bricks, int n_agents) {
  if (n_bricks < 1 || n_agents < 1) throw Error(ErrorCode::InvalidSpec, "a mission needs at least one brick and one agent");
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](int n) { return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng)); };

  MissionSpec spec;
  const Point2 staging{uniform(-2.0, 2.0), uniform(-4.0, -2.0)};

  const double uav_rate = uniform(1.0, 1.5);
  for (int k = 0; k < n_agents; ++k) {
    AgentSpec a;
    a.start_position = staging;
    if (n_agents > 1 && k == 0) continue;  // slot 0 is the UGV, added below
    a.kind = AgentKind::UAV;
    a.id = "uav" + std::to_string(n_agents > 1 ? k : k + 1);
    a.speed = uniform(1.0, 3.0);
    a.cost_rate = uav_rate;
    spec.agents.push_back(a);
  }
  if (n_agents > 1) {
    AgentSpec g;
    g.id = "ugv1";
    g.kind = AgentKind::UGV;
    g.start_position = staging;
    g.speed = uniform(0.3, 1.0);
    g.cost_rate = uav_rate / 5.0;
    g.reach_height = 1.0;
    spec.agents.insert(spec.agents.begin(), g);
  }

  // Piles, one per color, spread in front of the wall.
  const Color colors[] = {Color::Red, Color::Green, Color::Blue};
  Point2 piles[3];
  for (auto& p : piles) p = {uniform(-8.0, 8.0), uniform(3.0, 9.0)};

  // Layers shrink upward; brick i of layer k rests on bricks i and i+1 below.
  std::vector<int> layer_sizes;
  int remaining = n_bricks;
  int width = (n_bricks + 1) / 2;
  while (remaining > 0) {
    int here = std::min(width, remaining);
    layer_sizes.push_back(here);
    remaining -= here;
    width = std::max(1, here - 1);
  }
  const double lengths[] = {0.3, 0.6, 1.2, 1.8};
  std::vector<std::vector<Brick*>> layers;
  spec.bricks.reserve(n_bricks);
  for (std::size_t k = 0; k < layer_sizes.size(); ++k) {
    layers.emplace_back();
    double cursor = 0.0;
    for (int i = 0; i < layer_sizes[k]; ++i) {
      Brick b;
      b.id = "B" + std::to_string(k + 1) + "." + std::to_string(i + 1);
      b.color = colors[pick(3)];
      b.length = lengths[pick(4)];
      b.width = 0.2;
      b.height = 0.2;
      b.layer = static_cast<int>(k);
      double x;
      if (k == 0) {
        x = cursor + b.length / 2.0;
        cursor += b.length;
      } else {
        const auto& below = layers[k - 1];
        b.supports.push_back(below[i]->id);
        x = below[i]->wall_pose.x;
        if (i + 1 < static_cast<int>(below.size())) {
          b.supports.push_back(below[i + 1]->id);
          x = (below[i]->wall_pose.x + below[i + 1]->wall_pose.x) / 2.0;
        }
      }
      b.wall_pose = {x, 0.0, 0.2 * static_cast<double>(k), 0.0};
      spec.bricks.push_back(b);
      layers.back().push_back(&spec.bricks.back());
    }
  }
  bool ground_color = std::any_of(spec.bricks.begin(), spec.bricks.end(), [](const Brick& b) { return b.color != Color::Blue; });
  if (!ground_color) spec.bricks.front().color = Color::Red;
  for (auto& b : spec.bricks) {
    const Point2 pile = piles[static_cast<int>(b.color)];
    b.pile_position = {pile.x + uniform(-0.5, 0.5), pile.y + uniform(-0.5, 0.5)};
  }
  return spec;
}

std::vector<MissionSpec> seeded_corpus(int count, int n_bricks, int n_agents) {
  std::vector<MissionSpec> out;
  for (int seed = 1; seed <= count; ++seed) out.push_back(random_mission(static_cast<std::uint64_t>(seed), n_bricks, n_agents));
  return out;
}

// -- gap statistics --------------------------------------------------------------

double gap_percent(double optimum, double value) {
  if (std::abs(optimum) < 1e-12) return 100.0 * (optimum - value);
  return 100.0 * (optimum - value) / std::abs(optimum);
}

GapReport make_report(const Criteria& criteria, std::string method, std::vector<double> gaps) {
  GapReport r{criteria, std::move(method), 0.0, 0.0, std::move(gaps)};
  if (r.gaps.empty()) return r;
  double sum = 0.0;
  for (double g : r.gaps) sum += g;
  r.mean_gap = sum / static_cast<double>(r.gaps.size());
  if (r.gaps.size() > 1) {
    double sq = 0.0;
    for (double g : r.gaps) sq += (g - r.mean_gap) * (g - r.mean_gap);
    r.std_gap = std::sqrt(sq / static_cast<double>(r.gaps.size() - 1));
  }
  return r;
}

std::string_view to_string(Method m) { return m == Method::Proposed ? "proposed" : "auction"; }

Schedule method_schedule(const MissionSpec& spec, const Criteria& criteria, Method method) {
  if (method == Method::Auction) return auction_baseline(spec, criteria);
  MissionSpec copy = spec;
  copy.criteria = criteria;
  return centralized_plan(copy);
}

std::vector<Criteria> table_rows() {
  const double delta = Criteria{}.delta;
  return {{0.5, 0.35, 0.15, delta}, {0.35, 0.15, 0.5, delta}, {1.0, 0.0, 0.0, delta}, {0.0, 1.0, 0.0, delta},
          {0.0, 0.0, 1.0, delta}};
}

namespace {

struct MissionGaps {
  std::vector<double> proposed;
  std::vector<double> auction;
};

MissionGaps evaluate_mission(const MissionSpec& spec, const std::vector<Criteria>& rows) {
  const auto optimal = exhaustive_optimal(spec, rows);
  const ObjectiveReference ref = objective_reference(spec);
  MissionGaps g;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    g.proposed.push_back(gap_percent(optimal[i].value, objective(method_schedule(spec, rows[i], Method::Proposed), spec, rows[i], ref)));
    g.auction.push_back(gap_percent(optimal[i].value, objective(method_schedule(spec, rows[i], Method::Auction), spec, rows[i], ref)));
  }
  return g;
}

GapStudy aggregate(const std::vector<MissionGaps>& per_mission, const std::vector<Criteria>& rows) {
  GapStudy study;
  study.rows = rows;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<double> p, a;
    for (const auto& m : per_mission) {
      p.push_back(m.proposed[i]);
      a.push_back(m.auction[i]);
    }
    study.proposed.push_back(make_report(rows[i], "proposed", std::move(p)));
    study.auction.push_back(make_report(rows[i], "auction", std::move(a)));
  }
  return study;
}

void check_corpus(const std::vector<MissionSpec>& corpus) {
  if (corpus.empty()) throw Error(ErrorCode::TooLarge, "the corpus is empty");
  for (const auto& m : corpus) check_guard(m);
}

}  // namespace

GapStudy gap_study_serial(const std::vector<MissionSpec>& corpus, const std::vector<Criteria>& rows) {
  check_corpus(corpus);
  std::vector<MissionGaps> per_mission;
  for (const auto& m : corpus) per_mission.push_back(evaluate_mission(m, rows));
  return aggregate(per_mission, rows);
}

GapStudy gap_study(const std::vector<MissionSpec>& corpus, const std::vector<Criteria>& rows) {
  check_corpus(corpus);
  const int n = static_cast<int>(corpus.size());
  std::vector<MissionGaps> per_mission(n);
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    try {
      per_mission[i] = evaluate_mission(corpus[i], rows);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return aggregate(per_mission, rows);
}

GapReport gap_report(const std::vector<MissionSpec>& corpus, const Criteria& criteria, Method method) {
  check_corpus(corpus);
  std::vector<double> gaps;
  for (const auto& m : corpus) {
    double best = exhaustive_optimal(m, criteria).value;
    gaps.push_back(gap_percent(best, objective(method_schedule(m, criteria, method), m, criteria)));
  }
  return make_report(criteria, std::string(to_string(method)), std::move(gaps));
}

// -- output ------------------------------------------------------------------------

namespace {

std::string criteria_label(const Criteria& c) {
  std::ostringstream s;
  s << "alpha=" << c.alpha << ", beta=" << c.beta << ", gamma=" << c.gamma;
  return s.str();
}

std::string percent(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << v << " %";
  return s.str();
}

}  // namespace

std::string format_study(const GapStudy& study) {
  std::ostringstream out;
  out << std::left << std::setw(36) << "Criteria" << std::setw(4) << "" << std::right << std::setw(12) << "Proposed"
      << std::setw(12) << "Auction" << '\n';
  out << std::string(64, '-') << '\n';
  for (std::size_t i = 0; i < study.rows.size(); ++i) {
    out << std::left << std::setw(36) << criteria_label(study.rows[i]) << std::setw(4) << "mu" << std::right
        << std::setw(12) << percent(study.proposed[i].mean_gap) << std::setw(12) << percent(study.auction[i].mean_gap)
        << '\n';
    out << std::left << std::setw(36) << "" << std::setw(4) << "sd" << std::right << std::setw(12)
        << percent(study.proposed[i].std_gap) << std::setw(12) << percent(study.auction[i].std_gap) << '\n';
    out << std::string(64, '-') << '\n';
  }
  return out.str();
}

nlohmann::json study_to_json(const GapStudy& study) {
  auto report = [](const GapReport& r) {
    return nlohmann::json{{"mean_gap", r.mean_gap}, {"std_gap", r.std_gap}, {"gaps", r.gaps}};
  };
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < study.rows.size(); ++i) {
    const Criteria& c = study.rows[i];
    rows.push_back({{"criteria", {{"alpha", c.alpha}, {"beta", c.beta}, {"gamma", c.gamma}, {"delta", c.delta}}},
                    {"proposed", report(study.proposed[i])},
                    {"auction", report(study.auction[i])}});
  }
  return {{"rows", rows}};
}

}  // namespace wallcoord
