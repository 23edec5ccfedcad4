#pragma once

// Reference planners and the optimality-gap study: exhaustive search over
// assignments and orders, a central iterated auction, a seeded mission
// generator, and gap statistics per criteria row.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "wallcoord/mission.hpp"
#include "wallcoord/schedule.hpp"

namespace wallcoord {

inline constexpr int kOracleMaxBricks = 6;
inline constexpr int kOracleMaxAgents = 3;

struct OptimalPlan {
  Schedule schedule;
  double value = 0.0;  // J*
  std::map<NodeId, AgentId> assignment;
  UnitOrder order;
};

// Throws Error(TooLarge) beyond the guard.
OptimalPlan exhaustive_optimal(const MissionSpec& spec, const Criteria& criteria);
// One enumeration scored under several criteria; result i belongs to criteria[i].
std::vector<OptimalPlan> exhaustive_optimal(const MissionSpec& spec, const std::vector<Criteria>& criteria);

// Throws Error(UnsupportedJointTask) for missions with jointly executed tasks.
Schedule auction_baseline(const MissionSpec& spec, const Criteria& criteria);

// Deterministic; n_agents = 1 gives a single UAV, otherwise one UGV and
// n_agents - 1 UAVs. Throws Error(InvalidSpec) when a size is below 1.
MissionSpec random_mission(std::uint64_t seed, int n_bricks, int n_agents);

inline constexpr int kCorpusBricks = 6;
inline constexpr int kCorpusAgents = 3;
// Seeds 1..count.
std::vector<MissionSpec> seeded_corpus(int count = 20, int n_bricks = kCorpusBricks, int n_agents = kCorpusAgents);

// 100 * (J* - J) / J*; absolute difference when |J*| is negligible.
double gap_percent(double optimum, double value);

struct GapReport {
  Criteria criteria;
  std::string method;
  double mean_gap = 0.0;
  double std_gap = 0.0;  // sample standard deviation, 0 for a single mission
  std::vector<double> gaps;
};

GapReport make_report(const Criteria& criteria, std::string method, std::vector<double> gaps);

enum class Method { Proposed, Auction };
std::string_view to_string(Method m);

// Schedule a method produces for a mission under the given criteria.
Schedule method_schedule(const MissionSpec& spec, const Criteria& criteria, Method method);

// The five criteria rows of the results table, in its order.
std::vector<Criteria> table_rows();

struct GapStudy {
  std::vector<Criteria> rows;
  std::vector<GapReport> proposed;  // one per row
  std::vector<GapReport> auction;
};

// Per-mission evaluations are independent. The parallel version spreads
// missions over OpenMP threads and aggregates in corpus order; the serial
// version is the reference it is tested against.
GapStudy gap_study(const std::vector<MissionSpec>& corpus, const std::vector<Criteria>& rows);
GapStudy gap_study_serial(const std::vector<MissionSpec>& corpus, const std::vector<Criteria>& rows);

GapReport gap_report(const std::vector<MissionSpec>& corpus, const Criteria& criteria, Method method);

std::string format_study(const GapStudy& study);
nlohmann::json study_to_json(const GapStudy& study);

}  // namespace wallcoord
