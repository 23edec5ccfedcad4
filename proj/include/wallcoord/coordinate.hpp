#pragma once

// Decentralized coordination: agents as isolated logical processes that
// exchange messages over a simulated, deterministic bus.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "wallcoord/allocate.hpp"
#include "wallcoord/mission.hpp"
#include "wallcoord/schedule.hpp"

namespace wallcoord {

enum class MessageKind {
  AssessmentShare,
  RefereeClaim,
  AllocationScheme,
  Award,
  Drop,
  SyncRequest,
  SyncAck,
  StatusUpdate,
};

std::string_view to_string(MessageKind k);
MessageKind parse_message_kind(const std::string& s);  // throws Error(ParseError)

inline const AgentId kBroadcast = "*";

struct Message {
  MessageKind kind = MessageKind::StatusUpdate;
  AgentId from;
  AgentId to;  // kBroadcast for everyone
  nlohmann::json payload = nlohmann::json::object();
  std::uint64_t seq = 0;        // per sender, strictly increasing
  std::uint64_t timestamp = 0;  // logical delivery time
  bool dropped = false;
  bool operator==(const Message&) const = default;
};

using MessageTrace = std::vector<Message>;

nlohmann::json message_to_json(const Message& m);
Message message_from_json(const nlohmann::json& j);
std::string trace_to_ndjson(const MessageTrace& trace);
MessageTrace trace_from_ndjson(const std::string& text);  // throws Error(ParseError)

// Drop and delay rules applied by the bus. Occurrences are 1-based counts of
// messages of one kind in send order; drop_rate drops further messages with a
// generator seeded from `seed`.
struct FaultPolicy {
  std::map<MessageKind, std::set<int>> drop_occurrences;
  double drop_rate = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t delay = 0;
};

// Per-sender FIFO queues, flushed round by round. The order in which senders
// are served within a round is a shuffle keyed by the seed.
class Bus {
 public:
  explicit Bus(std::uint64_t seed) : rng_state_(seed) {}

  // Stamps seq and queues the message in the sender's outbox.
  void send(Message m);
  // Flushes every queued message. Returns the delivered ones in delivery
  // order; dropped messages are recorded in the trace but not returned.
  std::vector<Message> deliver_round();
  bool idle() const;
  std::uint64_t clock() const { return clock_; }
  const MessageTrace& trace() const { return trace_; }

 private:
  friend Bus inject_fault(Bus bus, FaultPolicy policy);
  bool should_drop(const Message& m);

  std::uint64_t rng_state_;
  std::uint64_t clock_ = 0;
  std::map<AgentId, std::uint64_t> next_seq_;
  std::map<AgentId, std::vector<Message>> outbox_;
  std::map<MessageKind, int> kind_count_;
  std::optional<FaultPolicy> policy_;
  std::uint64_t fault_rng_ = 0;
  MessageTrace trace_;
};

Bus inject_fault(Bus bus, FaultPolicy policy);

// Lexicographically smallest id. Throws Error(EmptySet).
AgentId elect_referee(const std::set<AgentId>& candidates);

struct CoordinationOptions {
  int max_retries = 3;   // per joint-action handshake
  int patience = 4;      // rounds to wait for expected messages before timing out
  std::optional<FaultPolicy> faults;
};

struct CoordinationResult {
  Schedule schedule;
  MessageTrace trace;
  AllocationScheme scheme;
  std::map<NodeId, AgentId> assignments;                  // work unit -> agent
  std::map<AgentId, std::map<NodeId, AgentId>> views;     // each agent's award view
};

// Runs the whole pipeline: assessment sharing, market scheme, referee
// decisions for simple and complex redundancy, local scheduling and joint
// action handshakes. Throws propagated planning errors or
// Error(CoordinationTimeout).
CoordinationResult run_coordination(const MissionSpec& spec, std::uint64_t seed, const CoordinationOptions& options = {});

// The same decisions computed in one place, without messages.
std::map<NodeId, AgentId> centralized_assignments(const MissionSpec& spec, const TaemsTree& tree);
Schedule centralized_plan(const MissionSpec& spec);

// Inputs shared by both paths.
AssessmentTable unit_assessments(const MissionSpec& spec, const TaemsTree& tree);
StepAssessments step_assessments(const MissionSpec& spec, const TaemsTree& tree);
std::vector<Precedence> unit_precedences(const TaemsTree& tree);

}  // namespace wallcoord
