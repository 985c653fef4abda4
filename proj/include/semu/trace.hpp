// Simulator timeline: one record per event, line-oriented text serialization
// with a stable field order. The trace is the only input the checker and the
// cost metrics consume, so deliveries at servers also carry a snapshot of the
// server state after the message was applied.
#pragma once

#include <iosfwd>
#include <optional>

#include "semu/message.hpp"

namespace semu {

enum class EventKind : std::uint8_t { invoke, send, deliver, crash, respond, abort_read };
enum class OpKind : std::uint8_t { read, write };

const char* to_string(EventKind k);
const char* to_string(OpKind k);

// Projection of a Message kept in the trace: everything but the payload
// bytes themselves (their size is what the metrics need).
struct MsgMeta {
  MsgKind kind = MsgKind::get;
  NodeId from;
  NodeId to;
  Phase phase = Phase::none;
  std::uint32_t round = 0;
  bool has_tag = false;
  Tag tag;
  bool has_payload = false;
  PayloadKind payload = PayloadKind::coded;
  std::uint32_t payload_bytes = 0;

  static MsgMeta of(const Message& m);
  bool operator==(const MsgMeta&) const = default;
};

struct StoredMeta {
  Tag tag;
  PayloadKind kind = PayloadKind::coded;
  std::uint32_t bytes = 0;
  bool operator==(const StoredMeta&) const = default;
};

struct TraceEvent {
  std::uint64_t seq = 0;
  std::uint64_t time = 0;  // logical time; equals seq in this simulator
  EventKind kind = EventKind::invoke;
  NodeId node;             // invoker / sender / receiver / crashed node
  std::uint64_t op = 0;    // correlation token, 0 when not applicable
  OpKind op_kind = OpKind::read;
  std::string value_hex;             // invoke(write): input; respond(read): result
  std::optional<Tag> tag;            // respond
  std::optional<MsgMeta> msg;        // send / deliver
  std::optional<StoredMeta> stored;  // deliver at a server: state afterwards

  std::string line() const;
  static TraceEvent parse(const std::string& line);
  bool operator==(const TraceEvent&) const = default;
};

struct TraceHeader {
  std::string algorithm = "alg1";
  std::string read_mode = "abort";
  int n = 0;
  int f = 0;
  int nu = 1;
  int k = 1;
  int value_bytes = 0;
  int writers = 0;
  int readers = 0;
  int concurrency_cap = -1;
  std::uint64_t seed = 0;
  bool truncated = false;

  std::string line() const;
  static TraceHeader parse(const std::string& line);
  bool operator==(const TraceHeader&) const = default;
};

// Post-run statistics kept in memory only (derivable from the trace).
struct RunStats {
  int invoked_writes = 0;
  int completed_writes = 0;
  int invoked_reads = 0;
  int completed_reads = 0;
  int aborted_reads = 0;
  int crashed_servers = 0;
  int crashed_clients = 0;
  int max_concurrent_writes = 0;   // peak number of outstanding writes
  int max_read_overlap = 0;        // most writes concurrent with one read
  int aborted_read_overlap = 0;    // overlap of the read with the most
                                   // concurrent writes among aborted ones
  int fw_max_iterations = 0;       // largest FW read iteration count
};

struct Trace {
  TraceHeader header;
  std::vector<TraceEvent> events;
  RunStats stats;  // not serialized

  std::string to_text() const;
  void save(std::ostream& out) const;
  static Trace load(std::istream& in);
  static Trace load_file(const std::string& path);
  void save_file(const std::string& path) const;
};

}  // namespace semu
