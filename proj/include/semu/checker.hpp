// Trace validation: atomicity via the tag-based partial order, an
// independent brute-force linearizability search for small histories, and
// the structural invariants (server tag monotonicity, reliable channels,
// persistence of decodable data).
#pragma once

#include "semu/trace.hpp"

namespace semu {

struct OperationRecord {
  std::uint64_t token = 0;
  int client = 0;
  OpKind kind = OpKind::read;
  std::uint64_t invoke_seq = 0;
  std::optional<std::uint64_t> respond_seq;
  bool aborted = false;
  std::string value_hex;  // write: input value; read: returned value
  std::optional<Tag> tag;
};

struct History {
  std::vector<OperationRecord> ops;
  std::string default_value_hex;  // all zeros of the configured size
  int incomplete = 0;             // dropped before the atomicity check
};

History extract_history(const Trace& trace);

struct Verdict {
  bool pass = true;
  int property = 0;  // violated ordering property (1..3), 0 otherwise
  std::string detail;
  std::optional<std::pair<std::uint64_t, std::uint64_t>> witnesses;  // op tokens

  static Verdict ok() { return {}; }
  static Verdict fail(int property, std::string detail,
                      std::optional<std::pair<std::uint64_t, std::uint64_t>> w = std::nullopt) {
    Verdict v;
    v.pass = false;
    v.property = property;
    v.detail = std::move(detail);
    v.witnesses = w;
    return v;
  }
};

// The sufficient condition for atomicity under the tag order: (1) real-time
// precedence never contradicts the order, (2) writes are totally ordered
// against everything (distinct write tags), (3) every read returns the value
// of the unique write carrying its tag, or the default value for the initial
// tag. Incomplete operations are dropped first (their count is reported in
// History::incomplete).
Verdict check_tag_atomicity(const History& history);

// Independent oracle: searches all interleavings consistent with real-time
// order for a legal sequential register execution. Histories larger than
// max_ops are rejected.
Verdict brute_force_linearizable(const History& history, std::size_t max_ops = 10);

// Every server's stored tag is non-decreasing, and for a fixed tag the
// payload may go replica -> coded but never back.
Verdict check_server_monotonicity(const Trace& trace);

// Delivered messages are a sub-multiset of sent messages; nothing reaches a
// crashed node.
Verdict check_reliable_channels(const Trace& trace);

// Per-point persistence scans.
//  - alg2: the maximum tag among live servers is recoverable from live
//    servers at every point.
//  - alg1 / alg2a / abd: at every point with at most f crashed servers, every
//    set of N-f live servers holds a decodable tag at least as large as the
//    latest completed write's tag. Valid when at most nu distinct tags above
//    that write can coexist, i.e. alg1 with nu >= 2, abd always (k = 1), and
//    alg2a under a workload cap below nu; otherwise reports not-applicable.
struct PersistenceResult {
  bool applicable = false;
  Verdict verdict;
};
PersistenceResult check_persistence(const Trace& trace);

}  // namespace semu
