// Seeded deterministic discrete-event simulator: asynchronous reliable
// point-to-point channels with adversarially controllable delivery order,
// crash injection for servers and clients, workload generation and full
// trace capture. Logical time is the event sequence number.
#pragma once

#include "semu/machines.hpp"
#include "semu/trace.hpp"

namespace semu {

enum class DeliveryPolicy : std::uint8_t {
  random_order,
  skew_quorum,     // always deliver to the same N-f servers first
  delay_finalize,  // hold finalize-phase messages while pre-writes are pending
  starve_reader,   // hold read gets/responses while write traffic is pending
};

const char* to_string(DeliveryPolicy p);
DeliveryPolicy delivery_policy_from_string(const std::string& s);
std::vector<std::string> adversary_strategies();

struct CrashEvent {
  NodeId node;
  std::uint64_t at_event = 0;
};

struct Schedule {
  std::uint64_t seed = 1;
  DeliveryPolicy policy = DeliveryPolicy::random_order;
  bool fairness = true;
  // A pending message must be delivered within this many scheduler choices;
  // 0 selects the default bound 4 * N * (current pending count).
  std::uint64_t fairness_bound = 0;
  std::vector<CrashEvent> crash_plan;
};

struct Workload {
  int writers = 1;
  int readers = 1;
  int writes_per_writer = 1;
  int reads_per_reader = 1;
  // Negative: unrestricted. Otherwise at most `cap` writes may run at once
  // and at most `cap` writes may overlap any single read; new invocations
  // are gated until both hold. cap = nu - 1 enforces the liveness
  // precondition "fewer than nu writes concurrent with a read".
  int write_concurrency_cap = -1;
};

struct RunConfig {
  SystemParams params;
  Algorithm algorithm = Algorithm::alg1;
  ReadMode read_mode = ReadMode::abort_on_miss;
  Schedule schedule;
  Workload workload;
  std::uint64_t step_limit = 1'000'000;
  // Finalize sends only a marker to servers that already hold the replica;
  // disable to measure the naive all-coded finalize.
  bool finalize_markers = true;

  void validate() const;  // throws std::invalid_argument on inconsistency
};

// Executes the configuration; deterministic: identical inputs produce a
// byte-for-byte identical trace. Exceeding step_limit marks the trace
// truncated (safety checks still apply, liveness assertions become vacuous).
Trace run(const RunConfig& cfg);

// Indices into trace.events whose post-state is a steady-state point: no
// write is in progress at a live client and every storage-mutating message
// addressed to a then-live server has been delivered.
std::vector<std::size_t> steady_state_points(const Trace& trace);

}  // namespace semu
