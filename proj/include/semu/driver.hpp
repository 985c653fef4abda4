// Glue shared by the command-line tool and the test suites: execute a
// scenario with its enabled checks, sweep seeded fuzz grids, and persist
// artifacts (trace, cost report, verdicts).
#pragma once

#include "semu/checker.hpp"
#include "semu/metrics.hpp"
#include "semu/scenario.hpp"

namespace semu {

struct NamedVerdict {
  std::string check;
  Verdict verdict;
};

struct RunArtifacts {
  Trace trace;
  CostReport cost;
  std::vector<NamedVerdict> verdicts;
  bool pass = true;
};

// Runs the scenario and evaluates its enabled checks.
RunArtifacts run_scenario(const Scenario& sc);

// The full check bundle on an existing trace (used by `check <trace>`):
// tag atomicity, brute-force cross-check on small histories, server
// monotonicity, reliable channels, persistence when applicable.
std::vector<NamedVerdict> check_trace(const Trace& trace, bool with_brute_force = true);

// Liveness assertions for fair runs: every invoked write (and, in FW mode or
// under a concurrency cap below nu, every invoked read) at a non-crashed
// client completed; vacuous on truncated traces.
std::vector<NamedVerdict> liveness_checks(const Trace& trace);

// Cost assertions: worst-case storage within (or exactly at) the closed
// form, steady-state and write communication exact, read communication
// bounded.
std::vector<NamedVerdict> cost_checks(const Trace& trace, bool worst_exact);

// Writes <name>.trace, <name>.cost.txt and <name>.verdicts.txt under dir.
void write_artifacts(const RunArtifacts& art, const std::string& dir, const std::string& name);

// Resolves the output directory: explicit flag value, else $SEMU_OUT, else
// "semu-out".
std::string output_dir(const std::string& flag_value);

struct FuzzSpec {
  std::vector<Algorithm> algorithms;
  std::vector<DeliveryPolicy> adversaries;
  GridPoint grid{7, 1, 2};
  ReadMode read_mode = ReadMode::abort_on_miss;
  int seeds = 100;
  std::uint64_t seed_base = 1;
  bool server_crashes = true;
  bool client_crashes = false;
  int value_size_bits = 32;
  // -2: derive nu-1 from the grid (enforces the read-liveness precondition);
  // -1: uncapped; >= 0: explicit cap.
  int concurrency_cap = -1;
  Workload workload{1, 2, 2, 2, -1};  // cap field overridden per above
  bool check_liveness = false;        // assert completion of writes (and reads)
  bool persist_failures = true;
  std::string out_dir;  // where failing traces are written
};

struct FuzzSummary {
  int runs = 0;
  int violations = 0;
  int aborts = 0;
  int incomplete_reads = 0;
  int completed_ops = 0;
  int max_fw_iterations = 0;
  int persistence_scans = 0;  // runs where the persistence invariant applied
  std::vector<std::string> failures;  // human-readable, one per failing run
};

// Deterministic seeded sweep; crash plans derive from each run's seed.
FuzzSummary fuzz(const FuzzSpec& spec);

// The run configuration the fuzzer uses for one (algorithm, adversary, seed)
// cell, exposed so single failing runs can be replayed exactly.
RunConfig fuzz_run_config(const FuzzSpec& spec, Algorithm alg, DeliveryPolicy policy,
                          std::uint64_t seed);

}  // namespace semu
