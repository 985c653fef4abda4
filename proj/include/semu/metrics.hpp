// Storage and communication cost accounting in value units, as exact
// rationals (payload bytes over value bytes); tags, acks, markers and other
// metadata count zero. Also evaluates the closed-form cost expressions of
// every algorithm row (including the CASGC and SCCK comparison constants,
// which are formula evaluations only -- those algorithms are not
// implemented).
#pragma once

#include <boost/rational.hpp>

#include "semu/machines.hpp"
#include "semu/trace.hpp"

namespace semu {

using Units = boost::rational<std::int64_t>;

std::string units_str(const Units& u);
std::string units_str(const std::optional<Units>& u);  // "unbounded" when absent

struct StorageCost {
  Units worst_case{0};
  std::optional<Units> steady_state;  // absent when the trace has no steady point
  bool steady_uniform = true;         // equal at every steady point
};

struct CommCost {
  Units write_max{0};  // 0 when no completed write exists
  Units read_max{0};
};

// Folds the per-event server-state snapshots; storage counts all N servers
// (a crashed server keeps its last stored size).
StorageCost measure_storage(const Trace& trace);

// Per completed operation, the total value-bearing payload of the messages
// it sent (replica = 1 unit, coded symbol = 1/k); maxima per kind.
CommCost measure_comm(const Trace& trace);

struct FormulaCosts {
  std::optional<Units> worst;  // absent means unbounded
  Units steady{0};
  Units write_comm{0};
  Units read_comm{0};
  // For the multi-writer algorithm two closed forms of the read cost are in
  // circulation; read_comm is the tabulated 2(k+2f+(N-k-f)/k) and
  // read_comm_alt the derivation's 2(k+2f+(N-k-2f)/k). Measurements are
  // bounded by the alternative (tighter) form.
  std::optional<Units> read_comm_alt;
};

FormulaCosts expected_costs(const SystemParams& params, Algorithm alg);
// Rows of the comparison table beyond the implemented algorithms.
FormulaCosts casgc_costs(const SystemParams& params);
FormulaCosts scck_costs(const SystemParams& params);

// The storage gap to the replication baseline on 2f+1 servers:
// (2f+1) - N/k, in its three algebraically equal closed forms.
Units abd_gap_direct(const SystemParams& params);
Units abd_gap_factored(const SystemParams& params);  // (k-1)/k * (2f+1 - nu)
Units abd_gap_expanded(const SystemParams& params);  // (N-2f-1)(2f+1-nu)/(N-2f+nu-1)

struct CostReport {
  std::string algorithm;
  StorageCost storage;
  CommCost comm;
  FormulaCosts expected;
  std::string to_text() const;
};

CostReport make_cost_report(const Trace& trace);

// Comparison table in the standard layout (rows: Alg 1 / 2-A, Alg 2, ABD,
// CASGC, SCCK; columns: worst-case and steady-state storage, write and read
// communication), one block per grid point; text or CSV.
struct GridPoint {
  int n = 0;
  int f = 0;
  int nu = 1;
};
std::string format_cost_table(const std::vector<GridPoint>& grid,
                              const std::vector<CostReport>& measured, bool csv);

}  // namespace semu
