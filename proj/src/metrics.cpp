#include "semu/metrics.hpp"

#include <map>
#include <set>
#include <sstream>

#include "semu/simulator.hpp"

namespace semu {

std::string units_str(const Units& u) {
  if (u.denominator() == 1) return std::to_string(u.numerator());
  return std::to_string(u.numerator()) + "/" + std::to_string(u.denominator());
}

std::string units_str(const std::optional<Units>& u) {
  return u ? units_str(*u) : std::string("unbounded");
}

StorageCost measure_storage(const Trace& trace) {
  const TraceHeader& h = trace.header;
  const std::int64_t vbytes = h.value_bytes;
  std::vector<std::int64_t> bytes(static_cast<std::size_t>(h.n) + 1, vbytes / h.k);
  std::int64_t total = static_cast<std::int64_t>(h.n) * (vbytes / h.k);

  std::vector<std::int64_t> per_event_total;
  per_event_total.reserve(trace.events.size());
  std::int64_t worst = total;  // the initial point counts
  for (const TraceEvent& e : trace.events) {
    if (e.kind == EventKind::deliver && e.stored && e.node.is_server()) {
      auto& b = bytes[static_cast<std::size_t>(e.node.index)];
      total += static_cast<std::int64_t>(e.stored->bytes) - b;
      b = e.stored->bytes;
    }
    per_event_total.push_back(total);
    worst = std::max(worst, total);
  }

  StorageCost out;
  out.worst_case = Units(worst, vbytes);
  std::optional<std::int64_t> steady;
  for (std::size_t i : steady_state_points(trace)) {
    std::int64_t s = per_event_total[i];
    if (!steady) {
      steady = s;
    } else if (*steady != s) {
      out.steady_uniform = false;
      *steady = std::max(*steady, s);
    }
  }
  if (steady) out.steady_state = Units(*steady, vbytes);
  return out;
}

CommCost measure_comm(const Trace& trace) {
  const std::int64_t vbytes = trace.header.value_bytes;
  std::map<std::uint64_t, std::int64_t> sent_bytes;  // op token -> payload bytes
  std::map<std::uint64_t, OpKind> kind;
  std::set<std::uint64_t> completed;
  for (const TraceEvent& e : trace.events) {
    switch (e.kind) {
      case EventKind::invoke:
        kind[e.op] = e.op_kind;
        break;
      case EventKind::respond:
        completed.insert(e.op);
        break;
      case EventKind::send:
        if (e.msg && e.msg->has_payload) sent_bytes[e.op] += e.msg->payload_bytes;
        break;
      default:
        break;
    }
  }
  CommCost out;
  for (std::uint64_t op : completed) {
    Units u(sent_bytes.count(op) ? sent_bytes[op] : 0, vbytes);
    if (kind[op] == OpKind::write)
      out.write_max = std::max(out.write_max, u);
    else
      out.read_max = std::max(out.read_max, u);
  }
  return out;
}

FormulaCosts expected_costs(const SystemParams& params, Algorithm alg) {
  const std::int64_t n = params.n_servers;
  const std::int64_t f = params.max_failures;
  const std::int64_t k = params.k;
  FormulaCosts c;
  switch (alg) {
    case Algorithm::alg1:
    case Algorithm::alg2a:
      c.worst = Units(n, k);
      c.steady = Units(n, k);
      c.write_comm = Units(n, k);
      c.read_comm = Units(2 * n, k);
      break;
    case Algorithm::alg2: {
      Units write = Units(k + 2 * f) + Units(n - k - 2 * f, k);
      c.worst = write;
      c.steady = Units(n, k);
      c.write_comm = write;
      c.read_comm = 2 * (Units(k + 2 * f) + Units(n - k - f, k));
      c.read_comm_alt = 2 * write;
      break;
    }
    case Algorithm::abd:
      c.worst = Units(2 * f + 1);
      c.steady = Units(2 * f + 1);
      c.write_comm = Units(2 * f + 1);
      c.read_comm = Units(2 * (2 * f + 1));
      break;
  }
  return c;
}

FormulaCosts casgc_costs(const SystemParams& params) {
  const std::int64_t n = params.n_servers;
  const std::int64_t f = params.max_failures;
  const std::int64_t nu = params.liveness;
  FormulaCosts c;
  c.worst = std::nullopt;  // unbounded
  c.steady = Units(nu * n, n - 2 * f);
  c.write_comm = Units(n, n - 2 * f);
  c.read_comm = Units(2 * n, n - 2 * f);
  return c;
}

FormulaCosts scck_costs(const SystemParams& params) {
  const std::int64_t n = params.n_servers;
  const std::int64_t f = params.max_failures;
  FormulaCosts c;
  c.worst = Units(2 * n);
  c.steady = Units(n, n - 2 * f);
  c.write_comm = Units(n);
  c.read_comm = Units(2 * n);
  return c;
}

Units abd_gap_direct(const SystemParams& params) {
  return Units(2 * params.max_failures + 1) - Units(params.n_servers, params.k);
}

Units abd_gap_factored(const SystemParams& params) {
  return Units(params.k - 1, params.k) * Units(2 * params.max_failures + 1 - params.liveness);
}

Units abd_gap_expanded(const SystemParams& params) {
  const std::int64_t n = params.n_servers;
  const std::int64_t f = params.max_failures;
  const std::int64_t nu = params.liveness;
  return Units((n - 2 * f - 1) * (2 * f + 1 - nu), n - 2 * f + nu - 1);
}

std::string CostReport::to_text() const {
  std::ostringstream out;
  out << "algorithm: " << algorithm << "\n";
  out << "storage worst-case: " << units_str(storage.worst_case)
      << " (expected " << units_str(expected.worst) << ")\n";
  out << "storage steady-state: "
      << (storage.steady_state ? units_str(*storage.steady_state) : std::string("n/a"))
      << " (expected " << units_str(expected.steady)
      << (storage.steady_uniform ? "" : ", NOT uniform across steady points") << ")\n";
  out << "write communication max: " << units_str(comm.write_max) << " (expected "
      << units_str(expected.write_comm) << ")\n";
  out << "read communication max: " << units_str(comm.read_max) << " (bound "
      << units_str(expected.read_comm);
  if (expected.read_comm_alt) {
    out << ", tighter bound " << units_str(*expected.read_comm_alt) << "; measurement bounded by "
        << (comm.read_max <= *expected.read_comm_alt ? "the tighter form" : "the table form only");
  }
  out << ")\n";
  return out.str();
}

CostReport make_cost_report(const Trace& trace) {
  CostReport r;
  r.algorithm = trace.header.algorithm;
  r.storage = measure_storage(trace);
  r.comm = measure_comm(trace);
  SystemParams p = SystemParams::make(trace.header.n, trace.header.f, trace.header.nu,
                                      trace.header.value_bytes * 8);
  r.expected = expected_costs(p, algorithm_from_string(trace.header.algorithm));
  return r;
}

namespace {

struct TableRow {
  std::string name;
  FormulaCosts costs;
};

std::vector<TableRow> table_rows(const SystemParams& p) {
  return {
      {"Alg 1, 2-A", expected_costs(p, Algorithm::alg1)},
      {"Alg 2", expected_costs(p, Algorithm::alg2)},
      {"ABD", expected_costs(SystemParams::make_abd(p.max_failures, p.requested_value_bits),
                             Algorithm::abd)},
      {"CASGC", casgc_costs(p)},
      {"SCCK", scck_costs(p)},
  };
}

}  // namespace

std::string format_cost_table(const std::vector<GridPoint>& grid,
                              const std::vector<CostReport>& measured, bool csv) {
  std::ostringstream out;
  if (csv)
    out << "n,f,nu,k,row,worst_storage,steady_storage,write_comm,read_comm\n";
  for (const GridPoint& g : grid) {
    SystemParams p = SystemParams::make(g.n, g.f, g.nu, 8);
    std::vector<TableRow> rows = table_rows(p);
    if (csv) {
      for (const TableRow& r : rows)
        out << p.n_servers << ',' << p.max_failures << ',' << p.liveness << ',' << p.k << ','
            << r.name << ',' << units_str(r.costs.worst) << ',' << units_str(r.costs.steady)
            << ',' << units_str(r.costs.write_comm) << ',' << units_str(r.costs.read_comm) << '\n';
      continue;
    }
    out << "N=" << p.n_servers << " f=" << p.max_failures << " nu=" << p.liveness
        << " k=" << p.k << "\n";
    out << "  row          worst      steady     write-comm read-comm\n";
    for (const TableRow& r : rows) {
      std::ostringstream w, s, wc, rc;
      w << units_str(r.costs.worst);
      s << units_str(r.costs.steady);
      wc << units_str(r.costs.write_comm);
      rc << units_str(r.costs.read_comm);
      out << "  " << r.name << std::string(r.name.size() < 13 ? 13 - r.name.size() : 1, ' ')
          << w.str() << std::string(w.str().size() < 11 ? 11 - w.str().size() : 1, ' ')
          << s.str() << std::string(s.str().size() < 11 ? 11 - s.str().size() : 1, ' ')
          << wc.str() << std::string(wc.str().size() < 11 ? 11 - wc.str().size() : 1, ' ')
          << rc.str() << "\n";
    }
  }
  if (!measured.empty()) {
    out << (csv ? "algorithm,worst_storage,steady_storage,write_comm,read_comm\n"
                : "measured:\n");
    for (const CostReport& r : measured) {
      if (csv) {
        out << r.algorithm << ',' << units_str(r.storage.worst_case) << ','
            << (r.storage.steady_state ? units_str(*r.storage.steady_state) : std::string("n/a"))
            << ',' << units_str(r.comm.write_max) << ',' << units_str(r.comm.read_max) << '\n';
      } else {
        out << "  " << r.algorithm << ": worst " << units_str(r.storage.worst_case) << ", steady "
            << (r.storage.steady_state ? units_str(*r.storage.steady_state) : std::string("n/a"))
            << ", write " << units_str(r.comm.write_max) << ", read "
            << units_str(r.comm.read_max) << "\n";
      }
    }
  }
  return out.str();
}

}  // namespace semu
