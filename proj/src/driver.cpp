#include "semu/driver.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace semu {

std::vector<NamedVerdict> check_trace(const Trace& trace, bool with_brute_force) {
  std::vector<NamedVerdict> out;
  History h = extract_history(trace);
  out.push_back({"tag-atomicity", check_tag_atomicity(h)});
  if (with_brute_force) {
    std::size_t complete = 0;
    for (const OperationRecord& r : h.ops)
      if (r.respond_seq) ++complete;
    if (complete <= 10) out.push_back({"brute-force-linearizability", brute_force_linearizable(h)});
  }
  out.push_back({"server-monotonicity", check_server_monotonicity(trace)});
  out.push_back({"reliable-channels", check_reliable_channels(trace)});
  PersistenceResult p = check_persistence(trace);
  if (p.applicable) out.push_back({"persistence", p.verdict});
  return out;
}

std::vector<NamedVerdict> liveness_checks(const Trace& trace) {
  std::vector<NamedVerdict> out;
  if (trace.header.truncated) {
    out.push_back({"liveness", Verdict::fail(0, "trace truncated at the step limit")});
    return out;
  }
  History h = extract_history(trace);
  std::set<int> crashed;
  for (const TraceEvent& e : trace.events)
    if (e.kind == EventKind::crash && !e.node.is_server()) crashed.insert(e.node.index);

  bool fw = trace.header.read_mode == "fw";
  bool capped = trace.header.concurrency_cap >= 0 &&
                trace.header.concurrency_cap < trace.header.nu;
  Verdict v = Verdict::ok();
  int aborts = 0;
  for (const OperationRecord& r : h.ops) {
    if (r.aborted) ++aborts;
    if (crashed.count(r.client)) continue;
    if (r.kind == OpKind::write && !r.respond_seq) {
      v = Verdict::fail(0, "write op " + std::to_string(r.token) +
                               " at live client c" + std::to_string(r.client) +
                               " never completed");
      break;
    }
    if (r.kind == OpKind::read && (fw || capped) && !r.respond_seq) {
      v = Verdict::fail(0, "read op " + std::to_string(r.token) + " at live client c" +
                               std::to_string(r.client) + " never completed");
      break;
    }
  }
  if (v.pass && capped && aborts > 0)
    v = Verdict::fail(0, "read aborts despite write concurrency below nu");
  out.push_back({"liveness", v});
  return out;
}

std::vector<NamedVerdict> cost_checks(const Trace& trace, bool worst_exact) {
  std::vector<NamedVerdict> out;
  CostReport r = make_cost_report(trace);
  Algorithm alg = algorithm_from_string(trace.header.algorithm);
  // Worst-case storage is structurally exact for the always-coded algorithms
  // and for the replication baseline.
  bool exact = worst_exact || alg != Algorithm::alg2;
  Verdict v = Verdict::ok();
  if (r.expected.worst) {
    if (exact && r.storage.worst_case != *r.expected.worst)
      v = Verdict::fail(0, "worst-case storage " + units_str(r.storage.worst_case) +
                               " != expected " + units_str(*r.expected.worst));
    else if (!exact && r.storage.worst_case > *r.expected.worst)
      v = Verdict::fail(0, "worst-case storage " + units_str(r.storage.worst_case) +
                               " exceeds bound " + units_str(*r.expected.worst));
  }
  out.push_back({"storage-worst", v});

  v = Verdict::ok();
  if (r.storage.steady_state) {
    if (!r.storage.steady_uniform)
      v = Verdict::fail(0, "steady-state storage differs across steady points");
    else if (*r.storage.steady_state != r.expected.steady)
      v = Verdict::fail(0, "steady-state storage " + units_str(*r.storage.steady_state) +
                               " != expected " + units_str(r.expected.steady));
  }
  out.push_back({"storage-steady", v});

  v = Verdict::ok();
  if (r.comm.write_max != Units(0) && r.comm.write_max != r.expected.write_comm)
    v = Verdict::fail(0, "write communication " + units_str(r.comm.write_max) +
                             " != expected " + units_str(r.expected.write_comm));
  out.push_back({"comm-write", v});

  v = Verdict::ok();
  Units read_bound = r.expected.read_comm_alt ? *r.expected.read_comm_alt : r.expected.read_comm;
  if (r.comm.read_max > read_bound)
    v = Verdict::fail(0, "read communication " + units_str(r.comm.read_max) +
                             " exceeds bound " + units_str(read_bound));
  out.push_back({"comm-read", v});
  return out;
}

RunArtifacts run_scenario(const Scenario& sc) {
  RunArtifacts art;
  art.trace = run(sc.cfg);
  art.cost = make_cost_report(art.trace);
  if (sc.checks.atomicity) {
    for (NamedVerdict& v : check_trace(art.trace)) art.verdicts.push_back(std::move(v));
  }
  if (sc.checks.liveness) {
    for (NamedVerdict& v : liveness_checks(art.trace)) art.verdicts.push_back(std::move(v));
  }
  if (sc.checks.cost_regression) {
    bool worst_exact = sc.cfg.algorithm == Algorithm::alg2 &&
                       sc.cfg.schedule.policy == DeliveryPolicy::delay_finalize;
    for (NamedVerdict& v : cost_checks(art.trace, worst_exact))
      art.verdicts.push_back(std::move(v));
  }
  for (const NamedVerdict& v : art.verdicts) art.pass = art.pass && v.verdict.pass;
  return art;
}

void write_artifacts(const RunArtifacts& art, const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  art.trace.save_file(dir + "/" + name + ".trace");
  std::ofstream cost(dir + "/" + name + ".cost.txt", std::ios::trunc);
  cost << art.cost.to_text();
  std::ofstream verdicts(dir + "/" + name + ".verdicts.txt", std::ios::trunc);
  for (const NamedVerdict& v : art.verdicts) {
    verdicts << (v.verdict.pass ? "PASS " : "FAIL ") << v.check;
    if (!v.verdict.pass) verdicts << ": " << v.verdict.detail;
    verdicts << "\n";
  }
}

std::string output_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("SEMU_OUT"); env && *env) return env;
  return "semu-out";
}

RunConfig fuzz_run_config(const FuzzSpec& spec, Algorithm alg, DeliveryPolicy policy,
                          std::uint64_t seed) {
  RunConfig cfg;
  if (alg == Algorithm::abd)
    cfg.params = SystemParams::make_abd(spec.grid.f, spec.value_size_bits);
  else
    cfg.params = SystemParams::make(spec.grid.n, spec.grid.f, spec.grid.nu, spec.value_size_bits);
  cfg.algorithm = alg;
  cfg.read_mode = spec.read_mode;
  cfg.schedule.seed = seed;
  cfg.schedule.policy = policy;
  cfg.schedule.fairness = true;
  cfg.workload = spec.workload;
  if (alg == Algorithm::alg1 || alg == Algorithm::abd) cfg.workload.writers = 1;
  cfg.workload.write_concurrency_cap =
      spec.concurrency_cap == -2 ? spec.grid.nu - 1 : spec.concurrency_cap;

  // Crash plan derived deterministically from the run seed.
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 12345);
  int clients = cfg.workload.writers + cfg.workload.readers;
  std::uint64_t horizon = 40 + static_cast<std::uint64_t>(clients) *
                                   static_cast<std::uint64_t>(cfg.params.n_servers) * 8;
  if (spec.server_crashes) {
    int count = static_cast<int>(rng() % static_cast<std::uint64_t>(cfg.params.max_failures + 1));
    std::set<int> victims;
    while (static_cast<int>(victims.size()) < count)
      victims.insert(1 + static_cast<int>(rng() % static_cast<std::uint64_t>(cfg.params.n_servers)));
    for (int s : victims)
      cfg.schedule.crash_plan.push_back(CrashEvent{NodeId::server(s), rng() % horizon});
  }
  if (spec.client_crashes && rng() % 3 == 0) {
    int victim = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(clients));
    cfg.schedule.crash_plan.push_back(CrashEvent{NodeId::client(victim), rng() % horizon});
  }
  return cfg;
}

FuzzSummary fuzz(const FuzzSpec& spec) {
  FuzzSummary sum;
  for (Algorithm alg : spec.algorithms) {
    for (DeliveryPolicy policy : spec.adversaries) {
      for (int i = 0; i < spec.seeds; ++i) {
        std::uint64_t seed = spec.seed_base + static_cast<std::uint64_t>(i);
        RunConfig cfg = fuzz_run_config(spec, alg, policy, seed);
        Trace trace = run(cfg);
        ++sum.runs;
        sum.aborts += trace.stats.aborted_reads;
        sum.incomplete_reads += trace.stats.invoked_reads - trace.stats.completed_reads;
        sum.completed_ops += trace.stats.completed_reads + trace.stats.completed_writes;
        sum.max_fw_iterations = std::max(sum.max_fw_iterations, trace.stats.fw_max_iterations);

        std::vector<NamedVerdict> verdicts = check_trace(trace);
        for (const NamedVerdict& v : verdicts)
          if (v.check == "persistence") ++sum.persistence_scans;
        if (spec.check_liveness)
          for (NamedVerdict& v : liveness_checks(trace)) verdicts.push_back(std::move(v));
        // Measured storage must stay within the declared worst case.
        CostReport cost = make_cost_report(trace);
        if (cost.expected.worst && cost.storage.worst_case > *cost.expected.worst)
          verdicts.push_back(
              {"storage-bound",
               Verdict::fail(0, "storage " + units_str(cost.storage.worst_case) +
                                    " exceeds " + units_str(*cost.expected.worst))});

        for (const NamedVerdict& v : verdicts) {
          if (v.verdict.pass) continue;
          ++sum.violations;
          std::ostringstream msg;
          msg << to_string(alg) << "/" << to_string(policy) << " seed " << seed << " "
              << v.check << ": " << v.verdict.detail;
          sum.failures.push_back(msg.str());
          if (spec.persist_failures && !spec.out_dir.empty()) {
            std::filesystem::create_directories(spec.out_dir);
            trace.save_file(spec.out_dir + "/fail-" + std::string(to_string(alg)) + "-" +
                            std::to_string(seed) + ".trace");
          }
          break;
        }
      }
    }
  }
  return sum;
}

}  // namespace semu
